#pragma once

#include "concordance/attainability.hpp"
#include "concordance/json_io.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace concordance {

enum class Provenance { Elicited, Estimated };

struct Constraint {
    SubsetIndex label;
    double kappa = 0.0;
    std::string kind = "kappa";  // how the value was entered
    double entered = 0.0;
    Provenance provenance = Provenance::Elicited;
};

/// Immutable state of one elicitation session.
struct SessionSnapshot {
    std::string id;
    int d = 0;
    std::vector<Constraint> constraints;  // graded lexicographic by label
    std::string created;
    std::string updated;
    std::uint64_t revision = 0;
    FeasibilityCertificate certificate;
    BoundsReport bounds;  // over every even label not constrained

    PartialSignature partial() const;
};

json to_json(const SessionSnapshot& s);
/// {"label", "value"[, "kind", "provenance"]}
Constraint constraint_from_json(int d, const json& j);
SessionSnapshot session_from_json(const json& j);

/// A rejected constraint, with the interval it had to fall in when the label was bounded.
struct ConstraintRejection {
    std::string message;
    std::optional<double> lower;
    std::optional<double> upper;
    std::optional<double> value;
};

class ConstraintRejected : public std::runtime_error {
public:
    explicit ConstraintRejected(ConstraintRejection r) : std::runtime_error(r.message), rejection(std::move(r)) {}
    ConstraintRejection rejection;
};

/// Sessions keyed by id, one JSON document per session when a directory is given.
/// Mutations of one session are serialized; reads return the latest snapshot without waiting.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path directory = {});

    std::shared_ptr<const SessionSnapshot> create(int d, const std::vector<Constraint>& constraints);
    /// nullptr when unknown.
    std::shared_ptr<const SessionSnapshot> get(const std::string& id) const;
    /// Adds or replaces the constraint on c.label. Throws ConstraintRejected and leaves the session unchanged
    /// when the value lies outside the current bounds or the result is not attainable.
    std::shared_ptr<const SessionSnapshot> add_constraint(const std::string& id, const Constraint& c);
    /// Throws Error(InvalidLabel) when the label is not constrained.
    std::shared_ptr<const SessionSnapshot> remove_constraint(const std::string& id, const SubsetIndex& label);
    bool erase(const std::string& id);
    std::vector<std::string> ids() const;

private:
    struct Slot {
        std::mutex write;
        mutable std::mutex swap;
        std::shared_ptr<const SessionSnapshot> current;
        std::shared_ptr<const SessionSnapshot> load() const;
        void store(std::shared_ptr<const SessionSnapshot> s);
    };

    std::shared_ptr<Slot> slot(const std::string& id) const;
    void persist(const SessionSnapshot& s) const;

    std::filesystem::path dir_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
};

/// Rebuilds certificate and bounds for the given constraints. Throws ConstraintRejected if not attainable.
SessionSnapshot evaluate_session(SessionSnapshot base);

std::string now_iso8601();

}  // namespace concordance
