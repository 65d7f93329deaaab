#include "concordance/session.hpp"

#include "concordance/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

namespace concordance {

namespace {

constexpr double kBoundSlack = 1e-8;

std::string random_id() {
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(m);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()), static_cast<unsigned long long>(rng()));
    return buf;
}

std::string_view to_string(Provenance p) { return p == Provenance::Elicited ? "elicited" : "estimated"; }

Provenance provenance_from(const json& j) {
    if (!j.is_string()) throw Error(ErrorCode::MalformedInput, "provenance must be a string");
    const auto s = j.get<std::string>();
    if (s == "elicited") return Provenance::Elicited;
    if (s == "estimated") return Provenance::Estimated;
    throw Error(ErrorCode::MalformedInput, "provenance must be \"elicited\" or \"estimated\"");
}

void sort_constraints(std::vector<Constraint>& c) {
    std::sort(c.begin(), c.end(), [](const Constraint& a, const Constraint& b) { return a.label < b.label; });
}

void check_label(int d, const SubsetIndex& s) {
    if (s.dimension() != d) throw Error(ErrorCode::InvalidLabel, "label dimension does not match the session");
    if (s.empty_set()) throw Error(ErrorCode::InvalidLabel, "the empty set is always 1 and cannot be constrained");
    if (s.size() % 2) throw Error(ErrorCode::InvalidLabel, "label " + s.to_string() + " has odd cardinality");
}

}  // namespace

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

PartialSignature SessionSnapshot::partial() const {
    std::vector<std::pair<SubsetIndex, double>> entries;
    for (const auto& c : constraints) entries.emplace_back(c.label, c.kappa);
    return PartialSignature::from_entries(d, std::move(entries));
}

json to_json(const SessionSnapshot& s) {
    json constraints = json::array();
    for (const auto& c : s.constraints) {
        constraints.push_back({{"label", to_json(c.label)},
                               {"kappa", c.kappa},
                               {"tau", kappa_to_tau(c.kappa, c.label.size())},
                               {"kind", c.kind},
                               {"value", c.entered},
                               {"provenance", std::string(to_string(c.provenance))}});
    }
    json bounds = to_json(s.bounds);
    json lower_tau = json::array(), upper_tau = json::array();
    for (std::size_t i = 0; i < s.bounds.targets.size(); ++i) {
        const int m = s.bounds.targets[i].size();
        lower_tau.push_back(kappa_to_tau(s.bounds.lower[i], m));
        upper_tau.push_back(kappa_to_tau(s.bounds.upper[i], m));
    }
    bounds["lower_tau"] = std::move(lower_tau);
    bounds["upper_tau"] = std::move(upper_tau);
    return {{"id", s.id},
            {"d", s.d},
            {"constraints", std::move(constraints)},
            {"created", s.created},
            {"updated", s.updated},
            {"revision", s.revision},
            {"certificate", to_json(s.certificate)},
            {"bounds", std::move(bounds)}};
}

Constraint constraint_from_json(int d, const json& j) {
    if (!j.is_object() || !j.contains("label") || !j.contains("value")) {
        throw Error(ErrorCode::MalformedInput, "a constraint needs \"label\" and \"value\"");
    }
    Constraint c;
    c.label = subset_from_json(d, j["label"]);
    check_label(d, c.label);
    c.kind = j.value("kind", std::string("kappa"));
    if (c.kind != "kappa" && c.kind != "tau") throw Error(ErrorCode::MalformedInput, "\"kind\" must be \"kappa\" or \"tau\"");
    c.entered = number_from_json(j["value"]);
    c.kappa = c.kind == "tau" ? tau_to_kappa(c.entered, c.label.size()) : c.entered;
    if (!(c.kappa >= 0.0 && c.kappa <= 1.0)) throw Error(ErrorCode::InvalidSignature, "value out of range for " + c.label.to_string());
    if (j.contains("provenance")) c.provenance = provenance_from(j["provenance"]);
    return c;
}

SessionSnapshot session_from_json(const json& j) {
    SessionSnapshot s;
    s.id = j.at("id").get<std::string>();
    s.d = j.at("d").get<int>();
    for (const auto& c : j.at("constraints")) {
        auto parsed = constraint_from_json(s.d, c);
        if (c.contains("kappa")) parsed.kappa = c["kappa"].get<double>();
        s.constraints.push_back(parsed);
    }
    s.created = j.value("created", now_iso8601());
    s.updated = j.value("updated", s.created);
    s.revision = j.value("revision", std::uint64_t{0});
    return s;
}

SessionSnapshot evaluate_session(SessionSnapshot s) {
    sort_constraints(s.constraints);
    const auto partial = s.partial();
    s.certificate = check_attainable(partial);
    if (!s.certificate.feasible) {
        throw ConstraintRejected({"constraints are not attainable" +
                                      (s.certificate.infeasibility_reason ? ": " + *s.certificate.infeasibility_reason : std::string()),
                                  {}, {}, {}});
    }
    const auto targets = partial.missing_labels();
    s.bounds = targets.empty() ? BoundsReport{} : bound_missing(partial, targets);
    return s;
}

std::shared_ptr<const SessionSnapshot> SessionStore::Slot::load() const {
    std::lock_guard lock(swap);
    return current;
}

void SessionStore::Slot::store(std::shared_ptr<const SessionSnapshot> s) {
    std::lock_guard lock(swap);
    current = std::move(s);
}

SessionStore::SessionStore(std::filesystem::path directory) : dir_(std::move(directory)) {
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_);
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.path().extension() != ".json") continue;
        try {
            std::ifstream in(entry.path());
            auto snap = evaluate_session(session_from_json(json::parse(in)));
            auto slot = std::make_shared<Slot>();
            const auto id = snap.id;
            slot->current = std::make_shared<const SessionSnapshot>(std::move(snap));
            slots_[id] = std::move(slot);
        } catch (const std::exception&) {
            // Unreadable or no longer attainable documents are skipped.
        }
    }
}

std::shared_ptr<SessionStore::Slot> SessionStore::slot(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    const auto it = slots_.find(id);
    return it == slots_.end() ? nullptr : it->second;
}

void SessionStore::persist(const SessionSnapshot& s) const {
    if (dir_.empty()) return;
    const auto target = dir_ / (s.id + ".json");
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << to_json(s).dump(2);
        out.flush();
        if (!out) throw Error(ErrorCode::NumericalFailure, "could not write session " + s.id);
    }
    std::filesystem::rename(tmp, target);
}

std::shared_ptr<const SessionSnapshot> SessionStore::create(int d, const std::vector<Constraint>& constraints) {
    if (d < 2) throw Error(ErrorCode::OutOfRange, "dimension must be at least 2");
    if (d > dimension_cap()) throw Error(ErrorCode::DimensionTooLarge, "dimension exceeds cap " + std::to_string(dimension_cap()));
    SessionSnapshot s;
    s.id = random_id();
    s.d = d;
    for (const auto& c : constraints) {
        check_label(d, c.label);
        if (std::any_of(s.constraints.begin(), s.constraints.end(), [&](const Constraint& o) { return o.label == c.label; })) {
            throw Error(ErrorCode::InvalidLabel, "label " + c.label.to_string() + " given twice");
        }
        s.constraints.push_back(c);
    }
    s.created = s.updated = now_iso8601();
    auto snap = std::make_shared<const SessionSnapshot>(evaluate_session(std::move(s)));
    persist(*snap);
    auto sl = std::make_shared<Slot>();
    sl->current = snap;
    std::unique_lock lock(map_mutex_);
    slots_[snap->id] = std::move(sl);
    return snap;
}

std::shared_ptr<const SessionSnapshot> SessionStore::get(const std::string& id) const {
    const auto sl = slot(id);
    return sl ? sl->load() : nullptr;
}

std::shared_ptr<const SessionSnapshot> SessionStore::add_constraint(const std::string& id, const Constraint& c) {
    const auto sl = slot(id);
    if (!sl) return nullptr;
    std::lock_guard write(sl->write);
    const auto cur = sl->load();
    check_label(cur->d, c.label);

    const auto existing = std::find_if(cur->constraints.begin(), cur->constraints.end(), [&](const Constraint& o) { return o.label == c.label; });
    if (existing != cur->constraints.end() && existing->kappa == c.kappa && existing->provenance == c.provenance) return cur;

    SessionSnapshot next = *cur;
    std::erase_if(next.constraints, [&](const Constraint& o) { return o.label == c.label; });
    // The value must lie within the bounds implied by the other constraints.
    {
        const auto others = next.partial();
        const std::vector<SubsetIndex> target{c.label};
        const auto b = bound_missing(others, target);
        if (c.kappa < b.lower[0] - kBoundSlack || c.kappa > b.upper[0] + kBoundSlack) {
            throw ConstraintRejected({"value for " + c.label.to_string() + " lies outside its attainable interval", b.lower[0],
                                      b.upper[0], c.kappa});
        }
    }
    next.constraints.push_back(c);
    next = evaluate_session(std::move(next));
    next.updated = now_iso8601();
    ++next.revision;
    auto snap = std::make_shared<const SessionSnapshot>(std::move(next));
    persist(*snap);
    sl->store(snap);
    return snap;
}

std::shared_ptr<const SessionSnapshot> SessionStore::remove_constraint(const std::string& id, const SubsetIndex& label) {
    const auto sl = slot(id);
    if (!sl) return nullptr;
    std::lock_guard write(sl->write);
    SessionSnapshot next = *sl->load();
    const auto removed = std::erase_if(next.constraints, [&](const Constraint& o) { return o.label == label; });
    if (removed == 0) throw Error(ErrorCode::InvalidLabel, "label " + label.to_string() + " is not constrained");
    next = evaluate_session(std::move(next));
    next.updated = now_iso8601();
    ++next.revision;
    auto snap = std::make_shared<const SessionSnapshot>(std::move(next));
    persist(*snap);
    sl->store(snap);
    return snap;
}

bool SessionStore::erase(const std::string& id) {
    std::unique_lock lock(map_mutex_);
    if (slots_.erase(id) == 0) return false;
    if (!dir_.empty()) std::filesystem::remove(dir_ / (id + ".json"));
    return true;
}

std::vector<std::string> SessionStore::ids() const {
    std::shared_lock lock(map_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : slots_) out.push_back(id);
    return out;
}

}  // namespace concordance
