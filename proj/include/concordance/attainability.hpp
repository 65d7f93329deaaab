#pragma once

#include "concordance/signature.hpp"
#include "concordance/subset.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <utility>
#include <vector>

namespace concordance {

/// Equality constraints are compared at this tolerance, sign constraints at kNegativityTolerance.
inline constexpr double kEqualityTolerance = 1e-8;
/// Phase-1 optima above this certify infeasibility.
inline constexpr double kInfeasibilityCertificate = 1e-7;

/// Concordance probabilities prescribed on a label set of even subsets.
class PartialSignature {
public:
    PartialSignature() = default;
    /// Values aligned with `labels`; the empty-set value must be 1 and all values in [0,1].
    PartialSignature(LabelSet labels, std::vector<double> values);

    /// Entries in any order; the empty set is added with value 1 when missing.
    static PartialSignature from_entries(int d, std::vector<std::pair<SubsetIndex, double>> entries);
    static PartialSignature from_even(const EvenSignature& kappa);
    /// kappa for every pair, in lexicographic pair order (12, 13, ..., (d-1)d).
    static PartialSignature from_pairs(int d, std::span<const double> pair_kappas);

    int dimension() const noexcept { return labels_.dimension(); }
    const LabelSet& labels() const noexcept { return labels_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::optional<double> value_of(const SubsetIndex& s) const;
    bool is_complete() const noexcept { return values_.size() == extremal_count(dimension()); }
    /// Even labels not prescribed, graded lexicographic.
    std::vector<SubsetIndex> missing_labels() const;

    PartialSignature with(const SubsetIndex& s, double value) const;
    PartialSignature without(const SubsetIndex& s) const;

private:
    LabelSet labels_;
    std::vector<double> values_;
};

struct FeasibilityCertificate {
    bool feasible = false;
    std::optional<MixtureWeights> witness;
    std::optional<std::string> infeasibility_reason;
    double phase_one_objective = 0.0;
};

struct WeightPolytope {
    std::vector<MixtureWeights> vertices;
    int rank = 0;  // row rank of A^(1)
};

struct BoundsReport {
    std::vector<SubsetIndex> targets;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<MixtureWeights> argmin;
    std::vector<MixtureWeights> argmax;
};

struct EnumerationOptions {
    int dimension_cap = 6;
    std::size_t max_bases = 5'000'000;
    std::stop_token stop;
};

FeasibilityCertificate check_attainable(const PartialSignature& partial);

/// Per-target LP minimum and maximum of kappa_I over the feasible weight set.
BoundsReport bound_missing(const PartialSignature& partial, std::span<const SubsetIndex> targets);

/// All vertices of {w >= 0 : A^(1) w = kappa_S}.
WeightPolytope enumerate_vertices(const PartialSignature& partial, const EnumerationOptions& options = {});

/// kappa_targets = A^(2) w_i for each vertex w_i.
std::vector<std::vector<double>> project_vertices(const WeightPolytope& polytope,
                                                  std::span<const SubsetIndex> targets);

/// Throws InvalidMatrix unless square, symmetric (1e-12), unit diagonal, entries in [-1,1].
void validate_kendall_matrix(const Eigen::MatrixXd& p_tau);

/// Membership of a Kendall rank correlation matrix in the cut polytope.
FeasibilityCertificate check_cut_polytope(const Eigen::MatrixXd& p_tau);

/// P^(k) = (2 s_k - 1)(2 s_k - 1)'.
Eigen::MatrixXd extremal_correlation_matrix(int k, int d);

enum class Extreme { Smallest, Largest };

struct CollectiveExtremum {
    MixtureWeights weights;
    std::vector<double> values;  // kappa at the targets
    double objective = 0.0;      // squared Euclidean distance to 0 (Smallest) or 1 (Largest)
    double duality_gap = 0.0;
    int iterations = 0;
};

/// Minimizes ||A^(2) w|| (Smallest) or ||A^(2) w - 1|| (Largest) over the
/// feasible weight set with Frank-Wolfe iterations. The minimizer need not be unique.
CollectiveExtremum collective_extremes(const PartialSignature& partial, std::span<const SubsetIndex> targets,
                                       Extreme which, double tolerance = 1e-10, int max_iterations = 2000);

}  // namespace concordance
