#pragma once

#include "concordance/signature.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace concordance {

/// Largest n for which binomial(n, p) is computed.
inline constexpr int kMaxBinomial = 30;

/// C(n, p) in exact integer arithmetic; 0 for p < 0 or p > n. Throws DimensionTooLarge for n > 30.
std::uint64_t binomial(int n, int p);

/// Reduced fraction with positive denominator.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1);
    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    std::string to_string() const;
    bool operator==(const Rational&) const = default;
};

struct ComonotonicProfile {
    int d = 2;
    std::vector<int> eta;    // eta_k = max(|J_k|, |J_k^c|), k = 1..2^(d-1)
    std::vector<int> h;      // distinct values, descending: d, d-1, ..., ceil(d/2)
    std::vector<std::uint64_t> mu;  // number of k in each group
    /// 0-based group of column k-1.
    std::vector<int> group;
};

ComonotonicProfile comonotonic_profile(int d);

/// Exact B_d: rows l = 0, 2, ..., 2 floor(d/2); columns the groups of the profile.
std::vector<std::vector<Rational>> build_B_matrix_exact(int d);
Eigen::MatrixXd build_B_matrix(int d);

/// One concordance probability per even cardinality 0, 2, ..., 2 floor(d/2); k[0] = 1.
struct SkeletalSignature {
    int d = 2;
    std::vector<double> k;
};

SkeletalSignature make_skeletal(int d, std::vector<double> k);

struct SkeletalSolution {
    std::vector<double> v;  // group weights, clamped and renormalized when attainable
    std::vector<double> raw;
    bool attainable = false;
};

SkeletalSolution skeletal_solve(const SkeletalSignature& k);

/// w_k = v_i / mu_i for the group i of k.
MixtureWeights expand_skeletal(const std::vector<double>& v, int d);

/// kappa_I equal across all I of the same size, within tol.
bool is_equiconcordant(const EvenSignature& kappa, double tol = 1e-9);

/// Averages kappa over each cardinality.
SkeletalSignature skeletal_of(const EvenSignature& kappa);

}  // namespace concordance
