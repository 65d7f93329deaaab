#pragma once

#include "concordance/signature.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stop_token>
#include <string_view>
#include <vector>

namespace concordance {

/// Symmetric, unit-diagonal, entries in [-1,1], positive semi-definite (eigenvalues >= -1e-9).
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;
    explicit CorrelationMatrix(const Eigen::MatrixXd& p);
    /// Off-diagonal correlations in lexicographic pair order.
    static CorrelationMatrix from_pairs(int d, const std::vector<double>& rho);
    /// All off-diagonal entries equal to rho.
    static CorrelationMatrix equicorrelated(int d, double rho);

    int dimension() const noexcept { return static_cast<int>(p_.rows()); }
    const Eigen::MatrixXd& matrix() const noexcept { return p_; }
    double operator()(int i, int j) const { return p_(i, j); }
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }
    /// A with A A' = P from the symmetric eigendecomposition; tiny negative eigenvalues clamped to 0.
    const Eigen::MatrixXd& root() const noexcept { return root_; }

private:
    Eigen::MatrixXd p_;
    Eigen::MatrixXd root_;
    double min_eigenvalue_ = 1.0;
};

struct McConfig {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    /// Use Z and -Z together: counts both orthants of each pattern.
    bool antithetic = true;
    unsigned threads = 0;  // 0 = hardware concurrency
    std::stop_token stop;
};

enum class OrthantMethod { Exact, MonteCarlo };
std::string_view to_string(OrthantMethod m);

struct OrthantEstimate {
    double value = 0.0;
    double std_error = 0.0;
    OrthantMethod method = OrthantMethod::Exact;
};

/// Counts of the sign patterns Y = 1{A Z > 0} over a shared normal batch.
struct PatternCounts {
    int d = 0;
    std::uint64_t samples = 0;
    std::vector<std::uint64_t> raw;        // indexed by the mask of ones, 2^d entries
    std::vector<std::uint64_t> canonical;  // pattern and its complement merged, 2^(d-1) entries
};

/// Batches of 65536 draws; batch b uses the stream (seed, b), so counts do not depend on threading.
PatternCounts simulate_patterns(const CorrelationMatrix& p, const McConfig& mc);

/// P(Z_I < 0) for Z ~ N(0, P). Exact for |I| <= 3, Monte Carlo otherwise.
OrthantEstimate orthant_probability(const CorrelationMatrix& p, const SubsetIndex& subset, const McConfig& mc = {});

struct EllipticalSignature {
    EvenSignature raw;        // exact pairs, Monte Carlo for |I| >= 4
    EvenSignature projected;  // nearest attainable after clamping negative weights
    std::vector<OrthantEstimate> entries;  // kappa estimates aligned with raw
    MixtureWeights weights;   // weights of the projected signature
    std::uint64_t samples = 0;  // 0 when every entry is exact
};

EllipticalSignature elliptical_signature(const CorrelationMatrix& p, const McConfig& mc = {});

/// Componentwise 2 arcsin(rho) / pi.
Eigen::MatrixXd arcsin_tau_matrix(const CorrelationMatrix& p);
/// Componentwise sin(pi tau / 2).
Eigen::MatrixXd sin_back_transform(const Eigen::MatrixXd& p_tau);

struct EllipticalVerdict {
    bool attainable = false;
    Eigen::MatrixXd back_transform;
    double min_eigenvalue = 0.0;
};

/// Whether P_tau is the Kendall matrix of some elliptical distribution.
EllipticalVerdict elliptical_attainable(const Eigen::MatrixXd& p_tau);

enum class TLimitMode { Analytic, MonteCarlo };

struct TLimitWeights {
    MixtureWeights weights;
    std::vector<double> std_errors;  // zero where exact
    TLimitMode mode = TLimitMode::Analytic;
    std::uint64_t samples = 0;
};

/// Weights of the extremal mixture that the t copula with correlation P approaches as nu -> 0.
TLimitWeights t_limit_weights(const CorrelationMatrix& p, TLimitMode mode, const McConfig& mc = {});

/// 1-based k whose weight is forced to zero by identical or opposite rows of the root of P.
std::vector<int> rank_deficient_support(const CorrelationMatrix& p);

struct SkeletalCurvePoint {
    double rho = 0.0;
    std::vector<double> k;          // kappa_0, kappa_2, kappa_4, ...
    std::vector<double> std_error;  // per entry
};

/// Skeletal signatures of equicorrelated normal (hence elliptical) copulas over a grid of rho.
std::vector<SkeletalCurvePoint> exchangeable_skeletal_curve(int d, const std::vector<double>& rhos, const McConfig& mc = {});

}  // namespace concordance
