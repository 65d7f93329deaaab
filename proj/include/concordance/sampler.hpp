#pragma once

#include "concordance/signature.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace concordance {

/// Diagonal-membership tolerance for sample rows.
inline constexpr double kDiagonalTolerance = 1e-12;

/// C^(k)(u) = (min over J_k + min over the complement - 1)^+, empty minimum = 1.
double extremal_cdf(int k, std::span<const double> u);
double mixture_cdf(const MixtureWeights& w, std::span<const double> u);

struct MixtureSample {
    Eigen::MatrixXd values;  // n x d
    std::uint64_t seed = 0;
    MixtureWeights weights;
    std::vector<int> diagonal;  // 1-based k drawn for each row
};

struct SamplerOptions {
    unsigned threads = 0;  // 0 = hardware concurrency
};

/// Rows U B + (1-U)(1-B) with B = s_k or 1-s_k, each with probability w_k/2.
/// Blocks of 65536 rows use the stream (seed, block).
MixtureSample sample_mixture(const MixtureWeights& w, std::uint64_t n, std::uint64_t seed, const SamplerOptions& options = {});

/// (U, Y) with Y uniform on {0,1}^3 and P(U <= u | y) = u + (-1)^(y1+y2+y3) theta u(1-u)/4;
/// returns the n x 3 matrix U Y + (1-U)(1-Y). Requires |theta| <= 4.
Eigen::MatrixXd sample_counterexample(double theta, std::uint64_t n, std::uint64_t seed);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against U(0,1), asymptotic p-value.
KsResult ks_uniform(std::vector<double> values);

struct DiagonalDiagnostic {
    int k = 0;
    std::uint64_t rows = 0;
    bool tested = false;  // at least 20 rows
    KsResult ks;
};

struct DiagnosticReport {
    int d = 0;
    std::uint64_t n = 0;
    double on_diagonal_fraction = 0.0;
    std::vector<DiagonalDiagnostic> diagonals;  // one entry per k
    bool uniformity_tested = false;  // false when no diagonal had 20 rows
    double level = 0.01;
    double min_p_value = 1.0;
    bool pass = false;
};

/// Every row on a diagonal, and U_1 uniform given the diagonal (Bonferroni over tested diagonals).
DiagnosticReport validate_mixture(const Eigen::MatrixXd& sample, double level = 0.01);

struct PairDiagnostic {
    int i = 0;  // 1-based columns
    int j = 0;
    DiagnosticReport report;
};

/// validate_mixture applied to every bivariate margin.
std::vector<PairDiagnostic> validate_pairs(const Eigen::MatrixXd& sample, double level = 0.01);

}  // namespace concordance
