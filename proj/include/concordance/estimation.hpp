#pragma once

#include "concordance/signature.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace concordance {

/// n observations of d variables, row-major in the sense of one row per observation.
class SampleMatrix {
public:
    SampleMatrix() = default;
    /// Requires n >= 2 and d >= 2, finite entries. Names are optional (empty or d entries).
    explicit SampleMatrix(Eigen::MatrixXd values, std::vector<std::string> column_names = {});

    int n() const noexcept { return static_cast<int>(values_.rows()); }
    int d() const noexcept { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const std::vector<std::string>& column_names() const noexcept { return names_; }

    /// True if two rows share a value in some column.
    bool has_ties() const;
    /// Number of tied row pairs per column pair (i, j), i <= j; diagonal counts ties within column i.
    Eigen::MatrixXi tie_counts() const;

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> names_;
};

struct EmpiricalSignature {
    FullSignature full;
    MixtureWeights weights;
    std::uint64_t n_pairs = 0;  // n(n-1)/2
    bool tie_adjusted = false;
    /// Number of unordered pairs per canonical pattern k; fractional only when ties were split.
    std::vector<double> pattern_counts;
};

struct EstimationOptions {
    /// Row count above which pairs are processed by worker threads.
    int parallel_threshold = 2000;
    unsigned threads = 0;  // 0 = hardware concurrency
};

/// Tie-free estimator. Throws TiesPresent (use empirical_signature_ties) or TooFewRows.
EmpiricalSignature empirical_signature(const SampleMatrix& data, const EstimationOptions& options = {});

/// Splits every pair with m tied coordinates into its 2^m resolutions, each weighted 2^-m.
EmpiricalSignature empirical_signature_ties(const SampleMatrix& data, const EstimationOptions& options = {});

struct BootstrapResult {
    std::vector<double> signature_se;  // per even label, graded lexicographic
    std::vector<double> weights_se;
    int resamples = 0;
};

/// Nonparametric bootstrap over rows. Pairs drawing the same original row twice are skipped.
BootstrapResult bootstrap_standard_errors(const SampleMatrix& data, int resamples = 500, std::uint64_t seed = 0);

struct CsvOptions {
    std::optional<bool> header;  // unset: header present iff the first row is not numeric
    bool log_returns = false;
    /// Column names (requires a header) or 1-based positions as text; empty keeps all columns.
    std::vector<std::string> columns;
    char delimiter = ',';
};

SampleMatrix ingest_csv(std::istream& in, const CsvOptions& options = {});
SampleMatrix ingest_csv_file(const std::string& path, const CsvOptions& options = {});

}  // namespace concordance
