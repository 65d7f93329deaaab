#pragma once

#include "concordance/json_io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace concordance {

struct ReproduceOptions {
    std::uint64_t seed = 0;
    std::uint64_t samples = 10'000'000;
    unsigned threads = 0;
};

/// One published artifact recomputed and compared with the printed numbers.
struct ReproducedArtifact {
    std::string name;     // file stem, e.g. "tlimit3"
    std::string title;
    bool pass = false;
    std::string summary;  // one line
    double seconds = 0.0;
    double budget_seconds = 0.0;
    json data;
};

ReproducedArtifact reproduce_amatrix();
ReproducedArtifact reproduce_crypto_weights();
ReproducedArtifact reproduce_three_pairs();
ReproducedArtifact reproduce_kendall4_bounds();
ReproducedArtifact reproduce_five_dim_vertices();
ReproducedArtifact reproduce_tlimit3(const ReproduceOptions& options);
ReproducedArtifact reproduce_normal5(const ReproduceOptions& options);
ReproducedArtifact reproduce_elliptical_gap();
ReproducedArtifact reproduce_b7();

std::vector<ReproducedArtifact> reproduce_all(const ReproduceOptions& options);

/// {"name","title","pass","summary","seconds","budget_seconds"}
json report_entry(const ReproducedArtifact& a);

/// Printed inputs shared with tests and tools.
namespace published {
/// Kendall matrix of the four-dimensional non-elliptical example.
Eigen::MatrixXd kendall4_matrix();
PartialSignature kendall4_partial();
/// Empirical crypto signature (BTC, ETH, XRP, LTC).
EvenSignature crypto_signature();
std::vector<double> crypto_weights();
/// d = 5, all pairs 2/3, {1,2,3,4} and {1,2,3,5} at 0.4.
PartialSignature five_dim_example();
/// rho_ij = k/16 for the k-th pair.
CorrelationMatrix normal5_correlation();
std::vector<double> normal5_kappa();   // 32 entries, graded lexicographic even labels
std::vector<double> normal5_weights();
}  // namespace published

}  // namespace concordance
