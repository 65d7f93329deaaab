#pragma once

#include "concordance/subset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace concordance {

/// Tolerance below which a negative weight is a verdict rather than rounding noise.
inline constexpr double kNegativityTolerance = 1e-9;

/// Process-wide dimension cap for dense A_d work (default 14, i.e. 8192 columns).
int dimension_cap() noexcept;
void set_dimension_cap(int cap);

/// Number of extremal copulas in dimension d: 2^(d-1).
inline std::size_t extremal_count(int d) { return std::size_t{1} << (d - 1); }

/// Binary coding s_k of the k-th extremal copula (k is 1-based).
struct ExtremalCode {
    int k = 1;
    int d = 2;
    std::vector<int> bits;  // bits[0] is s_{k,1}, always 0
    Mask ones = 0;          // members j with s_{k,j} = 1, i.e. the complement of J_k

    SubsetIndex index_set() const;  // J_k, positions of zeros
    SubsetIndex complement_set() const;
};

ExtremalCode binary_code(int k, int d);
/// Flips to leading-zero form first when bits[0] == 1. Returns the 1-based k.
int canonical_index(std::span<const int> bits);
/// Same as canonical_index for a mask of ones (member j <-> bit j-1). Returns 0-based column.
std::size_t canonical_column(Mask ones, int d) noexcept;
/// Mask of ones of the extremal code in 0-based column `col`.
Mask column_ones(std::size_t col, int d) noexcept;

/// a_{I,k}: 1 iff I lies entirely inside J_k or entirely inside its complement.
inline bool coefficient(Mask subset, Mask ones) noexcept {
    const Mask hit = subset & ones;
    return hit == 0 || hit == subset;
}

/// The 0/1 matrix A_d: rows are even subsets (graded lex), columns k = 1..2^(d-1).
class CoefficientMatrix {
public:
    explicit CoefficientMatrix(int d);

    int dimension() const noexcept { return d_; }
    std::size_t rows() const noexcept { return row_masks_.size(); }
    std::size_t cols() const noexcept { return extremal_count(d_); }
    const std::vector<Mask>& row_masks() const noexcept { return row_masks_; }
    int operator()(std::size_t row, std::size_t col) const noexcept {
        return coefficient(row_masks_[row], column_ones(col, d_)) ? 1 : 0;
    }
    Eigen::MatrixXd dense() const;
    /// Rows of A_d for arbitrary subsets (used for A^(1)/A^(2) splits and odd rows).
    Eigen::MatrixXd rows_for(std::span<const Mask> subsets) const;

private:
    int d_;
    std::vector<Mask> row_masks_;
};

CoefficientMatrix build_A_matrix(int d);

/// Concordance probabilities over the even power set, graded lexicographic order.
class EvenSignature {
public:
    EvenSignature() = default;
    /// Validates: length 2^(d-1), first entry 1, entries in [0,1] (1e-9 slack, clamped).
    EvenSignature(int d, std::vector<double> values);

    int dimension() const noexcept { return d_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double at(const SubsetIndex& s) const;
    const std::vector<Mask>& labels() const noexcept { return labels_; }

private:
    int d_ = 0;
    std::vector<double> values_;
    std::vector<Mask> labels_;
};

/// Concordance probabilities over the full power set, graded lexicographic order.
class FullSignature {
public:
    FullSignature() = default;
    FullSignature(int d, std::vector<double> values);

    int dimension() const noexcept { return d_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<Mask>& labels() const noexcept { return labels_; }
    double at(const SubsetIndex& s) const;
    EvenSignature even() const;

private:
    int d_ = 0;
    std::vector<double> values_;
    std::vector<Mask> labels_;
};

/// Weights of an extremal mixture, coordinate k-1 <-> C^(k).
class MixtureWeights {
public:
    MixtureWeights() = default;
    /// Validates nonnegativity and unit sum to 1e-9; clamps (-1e-9, 0) to 0.
    MixtureWeights(int d, std::vector<double> w);

    static MixtureWeights unit(int d, int k);  // all mass on C^(k)

    int dimension() const noexcept { return d_; }
    const std::vector<double>& values() const noexcept { return w_; }
    double operator[](std::size_t i) const { return w_[i]; }
    std::size_t size() const noexcept { return w_.size(); }

private:
    int d_ = 0;
    std::vector<double> w_;
};

EvenSignature signature_from_weights(const MixtureWeights& w);
/// Throws NotAttainable when a solved weight is below -1e-9.
MixtureWeights weights_from_signature(const EvenSignature& kappa);
/// Raw solution of A_d w = kappa with no sign check.
std::vector<double> solve_signature_system(int d, std::span<const double> kappa);
/// kappa_I for any subset I (odd ones included) of the mixture with weights w.
double concordance_of_mixture(const MixtureWeights& w, Mask subset);
FullSignature extend_to_full(const EvenSignature& kappa);

enum class Direction { ToTau, ToKappa };
double tau_kappa_convert(double value, int cardinality, Direction direction);
inline double kappa_to_tau(double kappa, int m) { return tau_kappa_convert(kappa, m, Direction::ToTau); }
inline double tau_to_kappa(double tau, int m) { return tau_kappa_convert(tau, m, Direction::ToKappa); }

/// P_tau[i,j] = 2 kappa_{ij} - 1 with unit diagonal.
Eigen::MatrixXd kendall_matrix_from_even(const EvenSignature& kappa);

}  // namespace concordance
