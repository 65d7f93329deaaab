#include "concordance/signature.hpp"

#include "concordance/error.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace concordance {

namespace {

std::atomic<int> g_dimension_cap{14};

constexpr double kRangeSlack = 1e-9;

void check_dimension_for_matrix(int d) {
    if (d < 2) throw Error(ErrorCode::OutOfRange, "dimension must be at least 2");
    if (d > dimension_cap()) {
        throw Error(ErrorCode::DimensionTooLarge,
                    "dimension " + std::to_string(d) + " exceeds cap " + std::to_string(dimension_cap()));
    }
}

Mask full_mask(int d) { return (Mask{1} << d) - 1; }

// Index of every mask inside a graded-lex label list, dense over 2^d.
std::vector<int> position_table(int d, const std::vector<Mask>& labels) {
    std::vector<int> pos(std::size_t{1} << d, -1);
    for (std::size_t i = 0; i < labels.size(); ++i) pos[labels[i]] = static_cast<int>(i);
    return pos;
}

std::vector<Mask> all_column_ones(int d) {
    std::vector<Mask> ones(extremal_count(d));
    for (std::size_t c = 0; c < ones.size(); ++c) ones[c] = column_ones(c, d);
    return ones;
}

using LuPtr = std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXd>>;

// Read-only memo of LU factors of A_d keyed by d.
LuPtr cached_lu(int d) {
    static std::mutex mutex;
    static std::map<int, LuPtr> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(d); it != cache.end()) return it->second;
    }
    auto lu = std::make_shared<const Eigen::PartialPivLU<Eigen::MatrixXd>>(CoefficientMatrix(d).dense());
    std::lock_guard lock(mutex);
    return cache.emplace(d, std::move(lu)).first->second;
}

double clamp_unit(double v, const char* what) {
    if (!std::isfinite(v) || v < -kRangeSlack || v > 1.0 + kRangeSlack) {
        std::ostringstream os;
        os << what << " value " << v << " outside [0,1]";
        throw Error(ErrorCode::InvalidSignature, os.str());
    }
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace

int dimension_cap() noexcept { return g_dimension_cap.load(std::memory_order_relaxed); }

void set_dimension_cap(int cap) {
    if (cap < 2 || cap > 20) throw Error(ErrorCode::OutOfRange, "dimension cap must lie in [2, 20]");
    g_dimension_cap.store(cap, std::memory_order_relaxed);
}

SubsetIndex ExtremalCode::index_set() const { return SubsetIndex(d, full_mask(d) & ~ones); }
SubsetIndex ExtremalCode::complement_set() const { return SubsetIndex(d, ones); }

Mask column_ones(std::size_t col, int d) noexcept {
    Mask ones = 0;
    for (int j = 1; j <= d; ++j) {
        if ((col >> (d - j)) & 1U) ones |= Mask{1} << (j - 1);
    }
    return ones;
}

std::size_t canonical_column(Mask ones, int d) noexcept {
    if (ones & 1U) ones ^= full_mask(d);
    std::size_t col = 0;
    for (int j = 1; j <= d; ++j) {
        if ((ones >> (j - 1)) & 1U) col |= std::size_t{1} << (d - j);
    }
    return col;
}

ExtremalCode binary_code(int k, int d) {
    if (d < 2 || d > kMaxSubsetDimension) throw Error(ErrorCode::OutOfRange, "dimension must lie in [2, 30]");
    const auto count = static_cast<long long>(extremal_count(d));
    if (k < 1 || k > count) {
        throw Error(ErrorCode::OutOfRange,
                    "k = " + std::to_string(k) + " outside [1, " + std::to_string(count) + "]");
    }
    ExtremalCode code;
    code.k = k;
    code.d = d;
    code.ones = column_ones(static_cast<std::size_t>(k - 1), d);
    code.bits.resize(static_cast<std::size_t>(d));
    for (int j = 1; j <= d; ++j) code.bits[static_cast<std::size_t>(j - 1)] = (code.ones >> (j - 1)) & 1U;
    return code;
}

int canonical_index(std::span<const int> bits) {
    const int d = static_cast<int>(bits.size());
    if (d < 1 || d > kMaxSubsetDimension) throw Error(ErrorCode::InvalidBits, "bit vector has invalid length");
    Mask ones = 0;
    for (int j = 0; j < d; ++j) {
        const int b = bits[static_cast<std::size_t>(j)];
        if (b != 0 && b != 1) throw Error(ErrorCode::InvalidBits, "bit vector entries must be 0 or 1");
        if (b) ones |= Mask{1} << j;
    }
    return static_cast<int>(canonical_column(ones, d)) + 1;
}

CoefficientMatrix::CoefficientMatrix(int d) : d_(d) {
    check_dimension_for_matrix(d);
    row_masks_ = even_subset_masks(d);
}

Eigen::MatrixXd CoefficientMatrix::dense() const { return rows_for(row_masks_); }

Eigen::MatrixXd CoefficientMatrix::rows_for(std::span<const Mask> subsets) const {
    const auto ones = all_column_ones(d_);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(subsets.size()), static_cast<Eigen::Index>(ones.size()));
    for (std::size_t r = 0; r < subsets.size(); ++r)
        for (std::size_t c = 0; c < ones.size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = coefficient(subsets[r], ones[c]) ? 1.0 : 0.0;
    return m;
}

CoefficientMatrix build_A_matrix(int d) { return CoefficientMatrix(d); }

EvenSignature::EvenSignature(int d, std::vector<double> values) : d_(d), values_(std::move(values)) {
    if (d < 2 || d > kMaxSubsetDimension) throw Error(ErrorCode::OutOfRange, "dimension must lie in [2, 30]");
    if (values_.size() != extremal_count(d)) {
        throw Error(ErrorCode::InvalidSignature,
                    "even signature needs " + std::to_string(extremal_count(d)) + " values, got " +
                        std::to_string(values_.size()));
    }
    if (std::abs(values_.front() - 1.0) > kRangeSlack) {
        throw Error(ErrorCode::InvalidSignature, "kappa of the empty set must be 1");
    }
    values_.front() = 1.0;
    for (double& v : values_) v = clamp_unit(v, "concordance");
    labels_ = even_subset_masks(d);
}

double EvenSignature::at(const SubsetIndex& s) const {
    auto it = std::find(labels_.begin(), labels_.end(), s.mask());
    if (s.dimension() != d_ || it == labels_.end()) {
        throw Error(ErrorCode::InvalidLabel, s.to_string() + " is not an even label of this signature");
    }
    return values_[static_cast<std::size_t>(it - labels_.begin())];
}

FullSignature::FullSignature(int d, std::vector<double> values) : d_(d), values_(std::move(values)) {
    if (d < 2 || d > 20) throw Error(ErrorCode::OutOfRange, "dimension must lie in [2, 20]");
    if (values_.size() != (std::size_t{1} << d)) throw Error(ErrorCode::InvalidSignature, "full signature has wrong length");
    labels_ = all_subset_masks(d);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] = clamp_unit(values_[i], "concordance");
        if (std::popcount(labels_[i]) <= 1 && std::abs(values_[i] - 1.0) > kRangeSlack) {
            throw Error(ErrorCode::InvalidSignature, "empty set and singletons must have kappa = 1");
        }
    }
    // The odd entries are implied by the even ones.
    const auto pos = position_table(d, labels_);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const Mask I = labels_[i];
        const int m = std::popcount(I);
        if (m < 3 || m % 2 == 0) continue;
        double v = 1.0 - m / 2.0;
        for (Mask A = (I - 1) & I; A != 0; A = (A - 1) & I) {
            const int a = std::popcount(A);
            if (a < 2) continue;
            v += ((a % 2 == 0) ? 0.5 : -0.5) * values_[static_cast<std::size_t>(pos[A])];
        }
        if (std::abs(v - values_[i]) > 1e-8) {
            throw Error(ErrorCode::InvalidSignature,
                        "odd entry " + SubsetIndex(d, I).to_string() + " violates the inclusion-exclusion identity");
        }
    }
}

double FullSignature::at(const SubsetIndex& s) const {
    if (s.dimension() != d_) throw Error(ErrorCode::InvalidLabel, "label from a different dimension");
    auto it = std::find(labels_.begin(), labels_.end(), s.mask());
    return values_[static_cast<std::size_t>(it - labels_.begin())];
}

EvenSignature FullSignature::even() const {
    std::vector<double> v;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (std::popcount(labels_[i]) % 2 == 0) v.push_back(values_[i]);
    return EvenSignature(d_, std::move(v));
}

MixtureWeights::MixtureWeights(int d, std::vector<double> w) : d_(d), w_(std::move(w)) {
    if (d < 2 || d > kMaxSubsetDimension) throw Error(ErrorCode::OutOfRange, "dimension must lie in [2, 30]");
    if (w_.size() != extremal_count(d)) {
        throw Error(ErrorCode::InvalidWeights,
                    "weights need " + std::to_string(extremal_count(d)) + " entries, got " + std::to_string(w_.size()));
    }
    double sum = 0.0;
    for (double& x : w_) {
        if (!std::isfinite(x) || x < -kNegativityTolerance) {
            std::ostringstream os;
            os << "negative or non-finite weight " << x;
            throw Error(ErrorCode::InvalidWeights, os.str());
        }
        x = std::max(x, 0.0);
        sum += x;
    }
    if (std::abs(sum - 1.0) > kNegativityTolerance) {
        std::ostringstream os;
        os << "weights sum to " << sum << ", not 1";
        throw Error(ErrorCode::InvalidWeights, os.str());
    }
}

MixtureWeights MixtureWeights::unit(int d, int k) {
    std::vector<double> w(extremal_count(d), 0.0);
    if (k < 1 || static_cast<std::size_t>(k) > w.size()) throw Error(ErrorCode::OutOfRange, "k out of range");
    w[static_cast<std::size_t>(k - 1)] = 1.0;
    return MixtureWeights(d, std::move(w));
}

EvenSignature signature_from_weights(const MixtureWeights& w) {
    const int d = w.dimension();
    check_dimension_for_matrix(d);
    const auto rows = even_subset_masks(d);
    const auto ones = all_column_ones(d);
    std::vector<double> kappa(rows.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < ones.size(); ++c)
            if (coefficient(rows[r], ones[c])) s += w[c];
        kappa[r] = s;
    }
    kappa[0] = 1.0;
    return EvenSignature(d, std::move(kappa));
}

double concordance_of_mixture(const MixtureWeights& w, Mask subset) {
    const int d = w.dimension();
    double s = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c)
        if (coefficient(subset, column_ones(c, d))) s += w[c];
    return s;
}

std::vector<double> solve_signature_system(int d, std::span<const double> kappa) {
    check_dimension_for_matrix(d);
    if (kappa.size() != extremal_count(d)) throw Error(ErrorCode::InvalidSignature, "signature length mismatch");
    const auto lu = cached_lu(d);
    const Eigen::Map<const Eigen::VectorXd> rhs(kappa.data(), static_cast<Eigen::Index>(kappa.size()));
    const Eigen::VectorXd w = lu->solve(rhs);
    return {w.data(), w.data() + w.size()};
}

MixtureWeights weights_from_signature(const EvenSignature& kappa) {
    const int d = kappa.dimension();
    auto w = solve_signature_system(d, kappa.values());
    const auto worst = std::min_element(w.begin(), w.end());
    if (*worst < -kNegativityTolerance) {
        std::ostringstream os;
        os << "solved weight w_" << (worst - w.begin()) + 1 << " = " << *worst << " is negative";
        throw Error(ErrorCode::NotAttainable, "signature is not attainable", os.str());
    }
    double sum = 0.0;
    for (double& x : w) {
        x = std::max(x, 0.0);
        sum += x;
    }
    // Rounding only; the first row of A_d forces the sum to kappa_empty = 1.
    for (double& x : w) x /= sum;
    return MixtureWeights(d, std::move(w));
}

FullSignature extend_to_full(const EvenSignature& kappa) {
    const int d = kappa.dimension();
    const auto labels = all_subset_masks(d);
    std::vector<double> by_mask(std::size_t{1} << d, 0.0);
    const auto& even = kappa.labels();
    for (std::size_t i = 0; i < even.size(); ++i) by_mask[even[i]] = kappa[i];
    for (Mask I : labels) {
        const int m = std::popcount(I);
        if (m == 1) {
            by_mask[I] = 1.0;
        } else if (m >= 3 && m % 2 == 1) {
            double v = 1.0 - m / 2.0;
            for (Mask A = (I - 1) & I; A != 0; A = (A - 1) & I) {
                const int a = std::popcount(A);
                if (a >= 2) v += ((a % 2 == 0) ? 0.5 : -0.5) * by_mask[A];
            }
            by_mask[I] = std::clamp(v, 0.0, 1.0);
        }
    }
    std::vector<double> values;
    values.reserve(labels.size());
    for (Mask I : labels) values.push_back(by_mask[I]);
    return FullSignature(d, std::move(values));
}

double tau_kappa_convert(double value, int cardinality, Direction direction) {
    if (cardinality < 2 || cardinality > 62) throw Error(ErrorCode::OutOfRange, "cardinality must be at least 2");
    const double half = std::ldexp(1.0, cardinality - 1);  // 2^(m-1)
    constexpr double slack = 1e-12;
    if (direction == Direction::ToTau) {
        if (!(value >= -slack && value <= 1.0 + slack)) throw Error(ErrorCode::OutOfRange, "kappa outside [0,1]");
        return (half * value - 1.0) / (half - 1.0);
    }
    const double lo = -1.0 / (half - 1.0);
    if (!(value >= lo - slack && value <= 1.0 + slack)) {
        throw Error(ErrorCode::OutOfRange, "tau outside [-1/(2^(m-1)-1), 1]");
    }
    return ((half - 1.0) * value + 1.0) / half;
}

Eigen::MatrixXd kendall_matrix_from_even(const EvenSignature& kappa) {
    const int d = kappa.dimension();
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d, d);
    const auto& labels = kappa.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (std::popcount(labels[i]) != 2) continue;
        const int a = std::countr_zero(labels[i]);
        const int b = 31 - std::countl_zero(labels[i]);
        p(a, b) = p(b, a) = 2.0 * kappa[i] - 1.0;
    }
    return p;
}

}  // namespace concordance
