#include "concordance/equiconcordant.hpp"

#include "concordance/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace concordance {

namespace {

void check_skeletal_dimension(int d) {
    if (d < 2) throw Error(ErrorCode::OutOfRange, "dimension must be at least 2");
    if (d > kMaxBinomial) throw Error(ErrorCode::DimensionTooLarge, "dimension exceeds " + std::to_string(kMaxBinomial));
}

int group_count(int d) { return 1 + d / 2; }

}  // namespace

std::uint64_t binomial(int n, int p) {
    if (n > kMaxBinomial) throw Error(ErrorCode::DimensionTooLarge, "binomial argument exceeds " + std::to_string(kMaxBinomial));
    if (n < 0 || p < 0 || p > n) return 0;
    p = std::min(p, n - p);
    std::uint64_t c = 1;
    for (int i = 1; i <= p; ++i) c = c * static_cast<std::uint64_t>(n - p + i) / static_cast<std::uint64_t>(i);
    return c;
}

Rational::Rational(std::int64_t n, std::int64_t d) {
    if (d == 0) throw Error(ErrorCode::OutOfRange, "zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const std::int64_t g = std::gcd(n, d);
    num = g ? n / g : 0;
    den = g ? d / g : 1;
}

std::string Rational::to_string() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

ComonotonicProfile comonotonic_profile(int d) {
    check_skeletal_dimension(d);
    if (d > 20) throw Error(ErrorCode::DimensionTooLarge, "comonotonic numbers are listed for d <= 20 only");
    ComonotonicProfile p;
    p.d = d;
    for (int i = 0; i < group_count(d); ++i) {
        const int h = d - i;
        p.h.push_back(h);
        p.mu.push_back(2 * h == d ? binomial(d, h) / 2 : binomial(d, h));
    }
    const std::size_t cols = extremal_count(d);
    p.eta.resize(cols);
    p.group.resize(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        const int ones = std::popcount(column_ones(c, d));
        const int eta = std::max(ones, d - ones);
        p.eta[c] = eta;
        p.group[c] = d - eta;
    }
    return p;
}

std::vector<std::vector<Rational>> build_B_matrix_exact(int d) {
    check_skeletal_dimension(d);
    const int m = group_count(d);
    std::vector<std::vector<Rational>> B(static_cast<std::size_t>(m), std::vector<Rational>(static_cast<std::size_t>(m)));
    for (int i = 0; i < m; ++i) {
        const int l = 2 * i;
        for (int j = 0; j < m; ++j) {
            const int h = d - j;
            if (i == 0) {
                B[0][static_cast<std::size_t>(j)] = Rational(1);
                continue;
            }
            const auto num = binomial(d - l, h - l) + binomial(d - l, d - h - l);
            B[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(binomial(d, h)));
        }
    }
    return B;
}

Eigen::MatrixXd build_B_matrix(int d) {
    const auto exact = build_B_matrix_exact(d);
    const auto m = static_cast<Eigen::Index>(exact.size());
    Eigen::MatrixXd B(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) B(i, j) = exact[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].value();
    return B;
}

SkeletalSignature make_skeletal(int d, std::vector<double> k) {
    check_skeletal_dimension(d);
    if (static_cast<int>(k.size()) != group_count(d)) {
        throw Error(ErrorCode::InvalidSignature, "skeletal signature of dimension " + std::to_string(d) + " needs " +
                                                     std::to_string(group_count(d)) + " entries");
    }
    if (std::abs(k[0] - 1.0) > 1e-12) throw Error(ErrorCode::InvalidSignature, "kappa_0 must equal 1");
    for (auto& v : k) {
        if (!std::isfinite(v) || v < -1e-9 || v > 1 + 1e-9) throw Error(ErrorCode::InvalidSignature, "skeletal entries must lie in [0,1]");
        v = std::clamp(v, 0.0, 1.0);
    }
    k[0] = 1.0;
    return {d, std::move(k)};
}

SkeletalSolution skeletal_solve(const SkeletalSignature& sk) {
    const auto checked = make_skeletal(sk.d, sk.k);
    const Eigen::MatrixXd B = build_B_matrix(sk.d);
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(checked.k.data(), static_cast<Eigen::Index>(checked.k.size()));
    const Eigen::VectorXd v = B.fullPivLu().solve(rhs);
    SkeletalSolution out;
    out.raw.assign(v.data(), v.data() + v.size());
    out.attainable = v.minCoeff() >= -kNegativityTolerance;
    out.v = out.raw;
    if (out.attainable) {
        for (auto& x : out.v) x = std::max(x, 0.0);
        const double s = std::accumulate(out.v.begin(), out.v.end(), 0.0);
        for (auto& x : out.v) x /= s;
    }
    return out;
}

MixtureWeights expand_skeletal(const std::vector<double>& v, int d) {
    const auto profile = comonotonic_profile(d);
    if (v.size() != profile.h.size()) throw Error(ErrorCode::InvalidWeights, "group weight vector has the wrong length");
    double sum = 0;
    for (double x : v) {
        if (!std::isfinite(x) || x < -kNegativityTolerance) throw Error(ErrorCode::InvalidWeights, "group weights must be nonnegative");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidWeights, "group weights must sum to 1");
    std::vector<double> w(profile.eta.size());
    for (std::size_t c = 0; c < w.size(); ++c) {
        const auto g = static_cast<std::size_t>(profile.group[c]);
        w[c] = std::max(v[g], 0.0) / static_cast<double>(profile.mu[g]);
    }
    return MixtureWeights(d, std::move(w));
}

bool is_equiconcordant(const EvenSignature& kappa, double tol) {
    const int d = kappa.dimension();
    std::vector<double> first(static_cast<std::size_t>(d + 1), -1.0);
    for (std::size_t i = 0; i < kappa.labels().size(); ++i) {
        const auto m = static_cast<std::size_t>(std::popcount(kappa.labels()[i]));
        if (first[m] < 0) first[m] = kappa[i];
        else if (std::abs(kappa[i] - first[m]) > tol) return false;
    }
    return true;
}

SkeletalSignature skeletal_of(const EvenSignature& kappa) {
    const int d = kappa.dimension();
    std::vector<double> sum(static_cast<std::size_t>(group_count(d)), 0.0), count(sum.size(), 0.0);
    for (std::size_t i = 0; i < kappa.labels().size(); ++i) {
        const auto g = static_cast<std::size_t>(std::popcount(kappa.labels()[i]) / 2);
        sum[g] += kappa[i];
        count[g] += 1.0;
    }
    for (std::size_t g = 0; g < sum.size(); ++g) sum[g] /= count[g];
    return make_skeletal(d, std::move(sum));
}

}  // namespace concordance
