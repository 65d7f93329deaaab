#include "concordance/sampler.hpp"

#include "concordance/error.hpp"
#include "concordance/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

namespace concordance {

namespace {

constexpr std::uint64_t kBlock = 65536;
constexpr std::uint64_t kMinRowsPerDiagonal = 20;

void check_point(int d, std::span<const double> u) {
    if (static_cast<int>(u.size()) != d) throw Error(ErrorCode::OutOfRange, "point has the wrong dimension");
    for (double x : u)
        if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::OutOfRange, "point must lie in [0,1]^d");
}

double extremal_cdf_mask(Mask ones, std::span<const double> u) {
    double zeros_min = 1.0, ones_min = 1.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        if ((ones >> j) & 1u) ones_min = std::min(ones_min, u[j]);
        else zeros_min = std::min(zeros_min, u[j]);
    }
    return std::max(zeros_min + ones_min - 1.0, 0.0);
}

double kolmogorov_survival(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

template <class Fill>
void run_blocks(std::uint64_t n, unsigned threads, Fill fill) {
    const std::uint64_t blocks = (n + kBlock - 1) / kBlock;
    const unsigned t_count = static_cast<unsigned>(
        std::max<std::uint64_t>(1, std::min<std::uint64_t>(blocks, threads ? threads : std::max(1u, std::thread::hardware_concurrency()))));
    auto work = [&](unsigned t) {
        for (std::uint64_t b = t; b < blocks; b += t_count) fill(b, b * kBlock, std::min(n, (b + 1) * kBlock));
    };
    if (t_count == 1) {
        work(0);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < t_count; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
}

}  // namespace

double extremal_cdf(int k, std::span<const double> u) {
    const int d = static_cast<int>(u.size());
    if (d < 1 || d > kMaxSubsetDimension) throw Error(ErrorCode::OutOfRange, "invalid dimension");
    if (k < 1 || static_cast<std::size_t>(k) > extremal_count(d)) throw Error(ErrorCode::OutOfRange, "k out of range");
    check_point(d, u);
    return extremal_cdf_mask(column_ones(static_cast<std::size_t>(k - 1), d), u);
}

double mixture_cdf(const MixtureWeights& w, std::span<const double> u) {
    const int d = w.dimension();
    check_point(d, u);
    double c = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        if (w[k] > 0.0) c += w[k] * extremal_cdf_mask(column_ones(k, d), u);
    return c;
}

MixtureSample sample_mixture(const MixtureWeights& w, std::uint64_t n, std::uint64_t seed, const SamplerOptions& options) {
    if (w.size() == 0) throw Error(ErrorCode::InvalidWeights, "weights are empty");
    if (n < 1) throw Error(ErrorCode::OutOfRange, "sample size must be at least 1");
    const int d = w.dimension();
    std::vector<double> cumulative(w.size());
    double run = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) cumulative[k] = run += w[k];
    for (auto& c : cumulative) c /= run;
    std::size_t last = w.size() - 1;
    while (last > 0 && w[last] <= 0.0) --last;

    MixtureSample out;
    out.values.resize(static_cast<Eigen::Index>(n), d);
    out.diagonal.resize(n);
    out.seed = seed;
    out.weights = w;
    const Mask full = (Mask{1} << d) - 1;
    run_blocks(n, options.threads, [&](std::uint64_t block, std::uint64_t begin, std::uint64_t end) {
        RandomStream rng(seed, block);
        for (std::uint64_t r = begin; r < end; ++r) {
            const double x = rng.uniform();
            const auto k = std::min<std::size_t>(
                static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin()), last);
            Mask b = column_ones(k, d);
            if (rng() & 1u) b = full & ~b;
            const double u = rng.uniform();
            const auto row = static_cast<Eigen::Index>(r);
            for (int j = 0; j < d; ++j) out.values(row, j) = ((b >> j) & 1u) ? u : 1.0 - u;
            out.diagonal[r] = static_cast<int>(k) + 1;
        }
    });
    return out;
}

Eigen::MatrixXd sample_counterexample(double theta, std::uint64_t n, std::uint64_t seed) {
    if (!std::isfinite(theta) || std::abs(theta) > 4.0) throw Error(ErrorCode::ThetaOutOfRange, "theta must satisfy |theta| <= 4");
    if (n < 1) throw Error(ErrorCode::OutOfRange, "sample size must be at least 1");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 3);
    run_blocks(n, 0, [&](std::uint64_t block, std::uint64_t begin, std::uint64_t end) {
        RandomStream rng(seed, block);
        for (std::uint64_t r = begin; r < end; ++r) {
            const auto y = static_cast<Mask>(rng() & 7u);
            const double c = (std::popcount(y) % 2 ? -theta : theta) / 4.0;
            // Root in [0,1] of u + c u (1 - u) = v, written to avoid cancellation.
            const double v = rng.uniform();
            const double u = 2.0 * v / ((1.0 + c) + std::sqrt((1.0 + c) * (1.0 + c) - 4.0 * c * v));
            for (int j = 0; j < 3; ++j) out(static_cast<Eigen::Index>(r), j) = ((y >> j) & 1u) ? u : 1.0 - u;
        }
    });
    return out;
}

KsResult ks_uniform(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::TooFewRows, "no values to test");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = std::clamp(values[i], 0.0, 1.0);
        dmax = std::max({dmax, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    const double root = std::sqrt(n);
    return {dmax, kolmogorov_survival((root + 0.12 + 0.11 / root) * dmax)};
}

DiagnosticReport validate_mixture(const Eigen::MatrixXd& sample, double level) {
    const int d = static_cast<int>(sample.cols());
    if (d < 2 || d > 20) throw Error(ErrorCode::OutOfRange, "sample must have between 2 and 20 columns");
    if (sample.rows() < 1) throw Error(ErrorCode::TooFewRows, "sample has no rows");
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::OutOfRange, "level must lie in (0,1)");

    DiagnosticReport report;
    report.d = d;
    report.n = static_cast<std::uint64_t>(sample.rows());
    report.level = level;
    std::vector<std::vector<double>> first(extremal_count(d));
    std::uint64_t on = 0;
    for (Eigen::Index r = 0; r < sample.rows(); ++r) {
        const double u1 = sample(r, 0);
        Mask ones = 1;
        bool ok = true;
        for (int j = 1; j < d && ok; ++j) {
            const double u = sample(r, j);
            if (std::abs(u - u1) <= kDiagonalTolerance) ones |= Mask{1} << j;
            else ok = std::abs(u - (1.0 - u1)) <= kDiagonalTolerance;
        }
        if (!ok) continue;
        ++on;
        first[canonical_column(ones, d)].push_back(u1);
    }
    report.on_diagonal_fraction = static_cast<double>(on) / static_cast<double>(report.n);

    std::size_t tested = 0;
    for (std::size_t k = 0; k < first.size(); ++k) {
        DiagonalDiagnostic diag;
        diag.k = static_cast<int>(k) + 1;
        diag.rows = first[k].size();
        if (diag.rows >= kMinRowsPerDiagonal) {
            diag.tested = true;
            diag.ks = ks_uniform(std::move(first[k]));
            report.min_p_value = std::min(report.min_p_value, diag.ks.p_value);
            ++tested;
        }
        report.diagonals.push_back(diag);
    }
    report.uniformity_tested = tested > 0;
    const bool all_on = on == report.n;
    report.pass = all_on && (tested == 0 || report.min_p_value >= level / static_cast<double>(tested));
    return report;
}

std::vector<PairDiagnostic> validate_pairs(const Eigen::MatrixXd& sample, double level) {
    const auto d = static_cast<int>(sample.cols());
    std::vector<PairDiagnostic> out;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Eigen::MatrixXd pair(sample.rows(), 2);
            pair.col(0) = sample.col(i);
            pair.col(1) = sample.col(j);
            out.push_back({i + 1, j + 1, validate_mixture(pair, level)});
        }
    return out;
}

}  // namespace concordance
