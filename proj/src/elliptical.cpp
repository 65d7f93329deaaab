#include "concordance/elliptical.hpp"

#include "concordance/attainability.hpp"
#include "concordance/error.hpp"
#include "concordance/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <thread>

namespace concordance {

namespace {

constexpr std::uint64_t kBatch = 65536;
constexpr double kEigenSlack = 1e-9;

double pair_orthant(double rho) { return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi); }

double triple_orthant(double r12, double r13, double r23) {
    return 0.125 + (std::asin(r12) + std::asin(r13) + std::asin(r23)) / (4.0 * std::numbers::pi);
}

CorrelationMatrix margin(const CorrelationMatrix& p, const std::vector<int>& members) {
    const auto m = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = p(members[static_cast<std::size_t>(a)] - 1, members[static_cast<std::size_t>(b)] - 1);
    return CorrelationMatrix(sub);
}

// kappa_I = 2 P(Z_I < 0) from pattern counts, with binomial standard error.
OrthantEstimate kappa_from_counts(const PatternCounts& c, Mask subset, bool antithetic) {
    const double n = static_cast<double>(c.samples);
    std::uint64_t hits = 0;
    OrthantEstimate e;
    e.method = OrthantMethod::MonteCarlo;
    if (antithetic) {
        for (std::size_t m = 0; m < c.raw.size(); ++m) {
            const Mask on = static_cast<Mask>(m) & subset;
            if (on == 0 || on == subset) hits += c.raw[m];
        }
        const double k = static_cast<double>(hits) / n;
        e.value = k;
        e.std_error = std::sqrt(k * (1.0 - k) / n);
    } else {
        for (std::size_t m = 0; m < c.raw.size(); ++m)
            if ((static_cast<Mask>(m) & subset) == 0) hits += c.raw[m];
        const double q = static_cast<double>(hits) / n;
        e.value = std::min(1.0, 2.0 * q);
        e.std_error = 2.0 * std::sqrt(q * (1.0 - q) / n);
    }
    return e;
}

std::vector<double> solve_projected(int d, const std::vector<double>& kappa) {
    auto w = solve_signature_system(d, kappa);
    for (auto& x : w) x = std::max(x, 0.0);
    double s = 0.0;
    for (double x : w) s += x;
    for (auto& x : w) x /= s;
    return w;
}

struct SignatureAndCounts {
    EllipticalSignature signature;
    PatternCounts counts;
};

SignatureAndCounts compute_signature(const CorrelationMatrix& p, const McConfig& mc) {
    const int d = p.dimension();
    if (d > dimension_cap()) {
        throw Error(ErrorCode::DimensionTooLarge, "dimension " + std::to_string(d) + " exceeds cap " + std::to_string(dimension_cap()));
    }
    SignatureAndCounts out;
    if (d >= 4) out.counts = simulate_patterns(p, mc);
    const auto labels = even_subset_masks(d);
    std::vector<double> values;
    for (Mask m : labels) {
        const int size = std::popcount(m);
        OrthantEstimate e;
        if (size == 0) {
            e.value = 1.0;
        } else if (size == 2) {
            const int i = std::countr_zero(m);
            const int j = std::countr_zero(m & (m - 1));
            e.value = 2.0 * pair_orthant(p(i, j));
        } else {
            e = kappa_from_counts(out.counts, m, mc.antithetic);
        }
        e.value = std::clamp(e.value, 0.0, 1.0);
        values.push_back(e.value);
        out.signature.entries.push_back(e);
    }
    auto& s = out.signature;
    s.raw = EvenSignature(d, values);
    s.weights = MixtureWeights(d, solve_projected(d, values));
    s.projected = signature_from_weights(s.weights);
    s.samples = out.counts.samples;
    return out;
}

}  // namespace

std::string_view to_string(OrthantMethod m) { return m == OrthantMethod::Exact ? "exact" : "monte_carlo"; }

CorrelationMatrix::CorrelationMatrix(const Eigen::MatrixXd& p) : p_(p) {
    const auto d = p_.rows();
    if (d < 1 || p_.cols() != d) throw Error(ErrorCode::InvalidMatrix, "correlation matrix must be square");
    if (d > kMaxSubsetDimension) throw Error(ErrorCode::DimensionTooLarge, "correlation matrix too large");
    if (!p_.allFinite()) throw Error(ErrorCode::InvalidMatrix, "correlation matrix has non-finite entries");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(p_(i, i) - 1.0) > 1e-12) throw Error(ErrorCode::InvalidMatrix, "diagonal must be 1");
        p_(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < d; ++j) {
            if (std::abs(p_(i, j) - p_(j, i)) > 1e-12) throw Error(ErrorCode::InvalidMatrix, "matrix is not symmetric");
            if (std::abs(p_(i, j)) > 1.0) throw Error(ErrorCode::InvalidMatrix, "entries must lie in [-1,1]");
            p_(j, i) = p_(i, j);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p_);
    min_eigenvalue_ = es.eigenvalues().minCoeff();
    if (min_eigenvalue_ < -kEigenSlack) {
        throw Error(ErrorCode::InvalidMatrix, "matrix is not positive semi-definite",
                    "smallest eigenvalue " + std::to_string(min_eigenvalue_));
    }
    const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
    root_ = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
    for (Eigen::Index i = 0; i < d; ++i)
        if (root_.row(i).norm() < 1e-6) throw Error(ErrorCode::DegenerateMargin, "margin " + std::to_string(i + 1) + " is degenerate");
}

CorrelationMatrix CorrelationMatrix::from_pairs(int d, const std::vector<double>& rho) {
    if (d < 2 || rho.size() != static_cast<std::size_t>(d * (d - 1) / 2)) {
        throw Error(ErrorCode::InvalidMatrix, "expected d(d-1)/2 correlations");
    }
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d, d);
    std::size_t k = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) p(i, j) = p(j, i) = rho[k++];
    return CorrelationMatrix(p);
}

CorrelationMatrix CorrelationMatrix::equicorrelated(int d, double rho) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Constant(d, d, rho);
    p.diagonal().setOnes();
    return CorrelationMatrix(p);
}

PatternCounts simulate_patterns(const CorrelationMatrix& p, const McConfig& mc) {
    if (mc.samples < 1) throw Error(ErrorCode::OutOfRange, "Monte Carlo needs at least one sample");
    const int d = p.dimension();
    if (d > 20) throw Error(ErrorCode::DimensionTooLarge, "pattern counting is limited to d <= 20");
    const std::size_t patterns = std::size_t{1} << d;
    const std::uint64_t batches = (mc.samples + kBatch - 1) / kBatch;
    const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(
        batches, mc.threads ? mc.threads : std::max(1u, std::thread::hardware_concurrency())));
    const Eigen::MatrixXd A = p.root();

    std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(patterns, 0));
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned t) {
        try {
            Eigen::VectorXd z(d), x(d);
            for (std::uint64_t b = t; b < batches; b += threads) {
                if (mc.stop.stop_requested()) throw Error(ErrorCode::Cancelled, "Monte Carlo run cancelled");
                RandomStream rng(mc.seed, b);
                const std::uint64_t count = std::min(kBatch, mc.samples - b * kBatch);
                auto& local = partial[t];
                for (std::uint64_t s = 0; s < count; ++s) {
                    for (int j = 0; j < d; ++j) z(j) = rng.normal();
                    x.noalias() = A * z;
                    Mask y = 0;
                    for (int j = 0; j < d; ++j)
                        if (x(j) > 0.0) y |= Mask{1} << j;
                    ++local[y];
                }
            }
        } catch (...) {
            errors[t] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    PatternCounts out;
    out.d = d;
    out.samples = mc.samples;
    out.raw.assign(patterns, 0);
    for (const auto& part : partial)
        for (std::size_t m = 0; m < patterns; ++m) out.raw[m] += part[m];
    const Mask full = static_cast<Mask>(patterns - 1);
    out.canonical.assign(patterns / 2, 0);
    for (std::size_t c = 0; c < out.canonical.size(); ++c) {
        const Mask ones = column_ones(c, d);
        out.canonical[c] = out.raw[ones] + out.raw[full & ~ones];
    }
    return out;
}

OrthantEstimate orthant_probability(const CorrelationMatrix& p, const SubsetIndex& subset, const McConfig& mc) {
    if (subset.dimension() != p.dimension()) throw Error(ErrorCode::InvalidLabel, "subset dimension does not match the matrix");
    const auto members = subset.members();
    OrthantEstimate e;
    switch (members.size()) {
        case 0: e.value = 1.0; return e;
        case 1: e.value = 0.5; return e;
        case 2: e.value = pair_orthant(p(members[0] - 1, members[1] - 1)); return e;
        case 3:
            e.value = triple_orthant(p(members[0] - 1, members[1] - 1), p(members[0] - 1, members[2] - 1),
                                     p(members[1] - 1, members[2] - 1));
            return e;
        default: break;
    }
    const auto sub = margin(p, members);
    const auto counts = simulate_patterns(sub, mc);
    const Mask all = (Mask{1} << members.size()) - 1;
    e = kappa_from_counts(counts, all, mc.antithetic);
    e.value /= 2.0;
    e.std_error /= 2.0;
    return e;
}

EllipticalSignature elliptical_signature(const CorrelationMatrix& p, const McConfig& mc) {
    if (p.dimension() < 2) throw Error(ErrorCode::InvalidMatrix, "dimension must be at least 2");
    return compute_signature(p, mc).signature;
}

Eigen::MatrixXd arcsin_tau_matrix(const CorrelationMatrix& p) {
    return p.matrix().unaryExpr([](double r) { return 2.0 * std::asin(r) / std::numbers::pi; });
}

Eigen::MatrixXd sin_back_transform(const Eigen::MatrixXd& p_tau) {
    return p_tau.unaryExpr([](double t) { return std::sin(std::numbers::pi * t / 2.0); });
}

EllipticalVerdict elliptical_attainable(const Eigen::MatrixXd& p_tau) {
    validate_kendall_matrix(p_tau);
    EllipticalVerdict v;
    v.back_transform = sin_back_transform(p_tau);
    v.back_transform.diagonal().setOnes();
    v.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(v.back_transform, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    v.attainable = v.min_eigenvalue >= -kEigenSlack;
    return v;
}

TLimitWeights t_limit_weights(const CorrelationMatrix& p, TLimitMode mode, const McConfig& mc) {
    const int d = p.dimension();
    if (d < 2) throw Error(ErrorCode::InvalidMatrix, "dimension must be at least 2");
    TLimitWeights out;
    out.mode = mode;
    if (mode == TLimitMode::Analytic) {
        const auto r = compute_signature(p, mc);
        out.samples = r.signature.samples;
        if (d <= 3) {
            out.weights = weights_from_signature(r.signature.raw);
            out.std_errors.assign(out.weights.size(), 0.0);
        } else {
            // Binomial errors of the same batch; the exact pair entries only reduce them.
            out.weights = r.signature.weights;
            const double n = static_cast<double>(r.counts.samples);
            for (double w : out.weights.values()) out.std_errors.push_back(std::sqrt(w * (1.0 - w) / n));
        }
        return out;
    }
    if (d > dimension_cap()) {
        throw Error(ErrorCode::DimensionTooLarge, "dimension " + std::to_string(d) + " exceeds cap " + std::to_string(dimension_cap()));
    }
    const auto counts = simulate_patterns(p, mc);
    const double n = static_cast<double>(counts.samples);
    std::vector<double> w;
    for (auto c : counts.canonical) {
        const double x = static_cast<double>(c) / n;
        w.push_back(x);
        out.std_errors.push_back(std::sqrt(x * (1.0 - x) / n));
    }
    out.weights = MixtureWeights(d, std::move(w));
    out.samples = counts.samples;
    return out;
}

std::vector<int> rank_deficient_support(const CorrelationMatrix& p) {
    const int d = p.dimension();
    if (d > dimension_cap()) throw Error(ErrorCode::DimensionTooLarge, "dimension exceeds cap");
    // Rows of the root have unit norm, so |A_i -+ A_j|^2 = 2 (1 -+ P_ij).
    std::set<int> forced;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const bool same = 1.0 - p(i, j) <= 1e-10;
            const bool opposite = 1.0 + p(i, j) <= 1e-10;
            if (!same && !opposite) continue;
            for (std::size_t c = 0; c < extremal_count(d); ++c) {
                const Mask ones = column_ones(c, d);
                const bool differ = ((ones >> i) & 1u) != ((ones >> j) & 1u);
                if ((same && differ) || (opposite && !differ)) forced.insert(static_cast<int>(c) + 1);
            }
        }
    return {forced.begin(), forced.end()};
}

std::vector<SkeletalCurvePoint> exchangeable_skeletal_curve(int d, const std::vector<double>& rhos, const McConfig& mc) {
    std::vector<SkeletalCurvePoint> out;
    for (double rho : rhos) {
        const auto s = elliptical_signature(CorrelationMatrix::equicorrelated(d, rho), mc);
        const std::size_t groups = static_cast<std::size_t>(1 + d / 2);
        std::vector<double> sum(groups, 0.0), se(groups, 0.0), count(groups, 0.0);
        for (std::size_t i = 0; i < s.raw.labels().size(); ++i) {
            const auto g = static_cast<std::size_t>(std::popcount(s.raw.labels()[i]) / 2);
            sum[g] += s.raw[i];
            se[g] += s.entries[i].std_error;
            count[g] += 1.0;
        }
        SkeletalCurvePoint pt;
        pt.rho = rho;
        for (std::size_t g = 0; g < groups; ++g) {
            pt.k.push_back(sum[g] / count[g]);
            pt.std_error.push_back(se[g] / count[g]);
        }
        out.push_back(std::move(pt));
    }
    return out;
}

}  // namespace concordance
