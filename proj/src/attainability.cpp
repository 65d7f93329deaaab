#include "concordance/attainability.hpp"

#include "concordance/error.hpp"
#include "concordance/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

namespace concordance {

namespace {

void check_lp_dimension(int d) {
    if (d < 2) throw Error(ErrorCode::OutOfRange, "dimension must be at least 2");
    if (d > dimension_cap()) {
        throw Error(ErrorCode::DimensionTooLarge,
                    "dimension " + std::to_string(d) + " exceeds cap " + std::to_string(dimension_cap()));
    }
}

std::vector<Mask> masks_of(std::span<const SubsetIndex> subsets) {
    std::vector<Mask> out;
    out.reserve(subsets.size());
    for (const auto& s : subsets) out.push_back(s.mask());
    return out;
}

Eigen::MatrixXd constraint_rows(const PartialSignature& partial) {
    return CoefficientMatrix(partial.dimension()).rows_for(masks_of(partial.labels().subsets()));
}

Eigen::VectorXd constraint_rhs(const PartialSignature& partial) {
    const auto& v = partial.values();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MixtureWeights to_weights(int d, const Eigen::VectorXd& x) {
    std::vector<double> w(x.data(), x.data() + x.size());
    double sum = 0.0;
    for (double& v : w) {
        v = std::max(v, 0.0);
        sum += v;
    }
    for (double& v : w) v /= sum;
    return MixtureWeights(d, std::move(w));
}

// min c'w over the feasible weight set; the set must be non-empty.
lp::Solution optimize_over(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, Eigen::VectorXd c) {
    lp::Solution s = lp::solve({A, b, std::move(c)});
    if (s.status != lp::Status::Optimal) {
        throw Error(ErrorCode::NumericalFailure, "LP over a feasible bounded weight set did not reach an optimum");
    }
    return s;
}

void check_targets(const PartialSignature& partial, std::span<const SubsetIndex> targets) {
    if (targets.empty()) throw Error(ErrorCode::EmptyTargets, "no target labels given");
    for (const auto& t : targets) {
        if (t.dimension() != partial.dimension() || t.size() % 2 != 0 || t.empty_set()) {
            throw Error(ErrorCode::InvalidLabel, t.to_string() + " is not a non-empty even label of dimension " +
                                                     std::to_string(partial.dimension()));
        }
        if (partial.labels().contains(t)) {
            throw Error(ErrorCode::InvalidLabel, t.to_string() + " is already prescribed");
        }
    }
}

struct ReducedSystem {
    Eigen::MatrixXd A;          // independent rows, surviving columns
    Eigen::VectorXd b;
    std::vector<int> columns;   // original column of each surviving column
};

// Drops columns that are zero on the whole feasible set and rows that are
// dependent on the rest. Vertices of the reduced system are the vertices of the
// original one, padded with zeros; degeneracy shrinks a lot.
ReducedSystem reduce(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    ReducedSystem r;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(A.cols());
        c(j) = -1.0;
        const auto s = optimize_over(A, b, c);
        if (-s.objective > 1e-10) r.columns.push_back(static_cast<int>(j));
    }
    Eigen::MatrixXd kept(A.rows(), static_cast<Eigen::Index>(r.columns.size()));
    for (std::size_t c = 0; c < r.columns.size(); ++c) kept.col(static_cast<Eigen::Index>(c)) = A.col(r.columns[c]);

    // Greedy independent row selection (Gram-Schmidt on rows, original order).
    std::vector<Eigen::VectorXd> basis;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < kept.rows(); ++i) {
        Eigen::VectorXd v = kept.row(i).transpose();
        for (const auto& q : basis) v -= q.dot(v) * q;
        const double norm = v.norm();
        if (norm > 1e-9) {
            basis.push_back(v / norm);
            rows.push_back(i);
        }
    }
    r.A.resize(static_cast<Eigen::Index>(rows.size()), kept.cols());
    r.b.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        r.A.row(static_cast<Eigen::Index>(i)) = kept.row(rows[i]);
        r.b(static_cast<Eigen::Index>(i)) = b(rows[i]);
    }
    return r;
}

bool same_point(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff() <= 1e-8;
}

}  // namespace

PartialSignature::PartialSignature(LabelSet labels, std::vector<double> values)
    : labels_(std::move(labels)), values_(std::move(values)) {
    if (values_.size() != labels_.size()) throw Error(ErrorCode::InvalidSignature, "labels and values differ in length");
    if (!labels_.only_even()) throw Error(ErrorCode::InvalidLabel, "partial signatures use even labels only");
    if (labels_.dimension() < 2) throw Error(ErrorCode::OutOfRange, "dimension must be at least 2");
    if (std::abs(values_.front() - 1.0) > 1e-9) throw Error(ErrorCode::InvalidSignature, "kappa of the empty set must be 1");
    values_.front() = 1.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!std::isfinite(v) || v < -1e-9 || v > 1.0 + 1e-9) {
            std::ostringstream os;
            os << "kappa" << labels_[i].to_string() << " = " << v << " outside [0,1]";
            throw Error(ErrorCode::InvalidSignature, os.str());
        }
        values_[i] = std::clamp(v, 0.0, 1.0);
    }
}

PartialSignature PartialSignature::from_entries(int d, std::vector<std::pair<SubsetIndex, double>> entries) {
    const bool has_empty = std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.first.empty_set(); });
    if (!has_empty) entries.emplace_back(SubsetIndex::empty(d), 1.0);
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<SubsetIndex> labels;
    std::vector<double> values;
    for (auto& [s, v] : entries) {
        labels.push_back(s);
        values.push_back(v);
    }
    return PartialSignature(LabelSet(d, std::move(labels)), std::move(values));
}

PartialSignature PartialSignature::from_even(const EvenSignature& kappa) {
    return PartialSignature(LabelSet::even_power_set(kappa.dimension()), kappa.values());
}

PartialSignature PartialSignature::from_pairs(int d, std::span<const double> pair_kappas) {
    const auto pairs = subsets_of_size(d, 2);
    if (pair_kappas.size() != pairs.size()) {
        throw Error(ErrorCode::InvalidSignature,
                    "expected " + std::to_string(pairs.size()) + " pair values, got " + std::to_string(pair_kappas.size()));
    }
    std::vector<double> values{1.0};
    values.insert(values.end(), pair_kappas.begin(), pair_kappas.end());
    return PartialSignature(LabelSet::pairs(d), std::move(values));
}

std::optional<double> PartialSignature::value_of(const SubsetIndex& s) const {
    const int i = labels_.index_of(s);
    if (i < 0) return std::nullopt;
    return values_[static_cast<std::size_t>(i)];
}

std::vector<SubsetIndex> PartialSignature::missing_labels() const {
    std::vector<SubsetIndex> out;
    for (Mask m : even_subset_masks(dimension())) {
        SubsetIndex s(dimension(), m);
        if (!labels_.contains(s)) out.push_back(s);
    }
    return out;
}

PartialSignature PartialSignature::with(const SubsetIndex& s, double value) const {
    std::vector<std::pair<SubsetIndex, double>> entries;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (labels_[i] != s) entries.emplace_back(labels_[i], values_[i]);
    entries.emplace_back(s, value);
    return from_entries(dimension(), std::move(entries));
}

PartialSignature PartialSignature::without(const SubsetIndex& s) const {
    if (s.empty_set()) throw Error(ErrorCode::InvalidLabel, "the empty set cannot be removed");
    std::vector<std::pair<SubsetIndex, double>> entries;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (labels_[i] != s) entries.emplace_back(labels_[i], values_[i]);
    return from_entries(dimension(), std::move(entries));
}

FeasibilityCertificate check_attainable(const PartialSignature& partial) {
    const int d = partial.dimension();
    check_lp_dimension(d);
    FeasibilityCertificate cert;

    if (partial.is_complete() && d > 10) {
        // A dense tableau is wasteful here; the system has a unique solution.
        const EvenSignature kappa(d, partial.values());
        try {
            cert.witness = weights_from_signature(kappa);
            cert.feasible = true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NotAttainable) throw;
            cert.infeasibility_reason = e.detail();
        }
        return cert;
    }

    const Eigen::MatrixXd A = constraint_rows(partial);
    const Eigen::VectorXd b = constraint_rhs(partial);
    const auto s = lp::solve({A, b, Eigen::VectorXd::Zero(A.cols())});
    cert.phase_one_objective = s.phase_one_objective;
    if (s.status != lp::Status::Optimal) {
        std::ostringstream os;
        os << "phase-1 optimum " << s.phase_one_objective << " > 0: no nonnegative weights reproduce the values";
        cert.infeasibility_reason = os.str();
        return cert;
    }
    auto witness = to_weights(d, s.x);
    const Eigen::Map<const Eigen::VectorXd> wv(witness.values().data(), static_cast<Eigen::Index>(witness.size()));
    const double residual = (A * wv - b).cwiseAbs().maxCoeff();
    if (residual > kEqualityTolerance) {
        std::ostringstream os;
        os << "witness residual " << residual << " exceeds " << kEqualityTolerance;
        throw Error(ErrorCode::NumericalFailure, os.str());
    }
    cert.feasible = true;
    cert.witness = std::move(witness);
    return cert;
}

BoundsReport bound_missing(const PartialSignature& partial, std::span<const SubsetIndex> targets) {
    check_targets(partial, targets);
    const auto cert = check_attainable(partial);
    if (!cert.feasible) {
        throw Error(ErrorCode::Infeasible, "partial signature is not attainable", cert.infeasibility_reason.value_or(""));
    }
    const int d = partial.dimension();
    const Eigen::MatrixXd A = constraint_rows(partial);
    const Eigen::VectorXd b = constraint_rhs(partial);
    const Eigen::MatrixXd rows = CoefficientMatrix(d).rows_for(masks_of(targets));

    BoundsReport report;
    report.targets.assign(targets.begin(), targets.end());
    for (Eigen::Index t = 0; t < rows.rows(); ++t) {
        const Eigen::VectorXd c = rows.row(t).transpose();
        const auto lo = optimize_over(A, b, c);
        const auto hi = optimize_over(A, b, -c);
        auto wmin = to_weights(d, lo.x);
        auto wmax = to_weights(d, hi.x);
        report.lower.push_back(std::clamp(lo.objective, 0.0, 1.0));
        report.upper.push_back(std::clamp(-hi.objective, 0.0, 1.0));
        report.argmin.push_back(std::move(wmin));
        report.argmax.push_back(std::move(wmax));
    }
    return report;
}

WeightPolytope enumerate_vertices(const PartialSignature& partial, const EnumerationOptions& options) {
    const int d = partial.dimension();
    if (d > options.dimension_cap) {
        throw Error(ErrorCode::DimensionTooLarge,
                    "vertex enumeration is capped at d = " + std::to_string(options.dimension_cap));
    }
    check_lp_dimension(d);
    WeightPolytope poly;
    poly.rank = static_cast<int>(partial.labels().size());

    if (partial.is_complete()) {
        try {
            poly.vertices.push_back(weights_from_signature(EvenSignature(d, partial.values())));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NotAttainable) throw;
            throw Error(ErrorCode::Infeasible, "partial signature is not attainable", e.detail());
        }
        return poly;
    }

    const auto cert = check_attainable(partial);
    if (!cert.feasible) {
        throw Error(ErrorCode::Infeasible, "partial signature is not attainable", cert.infeasibility_reason.value_or(""));
    }
    const Eigen::MatrixXd A = constraint_rows(partial);
    const Eigen::VectorXd b = constraint_rhs(partial);
    {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        poly.rank = static_cast<int>(lu.rank());
    }
    const ReducedSystem sys = reduce(A, b);
    const auto m = sys.A.rows();
    const auto n = sys.A.cols();

    std::vector<Eigen::VectorXd> vertices;
    auto record = [&](const Eigen::VectorXd& x) {
        for (const auto& v : vertices)
            if (same_point(v, x)) return;
        vertices.push_back(x);
    };

    if (m == n) {
        // Single point; the reduced system pins every surviving weight.
        record(sys.A.fullPivLu().solve(sys.b));
    } else {
        // Breadth-first search over feasible bases; the graph of feasible bases
        // under ratio-test pivots is connected, so this reaches every vertex.
        const auto start = lp::solve({sys.A, sys.b, Eigen::VectorXd::Zero(n)});
        if (start.status != lp::Status::Optimal || static_cast<Eigen::Index>(start.basis.size()) != m) {
            throw Error(ErrorCode::NumericalFailure, "could not find a starting basis");
        }
        std::vector<int> first = start.basis;
        std::sort(first.begin(), first.end());
        std::set<std::vector<int>> seen{first};
        std::deque<std::vector<int>> queue{first};
        while (!queue.empty()) {
            if (options.stop.stop_requested()) throw Error(ErrorCode::Cancelled, "vertex enumeration cancelled");
            if (seen.size() > options.max_bases) {
                throw Error(ErrorCode::NumericalFailure, "vertex enumeration exceeded its basis budget");
            }
            const std::vector<int> basis = std::move(queue.front());
            queue.pop_front();
            Eigen::MatrixXd B(m, m);
            for (Eigen::Index c = 0; c < m; ++c) B.col(c) = sys.A.col(basis[static_cast<std::size_t>(c)]);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
            if (!lu.isInvertible()) continue;
            const Eigen::VectorXd xb = lu.solve(sys.b);
            if (xb.minCoeff() < -kNegativityTolerance) continue;
            Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
            for (Eigen::Index r = 0; r < m; ++r) x(basis[static_cast<std::size_t>(r)]) = std::max(0.0, xb(r));
            record(x);

            const Eigen::MatrixXd T = lu.solve(sys.A);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (std::binary_search(basis.begin(), basis.end(), static_cast<int>(j))) continue;
                double best = std::numeric_limits<double>::infinity();
                for (Eigen::Index r = 0; r < m; ++r)
                    if (T(r, j) > 1e-9) best = std::min(best, std::max(xb(r), 0.0) / T(r, j));
                if (!std::isfinite(best)) continue;
                for (Eigen::Index r = 0; r < m; ++r) {
                    if (T(r, j) <= 1e-9) continue;
                    if (std::max(xb(r), 0.0) / T(r, j) > best + 1e-10) continue;
                    std::vector<int> next = basis;
                    next[static_cast<std::size_t>(r)] = static_cast<int>(j);
                    std::sort(next.begin(), next.end());
                    if (seen.insert(next).second) queue.push_back(std::move(next));
                }
            }
        }
    }

    for (const auto& x : vertices) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(A.cols());
        for (std::size_t c = 0; c < sys.columns.size(); ++c) full(sys.columns[c]) = x(static_cast<Eigen::Index>(c));
        poly.vertices.push_back(to_weights(d, full));
    }
    return poly;
}

std::vector<std::vector<double>> project_vertices(const WeightPolytope& polytope, std::span<const SubsetIndex> targets) {
    std::vector<std::vector<double>> points;
    for (const auto& w : polytope.vertices) {
        std::vector<double> p;
        p.reserve(targets.size());
        for (const auto& t : targets) {
            if (t.dimension() != w.dimension() || t.size() % 2 != 0) {
                throw Error(ErrorCode::InvalidLabel, t.to_string() + " is not an even label of this polytope");
            }
            p.push_back(concordance_of_mixture(w, t.mask()));
        }
        points.push_back(std::move(p));
    }
    return points;
}

Eigen::MatrixXd extremal_correlation_matrix(int k, int d) {
    const auto code = binary_code(k, d);
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v(j) = 2.0 * code.bits[static_cast<std::size_t>(j)] - 1.0;
    return v * v.transpose();
}

void validate_kendall_matrix(const Eigen::MatrixXd& p_tau) {
    const auto d = p_tau.rows();
    if (d < 2 || p_tau.cols() != d) throw Error(ErrorCode::InvalidMatrix, "matrix must be square with d >= 2");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(p_tau(i, i) - 1.0) > 1e-12) throw Error(ErrorCode::InvalidMatrix, "diagonal must be 1");
        for (Eigen::Index j = i + 1; j < d; ++j) {
            if (!(std::abs(p_tau(i, j) - p_tau(j, i)) <= 1e-12)) throw Error(ErrorCode::InvalidMatrix, "matrix is not symmetric");
            if (!(std::abs(p_tau(i, j)) <= 1.0)) throw Error(ErrorCode::InvalidMatrix, "entries must lie in [-1,1]");
        }
    }
}

FeasibilityCertificate check_cut_polytope(const Eigen::MatrixXd& p_tau) {
    validate_kendall_matrix(p_tau);
    const auto d = static_cast<int>(p_tau.rows());
    std::vector<double> pairs;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) pairs.push_back((1.0 + p_tau(i, j)) / 2.0);
    return check_attainable(PartialSignature::from_pairs(d, pairs));
}

CollectiveExtremum collective_extremes(const PartialSignature& partial, std::span<const SubsetIndex> targets,
                                       Extreme which, double tolerance, int max_iterations) {
    check_targets(partial, targets);
    const auto cert = check_attainable(partial);
    if (!cert.feasible) {
        throw Error(ErrorCode::Infeasible, "partial signature is not attainable", cert.infeasibility_reason.value_or(""));
    }
    const int d = partial.dimension();
    const Eigen::MatrixXd A = constraint_rows(partial);
    const Eigen::VectorXd b = constraint_rhs(partial);
    const Eigen::MatrixXd A2 = CoefficientMatrix(d).rows_for(masks_of(targets));
    const Eigen::VectorXd goal = Eigen::VectorXd::Constant(A2.rows(), which == Extreme::Smallest ? 0.0 : 1.0);

    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(cert.witness->values().data(),
                                                          static_cast<Eigen::Index>(cert.witness->size()));
    CollectiveExtremum out{*cert.witness, {}, 0.0, 0.0, 0};
    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it + 1;
        const Eigen::VectorXd residual = A2 * w - goal;
        const Eigen::VectorXd grad = 2.0 * A2.transpose() * residual;
        const auto s = optimize_over(A, b, grad);
        const Eigen::VectorXd dir = s.x - w;
        out.duality_gap = -grad.dot(dir);
        if (out.duality_gap <= tolerance) break;
        const Eigen::VectorXd Ad = A2 * dir;
        const double denom = Ad.squaredNorm();
        const double step = denom > 0 ? std::clamp(-residual.dot(Ad) / denom, 0.0, 1.0) : 1.0;
        w += step * dir;
    }
    out.weights = to_weights(d, w);
    const Eigen::VectorXd kap = A2 * w;
    out.values.assign(kap.data(), kap.data() + kap.size());
    out.objective = (kap - goal).squaredNorm();
    return out;
}

}  // namespace concordance
