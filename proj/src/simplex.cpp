#include "concordance/simplex.hpp"

#include "concordance/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace concordance::lp {

namespace {

// Row-major tableau. Rows 0..m-1 are constraints, row m holds reduced costs.
// Columns 0..n-1 original, n..n+m-1 artificial, last column the right-hand side.
// The objective row's rhs holds minus the current objective value.
class Tableau {
public:
    Tableau(const LinearProgram& p)
        : m_(static_cast<int>(p.A.rows())), n_(static_cast<int>(p.A.cols())), width_(n_ + m_ + 1),
          data_(static_cast<std::size_t>((m_ + 1) * width_), 0.0), basis_(static_cast<std::size_t>(m_)) {
        for (int i = 0; i < m_; ++i) {
            const double sign = p.b(i) < 0 ? -1.0 : 1.0;
            for (int j = 0; j < n_; ++j) at(i, j) = sign * p.A(i, j);
            at(i, n_ + i) = 1.0;
            at(i, rhs()) = sign * p.b(i);
            basis_[static_cast<std::size_t>(i)] = n_ + i;
        }
    }

    double& at(int i, int j) { return data_[static_cast<std::size_t>(i * width_ + j)]; }
    double at(int i, int j) const { return data_[static_cast<std::size_t>(i * width_ + j)]; }
    int rhs() const { return width_ - 1; }
    int m() const { return m_; }
    int n() const { return n_; }
    std::vector<int>& basis() { return basis_; }

    void set_costs(const std::vector<double>& cost) {
        for (int j = 0; j < width_; ++j) at(m_, j) = j < n_ + m_ ? cost[static_cast<std::size_t>(j)] : 0.0;
        for (int i = 0; i < m_; ++i) {
            const double cb = cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
            if (cb == 0.0) continue;
            for (int j = 0; j < width_; ++j) at(m_, j) -= cb * at(i, j);
        }
    }

    void pivot(int r, int s) {
        double* pr = &at(r, 0);
        const double inv = 1.0 / pr[s];
        for (int j = 0; j < width_; ++j) pr[j] *= inv;
        pr[s] = 1.0;
        for (int i = 0; i <= m_; ++i) {
            if (i == r) continue;
            double* pi = &at(i, 0);
            const double f = pi[s];
            if (f == 0.0) continue;
            for (int j = 0; j < width_; ++j) pi[j] -= f * pr[j];
            pi[s] = 0.0;
        }
        basis_[static_cast<std::size_t>(r)] = s;
    }

    // Runs simplex iterations over columns [0, allowed). Returns false if unbounded.
    bool optimize(int allowed, const Options& opt, std::size_t& iterations) {
        while (true) {
            if (opt.stop.stop_requested()) throw Error(ErrorCode::Cancelled, "LP solve cancelled");
            if (++iterations > opt.max_iterations) {
                throw Error(ErrorCode::NumericalFailure, "simplex iteration cap exceeded");
            }
            int entering = -1;
            for (int j = 0; j < allowed; ++j) {
                if (at(m_, j) < -opt.cost_tolerance) {
                    entering = j;
                    break;
                }
            }
            if (entering < 0) return true;
            int leaving = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m_; ++i) {
                const double a = at(i, entering);
                if (a <= opt.pivot_tolerance) continue;
                const double ratio = std::max(at(i, rhs()), 0.0) / a;
                if (leaving < 0 || ratio < best - 1e-12) {
                    best = ratio;
                    leaving = i;
                } else if (ratio <= best + 1e-12 &&
                           basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)]) {
                    leaving = i;  // Bland: smallest basic index among ties
                }
            }
            if (leaving < 0) return false;
            pivot(leaving, entering);
        }
    }

private:
    int m_, n_, width_;
    std::vector<double> data_;
    std::vector<int> basis_;
};

}  // namespace

Solution solve(const LinearProgram& p, const Options& opt) {
    const int m = static_cast<int>(p.A.rows());
    const int n = static_cast<int>(p.A.cols());
    if (p.b.size() != m || p.c.size() != n) throw Error(ErrorCode::NumericalFailure, "LP shape mismatch");

    Solution sol;
    Tableau t(p);

    std::vector<double> cost(static_cast<std::size_t>(n + m), 0.0);
    std::fill(cost.begin() + n, cost.end(), 1.0);
    t.set_costs(cost);
    t.optimize(n + m, opt, sol.iterations);
    sol.phase_one_objective = std::max(0.0, -t.at(m, t.rhs()));
    if (sol.phase_one_objective > opt.feasibility_tolerance) {
        sol.status = Status::Infeasible;
        return sol;
    }

    // Drive zero-valued artificials out of the basis; rows where that is
    // impossible are linearly dependent on the others.
    std::vector<bool> redundant(static_cast<std::size_t>(m), false);
    for (int i = 0; i < m; ++i) {
        if (t.basis()[static_cast<std::size_t>(i)] < n) continue;
        int best = -1;
        double best_abs = opt.pivot_tolerance * 100;
        for (int j = 0; j < n; ++j) {
            if (std::abs(t.at(i, j)) > best_abs) {
                best_abs = std::abs(t.at(i, j));
                best = j;
            }
        }
        if (best >= 0) {
            t.pivot(i, best);
        } else {
            redundant[static_cast<std::size_t>(i)] = true;
        }
    }

    std::fill(cost.begin(), cost.end(), 0.0);
    for (int j = 0; j < n; ++j) cost[static_cast<std::size_t>(j)] = p.c(j);
    t.set_costs(cost);
    if (!t.optimize(n, opt, sol.iterations)) {
        sol.status = Status::Unbounded;
        return sol;
    }

    for (int i = 0; i < m; ++i) {
        if (redundant[static_cast<std::size_t>(i)]) continue;
        sol.basis.push_back(t.basis()[static_cast<std::size_t>(i)]);
        sol.basis_rows.push_back(i);
    }

    // Recover x from the basis with the original data; the tableau values carry
    // accumulated pivoting error.
    const auto k = static_cast<Eigen::Index>(sol.basis.size());
    Eigen::MatrixXd B(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) B(r, c) = p.A(sol.basis_rows[static_cast<std::size_t>(r)], sol.basis[static_cast<std::size_t>(c)]);
        rhs(r) = p.b(sol.basis_rows[static_cast<std::size_t>(r)]);
    }
    sol.x = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd xb = B.fullPivLu().solve(rhs);
    const bool refined_ok = xb.allFinite() && xb.minCoeff() > -1e-9 && (B * xb - rhs).cwiseAbs().maxCoeff() < 1e-10;
    for (Eigen::Index r = 0; r < k; ++r) {
        const double tableau_value = t.at(sol.basis_rows[static_cast<std::size_t>(r)], t.rhs());
        sol.x(sol.basis[static_cast<std::size_t>(r)]) = std::max(0.0, refined_ok ? xb(r) : tableau_value);
    }
    sol.objective = p.c.dot(sol.x);
    sol.status = Status::Optimal;
    return sol;
}

}  // namespace concordance::lp
