#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stop_token>
#include <vector>

namespace concordance::lp {

/// minimize c'x subject to A x = b, x >= 0.
struct LinearProgram {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Options {
    double feasibility_tolerance = 1e-8;  // phase-1 optimum at or below this means feasible
    double pivot_tolerance = 1e-10;
    double cost_tolerance = 1e-10;
    std::size_t max_iterations = 2'000'000;
    std::stop_token stop;
};

struct Solution {
    Status status = Status::Infeasible;
    Eigen::VectorXd x;            // valid when Optimal
    double objective = 0.0;
    double phase_one_objective = 0.0;  // sum of artificials at the end of phase 1
    std::vector<int> basis;       // basic columns, one per non-redundant row
    std::vector<int> basis_rows;  // rows of A those columns are basic in
    std::size_t iterations = 0;
};

/// Two-phase primal simplex on a dense tableau with Bland's anti-cycling rule.
/// Throws Error(NumericalFailure) if the iteration cap is hit.
Solution solve(const LinearProgram& problem, const Options& options = {});

}  // namespace concordance::lp
