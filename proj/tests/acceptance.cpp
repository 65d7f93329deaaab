// Acceptance run: one line per criterion, pinned tolerances and time budgets.
// Exit status is nonzero when a criterion fails that is not listed in
// kKnownDeviations; those are still reported as FAIL.

#include "oracles.hpp"

#include "concordance/equiconcordant.hpp"
#include "concordance/error.hpp"
#include "concordance/reproduce.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace concordance;

namespace {

const std::set<std::string> kKnownDeviations{"normal5"};

struct Line {
    std::string id;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;
};

Line from_artifact(const ReproducedArtifact& a) {
    return {a.name, a.title, a.pass, a.summary, a.seconds, a.budget_seconds};
}

template <class F>
Line timed(std::string id, std::string title, double budget, F&& body) {
    Line l{std::move(id), std::move(title)};
    l.budget = budget;
    const auto start = std::chrono::steady_clock::now();
    body(l);
    l.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return l;
}

Line b_matrices() {
    const auto b7 = reproduce_b7();
    Line l = timed("b_matrices", "B_7 exact and B_d against the group-average oracle for d <= 8", 10.0, [&](Line& l) {
        int worst = 0;
        bool ok = true;
        for (int d = 2; d <= 8; ++d) {
            const bool same = ((build_B_matrix(d) - oracle::group_average_B(d)).cwiseAbs().array() < 1e-15).all();
            if (!same) worst = d;
            ok = ok && same;
        }
        l.pass = b7.pass && ok;
        l.detail = "B_7 " + b7.summary + ", oracle " + (ok ? "agrees for d = 2..8" : "differs at d = " + std::to_string(worst));
    });
    l.seconds += b7.seconds;
    return l;
}

Line closed_form_window() {
    return timed("closed_form", "closed-form weights on the exchangeable four-dimensional window", 10.0, [](Line& l) {
        std::mt19937_64 rng(61);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double err = 0.0;
        int inside = 0, outside = 0, wrong_verdicts = 0;
        while (inside < 100) {
            const double k2 = 1.0 / 3.0 + u(rng) * 2.0 / 3.0;
            const double lo = std::max(2 * k2 - 1, 0.0), hi = (3 * k2 - 1) / 2;
            const double k4 = lo + u(rng) * (hi - lo);
            const std::vector<double> pairs(6, k2);
            const auto cert = check_attainable(PartialSignature::from_pairs(4, pairs).with(SubsetIndex::full(4), k4));
            ++inside;
            if (!cert.feasible) {
                ++wrong_verdicts;
                continue;
            }
            const double w1 = (3 * k2 - 1) / 2 - k4, w2 = 1 - 2 * k2 + k4;
            const std::vector<double> expected{k4, w1, w1, w2, w1, w2, w2, w1};
            for (std::size_t k = 0; k < 8; ++k) err = std::max(err, std::abs((*cert.witness)[k] - expected[k]));
        }
        while (outside < 100) {
            const double k2 = u(rng), k4 = u(rng);
            const double lo = std::max(2 * k2 - 1, 0.0), hi = (3 * k2 - 1) / 2;
            if (k2 >= 1.0 / 3.0 - 1e-6 && k4 >= lo - 1e-6 && k4 <= hi + 1e-6) continue;
            const std::vector<double> pairs(6, k2);
            if (check_attainable(PartialSignature::from_pairs(4, pairs).with(SubsetIndex::full(4), k4)).feasible) ++wrong_verdicts;
            ++outside;
        }
        std::ostringstream os;
        os << "100 inside, max weight error " << err << " (tolerance 1e-8); 100 outside; " << wrong_verdicts << " wrong verdicts";
        l.pass = wrong_verdicts == 0 && err <= 1e-8;
        l.detail = os.str();
    });
}

Line property_suites() {
    return timed("properties", "round trip, U-statistic identity, sampler diagnostics, three-dimensional counterexample", 120.0, [](Line& l) {
        std::mt19937_64 rng(2024);
        std::ostringstream os;

        double round_trip = 0.0;
        for (int d = 2; d <= 10; ++d)
            for (int t = 0; t < 20; ++t) {
                const auto w = oracle::random_simplex(rng, extremal_count(d), t % 2 ? 0.5 : 0.0);
                const auto kappa = signature_from_weights(MixtureWeights(d, w));
                const auto back = solve_signature_system(d, kappa.values());
                for (std::size_t k = 0; k < w.size(); ++k) round_trip = std::max(round_trip, std::abs(back[k] - w[k]));
            }
        const bool round_ok = round_trip <= 1e-9;
        os << "round trip " << round_trip << "; ";

        std::normal_distribution<double> z(0.0, 1.0);
        std::uniform_int_distribution<int> pick_d(2, 5), pick_n(2, 40);
        int mismatches = 0;
        for (int t = 0; t < 50; ++t) {
            const int d = pick_d(rng), n = pick_n(rng);
            std::vector<std::vector<double>> rows(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d)));
            Eigen::MatrixXd m(n, d);
            for (int i = 0; i < n; ++i) {
                const double common = z(rng);
                for (int j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = common * (t % 3) + z(rng);
            }
            const auto est = empirical_signature(SampleMatrix(m));
            const auto A = build_A_matrix(d);
            for (std::size_t r = 1; r < A.rows(); ++r) {
                long long from_weights = 0;
                for (std::size_t k = 0; k < A.cols(); ++k) from_weights += A(r, k) * static_cast<long long>(est.pattern_counts[k]);
                if (from_weights != oracle::u_statistic_count(rows, SubsetIndex(d, A.row_masks()[r]).members())) ++mismatches;
            }
        }
        os << "U-statistic mismatches " << mismatches << " in 50 datasets; ";

        const auto sample = sample_mixture(MixtureWeights(4, published::crypto_weights()), 100'000, 0);
        const auto diag = validate_mixture(sample.values, 0.01);
        const bool sampler_ok = diag.on_diagonal_fraction == 1.0 && diag.uniformity_tested && diag.pass;
        os << "sampler on-diagonal " << diag.on_diagonal_fraction << ", min p " << diag.min_p_value << "; ";

        const auto x = sample_counterexample(3.0, 100'000, 0);
        const auto full = validate_mixture(x, 0.01);
        bool margins_ok = true;
        for (const auto& p : validate_pairs(x, 0.01)) margins_ok = margins_ok && p.report.pass;
        os << "counterexample theta = 3 " << (full.pass ? "passes" : "fails") << " (min p " << full.min_p_value
           << "), bivariate margins " << (margins_ok ? "pass" : "fail");

        l.pass = round_ok && mismatches == 0 && sampler_ok && !full.pass && margins_ok;
        l.detail = os.str();
    });
}

}  // namespace

int main() {
    ReproduceOptions options;
    options.seed = 0;
    options.samples = 10'000'000;

    std::vector<Line> lines;
    lines.push_back(from_artifact(reproduce_amatrix()));
    lines.push_back(from_artifact(reproduce_crypto_weights()));
    lines.push_back(from_artifact(reproduce_three_pairs()));
    lines.push_back(from_artifact(reproduce_kendall4_bounds()));
    lines.push_back(from_artifact(reproduce_five_dim_vertices()));
    lines.push_back(from_artifact(reproduce_tlimit3(options)));
    lines.push_back(from_artifact(reproduce_normal5(options)));
    lines.push_back(from_artifact(reproduce_elliptical_gap()));
    lines.push_back(b_matrices());
    lines.push_back(closed_form_window());
    lines.push_back(property_suites());

    int passed = 0, unexpected = 0;
    for (auto& l : lines) {
        const bool in_time = l.seconds <= l.budget;
        const bool ok = l.pass && in_time;
        const bool known = !ok && kKnownDeviations.count(l.id);
        passed += ok;
        unexpected += !ok && !known;
        std::printf("%s  %-18s %s: %s [%.3f s, budget %g s%s]%s\n", ok ? "PASS" : "FAIL", l.id.c_str(), l.title.c_str(),
                    l.detail.c_str(), l.seconds, l.budget, in_time ? "" : ", over budget",
                    known ? " (known deviation, see README)" : "");
    }
    std::printf("%d of %zu criteria pass; %d unexpected failures\n", passed, lines.size(), unexpected);
    return unexpected == 0 ? 0 : 1;
}
