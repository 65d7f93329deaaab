#include "doctest.h"
#include "oracles.hpp"

#include "concordance/attainability.hpp"
#include "concordance/elliptical.hpp"
#include "concordance/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace concordance;

namespace {

double pair_orthant(double rho) { return 0.25 + std::asin(rho) / (2 * std::numbers::pi); }

McConfig mc(std::uint64_t samples, std::uint64_t seed = 1) {
    McConfig c;
    c.samples = samples;
    c.seed = seed;
    return c;
}

CorrelationMatrix random_correlation(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd G(d, d + 2);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d + 2; ++j) G(i, j) = n(rng);
    Eigen::MatrixXd S = G * G.transpose();
    const Eigen::VectorXd s = S.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd P = s.asDiagonal() * S * s.asDiagonal();
    P.diagonal().setOnes();
    return CorrelationMatrix(P);
}

CorrelationMatrix normal5_matrix() {
    std::vector<double> rho;
    for (int k = 1; k <= 15; ++k) rho.push_back(k / 16.0);
    return CorrelationMatrix::from_pairs(6, rho);
}

}  // namespace

TEST_CASE("pairwise orthants are exact") {
    const auto P = CorrelationMatrix::from_pairs(2, {0.5});
    const auto e = orthant_probability(P, SubsetIndex::full(2));
    CHECK(e.method == OrthantMethod::Exact);
    CHECK(e.value == doctest::Approx(1.0 / 3.0));
    CHECK(arcsin_tau_matrix(P)(0, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(orthant_probability(P, SubsetIndex::from_members(2, {1})).value == 0.5);
    CHECK(orthant_probability(P, SubsetIndex::empty(2)).value == 1.0);
    const auto s = elliptical_signature(P);
    CHECK(s.samples == 0);
    CHECK(s.raw[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("trivariate orthant equals the odd-order recursion") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        const auto P = random_correlation(rng, 3);
        const auto s = elliptical_signature(P);
        const auto full = extend_to_full(s.raw);
        const auto e = orthant_probability(P, SubsetIndex::full(3));
        CHECK(e.method == OrthantMethod::Exact);
        CHECK(std::abs(full.at(SubsetIndex::full(3)) - 2 * e.value) < 1e-12);
        CHECK(std::abs(full.at(SubsetIndex::from_members(3, {2})) - 1.0) < 1e-12);
    }
}

TEST_CASE("t limit weights for the three-dimensional example") {
    const auto P = CorrelationMatrix::from_pairs(3, {0.2, 0.5, 0.8});
    const std::vector<double> printed{0.513, 0.051, 0.154, 0.282};
    const auto exact = t_limit_weights(P, TLimitMode::Analytic);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(exact.weights[k] - printed[k]) <= 5e-4);
        CHECK(exact.std_errors[k] == 0.0);
    }
    const auto sim = t_limit_weights(P, TLimitMode::MonteCarlo, mc(1'000'000, 3));
    CHECK(sim.samples == 1'000'000);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(sim.weights[k] - exact.weights[k]) <= 4 * sim.std_errors[k]);
}

TEST_CASE("exchangeable orthants at rho = 1/2") {
    // P(Z_1 > 0, ..., Z_n > 0) = 1/(n+1) when every correlation is 1/2.
    for (int d : {4, 6}) {
        const auto P = CorrelationMatrix::equicorrelated(d, 0.5);
        for (bool antithetic : {true, false}) {
            auto c = mc(400'000, 11);
            c.antithetic = antithetic;
            const auto e = orthant_probability(P, SubsetIndex::full(d), c);
            CHECK(e.method == OrthantMethod::MonteCarlo);
            CHECK(e.std_error > 0);
            CHECK(std::abs(e.value - 1.0 / (d + 1)) <= 4 * e.std_error);
        }
    }
    const auto curve = exchangeable_skeletal_curve(4, {0.0, 0.5}, mc(400'000, 2));
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].k[1] == doctest::Approx(0.5));
    CHECK(std::abs(curve[0].k[2] - 0.125) <= 4 * curve[0].std_error[2]);
    CHECK(curve[1].k[1] == doctest::Approx(2.0 / 3.0));
    CHECK(std::abs(curve[1].k[2] - 0.4) <= 4 * curve[1].std_error[2]);
}

TEST_CASE("bivariate Monte Carlo over a grid of correlations") {
    for (int i = 0; i <= 40; ++i) {
        const double rho = -1.0 + i / 20.0;
        const auto counts = simulate_patterns(CorrelationMatrix::from_pairs(2, {rho}), mc(100'000, 100 + i));
        CHECK(counts.raw.size() == 4);
        CHECK(counts.canonical.size() == 2);
        const double n = 100'000.0;
        const double p = pair_orthant(rho);
        const double q = static_cast<double>(counts.raw[0]) / n;
        CHECK(std::abs(q - p) <= 4 * std::sqrt(p * (1 - p) / n) + 1e-12);
        CHECK(counts.canonical[0] == counts.raw[0] + counts.raw[3]);
    }
}

TEST_CASE("elliptical verdicts for Kendall matrices") {
    Eigen::MatrixXd bad(4, 4);
    bad << 1, -0.19, -0.29, 0.49, -0.19, 1, -0.34, 0.30, -0.29, -0.34, 1, -0.79, 0.49, 0.30, -0.79, 1;
    const auto v = elliptical_attainable(bad);
    CHECK_FALSE(v.attainable);
    CHECK(v.min_eigenvalue < -1e-6);
    CHECK(check_cut_polytope(bad).feasible);

    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        const auto P = random_correlation(rng, 5);
        const Eigen::MatrixXd tau = arcsin_tau_matrix(P);
        CHECK((sin_back_transform(tau) - P.matrix()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(elliptical_attainable(tau).attainable);
        CHECK(check_cut_polytope(tau).feasible);
    }
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
    asym(0, 1) = 0.2;
    CHECK_THROWS_AS(elliptical_attainable(asym), Error);
}

TEST_CASE("signatures of random normal copulas are attainable") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 5; ++t) {
        const auto P = random_correlation(rng, 5);
        const auto s = elliptical_signature(P, mc(200'000, t));
        CHECK(s.samples == 200'000);
        double total = 0;
        for (double w : s.weights.values()) {
            CHECK(w >= 0.0);
            total += w;
        }
        CHECK(total == doctest::Approx(1.0));
        for (std::size_t i = 0; i < s.raw.values().size(); ++i) {
            const auto& e = s.entries[i];
            if (e.method == OrthantMethod::Exact) CHECK(s.raw[i] == doctest::Approx(s.projected[i]).epsilon(1e-9));
            else CHECK(std::abs(s.raw[i] - s.projected[i]) < 6 * e.std_error + 1e-3);
        }
        const auto w = t_limit_weights(P, TLimitMode::MonteCarlo, mc(200'000, t));
        const auto implied = signature_from_weights(w.weights);
        for (std::size_t i = 0; i < s.raw.values().size(); ++i)
            if (s.entries[i].method == OrthantMethod::Exact) CHECK(std::abs(implied[i] - s.raw[i]) < 0.01);
    }
}

TEST_CASE("table of six-dimensional concordance probabilities") {
    const auto P = normal5_matrix();
    const auto s = elliptical_signature(P, mc(1'000'000, 7));
    const std::vector<double> pairs{0.5199, 0.5399, 0.5600, 0.5804, 0.6012, 0.6224, 0.6441, 0.6667,
                                    0.6902, 0.7149, 0.7413, 0.7699, 0.8019, 0.8391, 0.8869};
    const std::vector<double> quads{0.2804, 0.2977, 0.3150, 0.3244, 0.3437, 0.3675, 0.3702, 0.3909,
                                    0.4161, 0.4581, 0.4503, 0.4725, 0.4993, 0.5427, 0.6153};
    for (std::size_t i = 0; i < 15; ++i) {
        CHECK(std::abs(s.raw[1 + i] - pairs[i]) <= 5e-5 + 1e-12);
        const auto& e = s.entries[16 + i];
        CHECK(std::abs(e.value - quads[i]) <= 3 * e.std_error + 5e-5);
    }
    CHECK(std::abs(s.raw[31] - 0.2627) <= 3 * s.entries[31].std_error + 5e-5);
}

TEST_CASE("rank-deficient correlation matrices force zero weights") {
    const auto same = CorrelationMatrix::from_pairs(3, {1.0, 0.3, 0.3});
    CHECK(rank_deficient_support(same) == std::vector<int>{3, 4});
    const auto w = t_limit_weights(same, TLimitMode::MonteCarlo, mc(100'000));
    CHECK(w.weights[2] == 0.0);
    CHECK(w.weights[3] == 0.0);

    const auto opposite = CorrelationMatrix::from_pairs(3, {-1.0, 0.3, -0.3});
    CHECK(rank_deficient_support(opposite) == std::vector<int>{1, 2});
    const auto wo = t_limit_weights(opposite, TLimitMode::MonteCarlo, mc(100'000));
    CHECK(wo.weights[0] == 0.0);
    CHECK(wo.weights[1] == 0.0);

    CHECK(rank_deficient_support(CorrelationMatrix::equicorrelated(4, 0.3)).empty());
}

TEST_CASE("pattern counts do not depend on threading") {
    const auto P = normal5_matrix();
    auto a = mc(300'000, 42);
    a.threads = 1;
    auto b = a;
    b.threads = 5;
    const auto ca = simulate_patterns(P, a);
    const auto cb = simulate_patterns(P, b);
    CHECK(ca.raw == cb.raw);
    CHECK(ca.canonical == cb.canonical);
    std::uint64_t total = 0;
    for (auto c : ca.raw) total += c;
    CHECK(total == 300'000);
    b.seed = 43;
    CHECK(simulate_patterns(P, b).raw != ca.raw);
}

TEST_CASE("cancellation and invalid input") {
    std::stop_source source;
    source.request_stop();
    auto c = mc(1'000'000);
    c.stop = source.get_token();
    try {
        simulate_patterns(CorrelationMatrix::equicorrelated(5, 0.2), c);
        FAIL("expected cancellation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Cancelled);
    }
    Eigen::MatrixXd not_psd = Eigen::MatrixXd::Constant(3, 3, -0.9);
    not_psd.diagonal().setOnes();
    CHECK_THROWS_AS(CorrelationMatrix{not_psd}, Error);
    CHECK_THROWS_AS(CorrelationMatrix::from_pairs(3, {0.1, 0.2}), Error);
    CHECK_THROWS_AS(CorrelationMatrix::from_pairs(2, {1.5}), Error);
    CHECK_THROWS_AS(simulate_patterns(CorrelationMatrix::equicorrelated(4, 0.1), mc(0)), Error);
}
