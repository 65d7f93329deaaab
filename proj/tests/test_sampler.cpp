#include "doctest.h"
#include "oracles.hpp"

#include "concordance/error.hpp"
#include "concordance/estimation.hpp"
#include "concordance/sampler.hpp"

#include <cmath>
#include <random>

using namespace concordance;

namespace {

const MixtureWeights& crypto_weights() {
    static const MixtureWeights w(4, {0.364, 0.129, 0.069, 0.077, 0.098, 0.075, 0.066, 0.122});
    return w;
}

bool on_some_diagonal(const Eigen::MatrixXd& x, Eigen::Index r) {
    for (Eigen::Index j = 1; j < x.cols(); ++j) {
        const double a = x(r, 0), b = x(r, j);
        if (std::abs(a - b) > 1e-12 && std::abs(1 - a - b) > 1e-12) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("extremal copula distribution functions") {
    CHECK(extremal_cdf(1, std::vector<double>{0.2, 0.5, 0.7}) == doctest::Approx(0.2));
    CHECK(extremal_cdf(2, std::vector<double>{0.6, 0.7}) == doctest::Approx(0.3));
    CHECK(extremal_cdf(2, std::vector<double>{0.8, 0.9, 0.7, 0.6}) == doctest::Approx(0.3));
    CHECK(extremal_cdf(2, std::vector<double>{0.2, 0.3}) == 0.0);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int d = 2; d <= 6; ++d)
        for (int k = 1; k <= (1 << (d - 1)); ++k)
            for (int t = 0; t < 10; ++t) {
                std::vector<double> p(static_cast<std::size_t>(d));
                for (auto& x : p) x = u(rng);
                const auto j = static_cast<std::size_t>(t % d);
                auto zero = p;
                zero[j] = 0.0;
                CHECK(extremal_cdf(k, zero) == 0.0);
                std::vector<double> ones(static_cast<std::size_t>(d), 1.0);
                ones[j] = p[j];
                CHECK(extremal_cdf(k, ones) == doctest::Approx(p[j]));
            }
    CHECK_THROWS_AS(extremal_cdf(3, std::vector<double>{0.5, 0.5}), Error);
    CHECK_THROWS_AS(extremal_cdf(1, std::vector<double>{0.5, 1.5}), Error);
}

TEST_CASE("mixture distribution functions") {
    CHECK(mixture_cdf(MixtureWeights(2, {0.5, 0.5}), std::vector<double>{0.6, 0.7}) == doctest::Approx(0.45));
    CHECK(mixture_cdf(MixtureWeights::unit(3, 1), std::vector<double>{0.3, 0.2, 0.9}) == doctest::Approx(0.2));
    CHECK(mixture_cdf(crypto_weights(), std::vector<double>(4, 1.0)) == doctest::Approx(1.0));

    // Nondecreasing along every coordinate on a grid.
    const auto& w = crypto_weights();
    for (int a = 0; a <= 5; ++a)
        for (int b = 0; b <= 5; ++b)
            for (int c = 0; c <= 5; ++c)
                for (int e = 0; e < 5; ++e) {
                    std::vector<double> lo{a / 5.0, b / 5.0, c / 5.0, e / 5.0};
                    const double base = mixture_cdf(w, lo);
                    for (std::size_t j = 0; j < 4; ++j) {
                        auto hi = lo;
                        hi[j] = std::min(1.0, hi[j] + 0.2);
                        CHECK(mixture_cdf(w, hi) >= base - 1e-15);
                    }
                }
}

TEST_CASE("samples lie on diagonals and are reproducible") {
    const auto one = sample_mixture(MixtureWeights::unit(3, 1), 3, 9);
    for (Eigen::Index r = 0; r < 3; ++r) {
        CHECK(one.values(r, 0) == one.values(r, 1));
        CHECK(one.values(r, 1) == one.values(r, 2));
    }

    SamplerOptions single{1}, many{4};
    const auto a = sample_mixture(crypto_weights(), 200'000, 5, single);
    const auto b = sample_mixture(crypto_weights(), 200'000, 5, many);
    CHECK(a.values == b.values);
    CHECK(a.diagonal == b.diagonal);
    CHECK(a.seed == 5);
    CHECK(sample_mixture(crypto_weights(), 1000, 6).values != sample_mixture(crypto_weights(), 1000, 5).values.topRows(1000));

    std::vector<double> freq(8, 0.0);
    for (Eigen::Index r = 0; r < a.values.rows(); ++r) {
        REQUIRE(on_some_diagonal(a.values, r));
        freq[static_cast<std::size_t>(a.diagonal[static_cast<std::size_t>(r)] - 1)] += 1.0 / 200'000;
    }
    for (std::size_t k = 0; k < 8; ++k) {
        const double w = crypto_weights()[k];
        CHECK(std::abs(freq[k] - w) <= 4 * std::sqrt(w * (1 - w) / 200'000));
    }

    const auto report = validate_mixture(a.values);
    CHECK(report.on_diagonal_fraction == 1.0);
    CHECK(report.uniformity_tested);
    CHECK(report.pass);
    for (const auto& diag : report.diagonals) {
        CHECK(diag.tested);
        CHECK(diag.ks.p_value >= 0.0);
        CHECK(diag.ks.p_value <= 1.0);
    }
    CHECK_THROWS_AS(sample_mixture(crypto_weights(), 0, 1), Error);
}

TEST_CASE("empirical distribution function converges to the mixture") {
    const auto& w = crypto_weights();
    const auto s = sample_mixture(w, 100'000, 21);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> p(4);
        for (auto& x : p) x = u(rng);
        const double c = mixture_cdf(w, p);
        double hits = 0;
        for (Eigen::Index r = 0; r < s.values.rows(); ++r) {
            bool below = true;
            for (Eigen::Index j = 0; j < 4 && below; ++j) below = s.values(r, j) <= p[static_cast<std::size_t>(j)];
            hits += below;
        }
        const double f = hits / 100'000.0;
        CHECK(std::abs(f - c) <= 3 * std::sqrt(c * (1 - c) / 100'000.0) + 1e-12);
    }
}

TEST_CASE("estimation recovers the mixture from its samples") {
    const auto s = sample_mixture(crypto_weights(), 100'000, 3);
    const auto est = empirical_signature(SampleMatrix(s.values));
    const auto kappa = signature_from_weights(crypto_weights());
    const auto even = est.full.even();
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(even[i] - kappa[i]) <= 0.01);
    const Eigen::MatrixXd expected = kendall_matrix_from_even(kappa);
    CHECK((kendall_matrix_from_even(even) - expected).cwiseAbs().maxCoeff() <= 0.01);

    const auto half = sample_mixture(MixtureWeights(2, {0.5, 0.5}), 100'000, 4);
    const auto tau = kappa_to_tau(empirical_signature(SampleMatrix(half.values)).full.even()[1], 2);
    CHECK(std::abs(tau) <= 0.01);
}

TEST_CASE("Kolmogorov-Smirnov against the uniform law") {
    CHECK(ks_uniform({0.5}).statistic == doctest::Approx(0.5));
    std::vector<double> grid;
    for (int i = 0; i < 1000; ++i) grid.push_back((i + 0.5) / 1000);
    const auto even = ks_uniform(grid);
    CHECK(even.statistic == doctest::Approx(0.0005));
    CHECK(even.p_value == doctest::Approx(1.0));
    std::vector<double> squashed;
    for (double x : grid) squashed.push_back(x * x);
    CHECK(ks_uniform(squashed).p_value < 1e-10);
    CHECK_THROWS_AS(ks_uniform({}), Error);

    // Null calibration: rejection rate near the nominal level.
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int rejected = 0;
    for (int t = 0; t < 400; ++t) {
        std::vector<double> v(200);
        for (auto& x : v) x = u(rng);
        rejected += ks_uniform(v).p_value < 0.05;
    }
    CHECK(rejected >= 8);
    CHECK(rejected <= 36);
}

TEST_CASE("counterexample with pairwise extremal margins") {
    for (double theta : {0.0, 3.0, -4.0, 4.0}) {
        const auto x = sample_counterexample(theta, 100'000, 77);
        for (Eigen::Index j = 0; j < 3; ++j) {
            std::vector<double> col(x.col(j).data(), x.col(j).data() + x.rows());
            CHECK(ks_uniform(col).p_value >= 0.01);
        }
        for (const auto& pair : validate_pairs(x, 0.01)) {
            CHECK(pair.report.on_diagonal_fraction == 1.0);
            CHECK(pair.report.pass);
        }
        const auto full = validate_mixture(x, 0.01);
        CHECK(full.on_diagonal_fraction == 1.0);
        CHECK(full.pass == (theta == 0.0));
    }
    CHECK_THROWS_AS(sample_counterexample(4.5, 10, 1), Error);
    try {
        sample_counterexample(-5, 10, 1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ThetaOutOfRange);
    }
}

TEST_CASE("diagnostics on off-diagonal and small samples") {
    Eigen::MatrixXd x(3, 2);
    x << 0.1, 0.1, 0.2, 0.8, 0.3, 0.5;
    const auto r = validate_mixture(x);
    CHECK(r.on_diagonal_fraction == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(r.uniformity_tested);
    CHECK_FALSE(r.pass);
    Eigen::MatrixXd y(2, 2);
    y << 0.1, 0.1, 0.2, 0.8;
    CHECK(validate_mixture(y).pass);
    CHECK_FALSE(validate_mixture(y).uniformity_tested);
    CHECK_THROWS_AS(validate_mixture(Eigen::MatrixXd(0, 2)), Error);
    CHECK_THROWS_AS(validate_mixture(y, 1.5), Error);
}
