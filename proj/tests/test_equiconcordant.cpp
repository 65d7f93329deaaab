#include "doctest.h"
#include "oracles.hpp"

#include "concordance/attainability.hpp"
#include "concordance/equiconcordant.hpp"
#include "concordance/error.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

using namespace concordance;

TEST_CASE("exact binomials") {
    CHECK(binomial(30, 15) == 155117520u);
    CHECK(binomial(7, 4) == 35u);
    CHECK(binomial(5, -1) == 0u);
    CHECK(binomial(3, 4) == 0u);
    CHECK_THROWS_AS(binomial(31, 2), Error);
}

TEST_CASE("comonotonic profiles") {
    const auto p4 = comonotonic_profile(4);
    CHECK(p4.eta == std::vector<int>{4, 3, 3, 2, 3, 2, 2, 3});
    CHECK(p4.h == std::vector<int>{4, 3, 2});
    CHECK(p4.mu == std::vector<std::uint64_t>{1, 4, 3});
    const auto p2 = comonotonic_profile(2);
    CHECK(p2.h == std::vector<int>{2, 1});
    CHECK(p2.mu == std::vector<std::uint64_t>{1, 1});
    const auto p7 = comonotonic_profile(7);
    CHECK(p7.h.size() == 4);
    CHECK(p7.h == std::vector<int>{7, 6, 5, 4});
    CHECK(p7.mu == std::vector<std::uint64_t>{1, 7, 21, 35});
    for (int d = 2; d <= 12; ++d) {
        const auto p = comonotonic_profile(d);
        CHECK(std::accumulate(p.mu.begin(), p.mu.end(), std::uint64_t{0}) == extremal_count(d));
        std::vector<std::uint64_t> counted(p.mu.size(), 0);
        for (int g : p.group) ++counted[static_cast<std::size_t>(g)];
        CHECK(counted == p.mu);
    }
}

TEST_CASE("B_7 as printed") {
    const auto B = build_B_matrix_exact(7);
    const std::vector<std::vector<Rational>> printed{
        {Rational(1), Rational(1), Rational(1), Rational(1)},
        {Rational(1), Rational(5, 7), Rational(11, 21), Rational(15, 35)},
        {Rational(1), Rational(3, 7), Rational(3, 21), Rational(1, 35)},
        {Rational(1), Rational(1, 7), Rational(0), Rational(0)},
    };
    CHECK(B == printed);
    CHECK(B[1][3].to_string() == "3/7");
}

TEST_CASE("small B matrices") {
    Eigen::MatrixXd b4(3, 3);
    b4 << 1, 1, 1, 1, 0.5, 1.0 / 3.0, 1, 0, 0;
    CHECK((build_B_matrix(4) - b4).cwiseAbs().maxCoeff() == 0.0);
    Eigen::MatrixXd b2(2, 2);
    b2 << 1, 1, 1, 0;
    CHECK(build_B_matrix(2) == b2);
}

TEST_CASE("B_d equals the group average of A_d columns") {
    for (int d = 2; d <= 8; ++d) {
        const auto B = build_B_matrix(d);
        const auto oracle_B = oracle::group_average_B(d);
        CHECK(((B - oracle_B).cwiseAbs().array() < 1e-15).all());
        CHECK(std::abs(B.determinant()) > 1e-12);
    }
}

TEST_CASE("skeletal solve") {
    const auto s = skeletal_solve(make_skeletal(4, {1, 2.0 / 3.0, 0.4}));
    REQUIRE(s.attainable);
    CHECK(s.v[0] == doctest::Approx(0.4));
    CHECK(s.v[1] == doctest::Approx(0.4));
    CHECK(s.v[2] == doctest::Approx(0.2));

    const auto one = skeletal_solve(make_skeletal(5, {1, 1, 1}));
    CHECK(one.v[0] == doctest::Approx(1.0));
    CHECK(std::abs(one.v[1]) < 1e-12);

    const auto bad = skeletal_solve(make_skeletal(4, {1, 0.4, 0.4}));
    CHECK_FALSE(bad.attainable);
    CHECK(bad.raw[1] == doctest::Approx(-1.2));
    CHECK_THROWS_AS(make_skeletal(4, {1, 0.5}), Error);
    CHECK_THROWS_AS(make_skeletal(4, {0.9, 0.5, 0.2}), Error);
}

TEST_CASE("expand skeletal weights") {
    const auto w = expand_skeletal({0.4, 0.4, 0.2}, 4);
    const std::vector<double> expected{0.4, 0.1, 0.1, 0.2 / 3, 0.1, 0.2 / 3, 0.2 / 3, 0.1};
    for (std::size_t k = 0; k < 8; ++k) CHECK(w[k] == doctest::Approx(expected[k]));
    CHECK(expand_skeletal({1, 0, 0, 0}, 7)[0] == 1.0);
    CHECK(expand_skeletal({0.5, 0.5}, 2).values() == std::vector<double>{0.5, 0.5});
    CHECK_THROWS_AS(expand_skeletal({0.5, 0.6}, 2), Error);
    CHECK_THROWS_AS(expand_skeletal({1.5, -0.5}, 2), Error);
}

TEST_CASE("equiconcordance checks") {
    CHECK(is_equiconcordant(signature_from_weights(expand_skeletal({0.4, 0.4, 0.2}, 4))));
    CHECK_FALSE(is_equiconcordant(EvenSignature(4, {1, 0.639, 0.666, 0.598, 0.681, 0.630, 0.661, 0.364})));
    CHECK(is_equiconcordant(signature_from_weights(MixtureWeights::unit(6, 1))));
}

TEST_CASE("skeletal round trip and label permutation invariance") {
    std::mt19937_64 rng(31);
    for (int d = 2; d <= 9; ++d)
        for (int t = 0; t < 30; ++t) {
            const auto v = oracle::random_simplex(rng, static_cast<std::size_t>(1 + d / 2));
            const auto w = expand_skeletal(v, d);
            const auto kappa = signature_from_weights(w);
            CHECK(is_equiconcordant(kappa, 1e-12));
            const auto back = skeletal_solve(skeletal_of(kappa));
            REQUIRE(back.attainable);
            for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(back.v[i] - v[i]) < 1e-9);

            if (d > 6) continue;
            const auto full = extend_to_full(kappa);
            std::vector<int> perm(static_cast<std::size_t>(d));
            std::iota(perm.begin(), perm.end(), 1);
            std::shuffle(perm.begin(), perm.end(), rng);
            for (Mask m : full.labels()) {
                std::vector<int> image;
                for (int j = 0; j < d; ++j)
                    if (m & (Mask{1} << j)) image.push_back(perm[static_cast<std::size_t>(j)]);
                CHECK(full.at(SubsetIndex::from_members(d, image)) == doctest::Approx(full.at(SubsetIndex(d, m))).epsilon(1e-12));
            }
        }
}

TEST_CASE("equiconcordant window for d = 4") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 400; ++t) {
        const double k2 = u(rng), k4 = u(rng);
        const bool inside = k2 >= 1.0 / 3.0 && k4 >= std::max(2 * k2 - 1, 0.0) && k4 <= (3 * k2 - 1) / 2;
        CHECK(skeletal_solve(make_skeletal(4, {1, k2, k4})).attainable == inside);
        // Same verdict from the full LP over the equal-pair, equal-4-set partial.
        const auto p = PartialSignature::from_pairs(4, std::vector<double>(6, k2)).with(SubsetIndex::full(4), k4);
        CHECK(check_attainable(p).feasible == inside);
    }
    for (double k2 : {0.0, 0.1, 0.3, 0.33})
        CHECK_FALSE(check_attainable(PartialSignature::from_pairs(4, std::vector<double>(6, k2))).feasible);
}
