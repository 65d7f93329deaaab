#include "doctest.h"
#include "oracles.hpp"

#include "concordance/error.hpp"
#include "concordance/signature.hpp"

#include <Eigen/Eigenvalues>

#include <random>

using namespace concordance;

namespace {

std::vector<int> members_of(Mask m) {
    std::vector<int> out;
    for (int j = 0; j < 30; ++j)
        if (m & (Mask{1} << j)) out.push_back(j + 1);
    return out;
}

}  // namespace

TEST_CASE("subset parsing and graded order") {
    const auto s = SubsetIndex::parse(4, "{1,3}");
    CHECK(s.members() == std::vector<int>{1, 3});
    CHECK(SubsetIndex::parse(4, "1-3") == s);
    CHECK(SubsetIndex::parse(4, "").empty_set());
    CHECK_THROWS_AS(SubsetIndex::parse(4, "1,5"), Error);
    CHECK_THROWS_AS(SubsetIndex::from_members(4, {2, 2}), Error);

    const auto masks = even_subset_masks(4);
    std::vector<std::vector<int>> rows;
    for (Mask m : masks) rows.push_back(members_of(m));
    CHECK(rows == std::vector<std::vector<int>>{{}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}, {1, 2, 3, 4}});

    CHECK_THROWS_AS(LabelSet(3, {SubsetIndex::from_members(3, {1, 2})}), Error);
    const LabelSet ls(3, {SubsetIndex::from_members(3, {2, 3}), SubsetIndex::empty(3), SubsetIndex::from_members(3, {1, 2})});
    CHECK(ls[1] == SubsetIndex::from_members(3, {1, 2}));
    CHECK(ls.index_of(SubsetIndex::from_members(3, {1, 3})) == -1);
}

TEST_CASE("binary codes") {
    auto c1 = binary_code(1, 4);
    CHECK(c1.bits == std::vector<int>{0, 0, 0, 0});
    CHECK(c1.index_set().members() == std::vector<int>{1, 2, 3, 4});
    auto c8 = binary_code(8, 4);
    CHECK(c8.bits == std::vector<int>{0, 1, 1, 1});
    CHECK(c8.index_set().members() == std::vector<int>{1});
    CHECK(binary_code(1, 2).bits == std::vector<int>{0, 0});
    CHECK_THROWS_AS(binary_code(9, 4), Error);
    CHECK_THROWS_AS(binary_code(0, 4), Error);

    const std::vector<int> flipped{1, 0, 1, 1};
    CHECK(canonical_index(flipped) == 5);
    const std::vector<int> zeros{0, 0, 0, 0};
    CHECK(canonical_index(zeros) == 1);
    const std::vector<int> bad{0, 2, 1};
    CHECK_THROWS_AS(canonical_index(bad), Error);

    for (int d = 2; d <= 8; ++d)
        for (int k = 1; k <= static_cast<int>(extremal_count(d)); ++k) {
            const auto code = binary_code(k, d);
            CHECK(code.bits == oracle::bits_of(k, d));
            CHECK(canonical_index(code.bits) == k);
            auto complement = code.bits;
            for (auto& b : complement) b = 1 - b;
            CHECK(canonical_index(complement) == k);
        }
}

TEST_CASE("A_4 matches the printed matrix") {
    const int printed[8][8] = {
        {1, 1, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 0, 0, 0, 0}, {1, 1, 0, 0, 1, 1, 0, 0}, {1, 0, 1, 0, 1, 0, 1, 0},
        {1, 1, 0, 0, 0, 0, 1, 1}, {1, 0, 1, 0, 0, 1, 0, 1}, {1, 0, 0, 1, 1, 0, 0, 1}, {1, 0, 0, 0, 0, 0, 0, 0},
    };
    const auto A = build_A_matrix(4);
    REQUIRE(A.rows() == 8);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) CHECK(A(i, j) == printed[i][j]);
}

TEST_CASE("small A matrices") {
    const auto A2 = build_A_matrix(2).dense();
    CHECK(A2(0, 0) == 1);
    CHECK(A2(0, 1) == 1);
    CHECK(A2(1, 0) == 1);
    CHECK(A2(1, 1) == 0);
    const auto A3 = build_A_matrix(3).dense();
    Eigen::MatrixXd expected(4, 4);
    expected << 1, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1;
    CHECK(A3 == expected);
    CHECK_THROWS_AS(build_A_matrix(dimension_cap() + 1), Error);
}

TEST_CASE("A_d agrees with the definition and has the expected row sums") {
    for (int d = 2; d <= 8; ++d) {
        const auto A = build_A_matrix(d);
        for (std::size_t r = 0; r < A.rows(); ++r) {
            const auto members = members_of(A.row_masks()[r]);
            int sum = 0;
            for (std::size_t c = 0; c < A.cols(); ++c) {
                const int ref = oracle::coefficient(members, oracle::bits_of(static_cast<int>(c) + 1, d));
                CHECK(A(r, c) == ref);
                sum += A(r, c);
            }
            const int m = static_cast<int>(members.size());
            CHECK(sum == (m == 0 ? (1 << (d - 1)) : (1 << (d - m))));
        }
    }
}

TEST_CASE("crypto signature and weights") {
    const std::vector<double> kappa{1, 0.639, 0.666, 0.598, 0.681, 0.630, 0.661, 0.364};
    const std::vector<double> printed{0.364, 0.129, 0.069, 0.077, 0.098, 0.075, 0.066, 0.122};
    const auto w = weights_from_signature(EvenSignature(4, kappa));
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(w[k] - (printed[k])) <= 2e-3);

    const auto back = signature_from_weights(MixtureWeights(4, printed));
    CHECK(back[0] == 1.0);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(back[i] - kappa[i]) <= 2e-3);

    // Independent route: full signature, Bernoulli law, Moebius inversion.
    const auto full = extend_to_full(EvenSignature(4, kappa));
    std::map<std::vector<int>, double> table;
    for (std::size_t i = 0; i < full.values().size(); ++i) table[members_of(full.labels()[i])] = full.values()[i];
    const auto w_oracle = oracle::weights_via_bernoulli(4, table);
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(w[k] - w_oracle[k]) < 1e-12);
}

TEST_CASE("trivial signatures") {
    for (int d = 2; d <= 7; ++d) {
        const auto s = signature_from_weights(MixtureWeights::unit(d, 1));
        for (double v : s.values()) CHECK(v == 1.0);
        const auto w = weights_from_signature(s);
        CHECK(w[0] == doctest::Approx(1.0));
        for (std::size_t k = 1; k < w.size(); ++k) CHECK(std::abs(w[k]) < 1e-12);
    }
    const auto s3 = signature_from_weights(MixtureWeights(3, {0.25, 0.25, 0.25, 0.25}));
    CHECK(s3.values() == std::vector<double>{1, 0.5, 0.5, 0.5});
}

TEST_CASE("equicorrelated 7/24 is not attainable") {
    const double k = 7.0 / 24.0;
    const std::vector<double> kappa{1, k, k, k};
    const auto raw = solve_signature_system(3, kappa);
    CHECK(raw[0] == doctest::Approx(-1.0 / 16.0));
    try {
        (void)weights_from_signature(EvenSignature(3, kappa));
        FAIL("expected NotAttainable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotAttainable);
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(EvenSignature(3, {1, 0.5, 0.5}), Error);
    CHECK_THROWS_AS(EvenSignature(3, {0.9, 0.5, 0.5, 0.5}), Error);
    CHECK_THROWS_AS(EvenSignature(3, {1, 1.2, 0.5, 0.5}), Error);
    CHECK_THROWS_AS(MixtureWeights(2, {0.6, 0.6}), Error);
    CHECK_THROWS_AS(MixtureWeights(2, {1.1, -0.1}), Error);
    const MixtureWeights clamped(2, {1.0 + 5e-10, -5e-10});
    CHECK(clamped[1] == 0.0);
}

TEST_CASE("round trip weights to signature, d <= 10") {
    std::mt19937_64 rng(20240917);
    for (int d = 2; d <= 10; ++d) {
        const int trials = d <= 7 ? 200 : 20;
        for (int t = 0; t < trials; ++t) {
            const auto w = oracle::random_simplex(rng, extremal_count(d), t % 2 ? 0.5 : 0.0);
            const auto s = signature_from_weights(MixtureWeights(d, w));
            CHECK(s[0] == 1.0);
            for (double v : s.values()) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            const auto back = solve_signature_system(d, s.values());
            double err = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) err = std::max(err, std::abs(back[k] - w[k]));
            CHECK(err < 1e-9);
        }
    }
}

TEST_CASE("odd entries from the recursion match the mixture sums") {
    std::mt19937_64 rng(7);
    for (int d = 3; d <= 8; ++d)
        for (int t = 0; t < 100; ++t) {
            const auto w = oracle::random_simplex(rng, extremal_count(d));
            const MixtureWeights mw(d, w);
            const auto full = extend_to_full(signature_from_weights(mw));
            for (std::size_t i = 0; i < full.labels().size(); ++i) {
                const Mask m = full.labels()[i];
                if (std::popcount(m) % 2 == 0) continue;
                if (d <= 5) CHECK(std::abs(full.values()[i] - oracle::mixture_kappa(d, w, members_of(m))) < 1e-12);
                CHECK(std::abs(full.values()[i] - concordance_of_mixture(mw, m)) < 1e-12);
            }
        }
}

TEST_CASE("Table 1 pairs give kappa_123 via the recursion") {
    const double r12 = 0.2, r13 = 0.5, r23 = 0.8;
    auto pk = [](double r) { return 0.5 + std::asin(r) / M_PI; };
    const auto full = extend_to_full(EvenSignature(3, {1, pk(r12), pk(r13), pk(r23)}));
    CHECK(std::abs(full.at(SubsetIndex::from_members(3, {1, 2, 3})) - (0.513)) <= 5e-4);
    CHECK(full.at(SubsetIndex::from_members(3, {2})) == 1.0);
    CHECK(extend_to_full(signature_from_weights(MixtureWeights::unit(3, 1))).at(SubsetIndex::full(3)) == doctest::Approx(1.0));
}

TEST_CASE("tau and kappa conversion") {
    CHECK(kappa_to_tau(1.0, 4) == doctest::Approx(1.0));
    CHECK(kappa_to_tau(0.364, 4) == doctest::Approx((8 * 0.364 - 1) / 7.0));
    CHECK(kappa_to_tau(0.364, 4) == doctest::Approx(0.2731).epsilon(1e-3));
    CHECK(tau_to_kappa(-5.0 / 12.0, 2) == doctest::Approx(7.0 / 24.0));
    CHECK_THROWS_AS(kappa_to_tau(1.2, 2), Error);
    CHECK_THROWS_AS(tau_to_kappa(-0.5, 3), Error);  // below -1/3
    CHECK_THROWS_AS(kappa_to_tau(0.5, 1), Error);
    for (int m = 2; m <= 8; ++m)
        for (double k = 0.0; k <= 1.0; k += 0.05) CHECK(tau_to_kappa(kappa_to_tau(k, m), m) == doctest::Approx(k));
}

TEST_CASE("Kendall matrix from the even signature") {
    const auto crypto = EvenSignature(4, {1, 0.639, 0.666, 0.598, 0.681, 0.630, 0.661, 0.364});
    const auto P = kendall_matrix_from_even(crypto);
    CHECK(P(0, 1) == doctest::Approx(0.278));
    CHECK(P(1, 0) == P(0, 1));
    CHECK(P(2, 2) == 1.0);
    std::mt19937_64 rng(3);
    for (int d = 2; d <= 7; ++d)
        for (int t = 0; t < 50; ++t) {
            const auto s = signature_from_weights(MixtureWeights(d, oracle::random_simplex(rng, extremal_count(d), 0.3)));
            const auto K = kendall_matrix_from_even(s);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
            CHECK(es.eigenvalues().minCoeff() > -1e-10);
        }
}
