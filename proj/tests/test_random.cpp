#include "doctest.h"

#include "concordance/random.hpp"

#include <cmath>
#include <vector>

using concordance::Philox4x32;
using concordance::RandomStream;

TEST_CASE("Philox4x32-10 known answers") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    RandomStream a(42, 0), b(42, 0), c(42, 1), e(43, 0);
    std::vector<std::uint32_t> xa, xb, xc, xe;
    for (int i = 0; i < 100; ++i) {
        xa.push_back(a());
        xb.push_back(b());
        xc.push_back(c());
        xe.push_back(e());
    }
    CHECK(xa == xb);
    CHECK(xa != xc);
    CHECK(xa != xe);
}

TEST_CASE("uniform and normal moments") {
    RandomStream s(7, 3);
    const int n = 200000;
    double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        CHECK_FALSE((u <= 0.0 || u >= 1.0));
        su += u;
        su2 += u * u;
        const double z = s.normal();
        sn += z;
        sn2 += z * z;
        sn4 += z * z * z * z;
    }
    CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(su2 / n - 1.0 / 3) < 0.005);
    CHECK(std::abs(sn / n) < 4 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1) < 4 * std::sqrt(2.0 / n));
    CHECK(std::abs(sn4 / n - 3) < 0.1);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 70000; ++i) ++hist[static_cast<std::size_t>(s.below(7))];
    for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}
