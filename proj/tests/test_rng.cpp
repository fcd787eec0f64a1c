#include "doctest.h"

#include <cmath>

#include "grf/rng.hpp"

using grf::RngStream;

TEST_SUITE("rng") {

TEST_CASE("identical seed and call sequence reproduce draws") {
    RngStream a(1234), b(1234);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(a.counter() == b.counter());
}

TEST_CASE("state round-trips through (seed, counter)") {
    RngStream a(77);
    for (int i = 0; i < 13; ++i) a.normal();
    RngStream b(a.seed(), a.counter());
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in [0,1) and looks flat") {
    RngStream rng(5);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("normal has roughly standard moments") {
    RngStream rng(9);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("uniform_below respects the bound") {
    RngStream rng(11);
    for (int i = 0; i < 10000; ++i) {
        auto v = rng.uniform_below(7);
        CHECK(v < 7);
    }
    CHECK(rng.uniform_below(1) == 0);
}

TEST_CASE("derived streams differ from the base") {
    RngStream base(42);
    RngStream d1 = RngStream::derive(42, 1);
    RngStream d2 = RngStream::derive(42, 2);
    CHECK(base.next_u64() != d1.next_u64());
    CHECK(d1.next_u64() != d2.next_u64());
}

} // TEST_SUITE
