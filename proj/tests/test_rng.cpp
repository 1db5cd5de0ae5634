#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "graphcon/rng.hpp"

using namespace graphcon;

TEST_CASE("same seed reproduces the stream") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("uniform draws land in [0,1) with the right mean") {
    Rng rng(777);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    const double mean = sum / n;
    CHECK(mean >= 0.49);
    CHECK(mean <= 0.51);
}

TEST_CASE("gaussian variance near one") {
    Rng rng(31337);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.gaussian();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(var >= 0.98);
    CHECK(var <= 1.02);
}

TEST_CASE("child seeds are deterministic and distinct") {
    CHECK(Rng::child_seed(99, 0) == Rng::child_seed(99, 0));
    CHECK(Rng::child_seed(99, 0) != Rng::child_seed(99, 1));
    CHECK(Rng::child_seed(99, 5) != Rng::child_seed(100, 5));
}

TEST_CASE("uniform range endpoints scale") {
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-0.25, 0.25);
        CHECK(u >= -0.25);
        CHECK(u < 0.25);
    }
}
