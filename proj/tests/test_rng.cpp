#include <doctest.h>

#include <cmath>

#include "ips/rng.hpp"

using ips::Rng;

TEST_CASE("streams are deterministic and replica-splittable") {
    Rng a(42, 0), b(42, 0), c(42, 1);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    bool differs = false;
    Rng a2(42, 0);
    for (int i = 0; i < 100; ++i) differs |= (a2.next_u64() != c.next_u64());
    CHECK(differs);
    Rng child0 = Rng::child(7, 0), child1 = Rng::child(7, 1);
    CHECK(child0.next_u64() != child1.next_u64());
}

TEST_CASE("uniform stays inside the open unit interval and has the right mean") {
    Rng rng(1);
    double sum = 0;
    for (int i = 0; i < 200000; ++i) {
        double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / 200000 - 0.5) < 0.005);
}

TEST_CASE("exponential and poisson moments") {
    Rng rng(2);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) sum += rng.exponential(2.0);
    CHECK(std::abs(sum / 100000 - 0.5) < 0.01);
    long long total = 0;
    for (int i = 0; i < 50000; ++i) total += rng.poisson(3.0);
    CHECK(std::abs(total / 50000.0 - 3.0) < 0.05);
}

TEST_CASE("uniform_int is unbiased over a small range") {
    Rng rng(3);
    int counts[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 100000; ++i) ++counts[rng.uniform_int(5)];
    for (int k = 0; k < 5; ++k) CHECK(std::abs(counts[k] - 20000) < 600);
}
