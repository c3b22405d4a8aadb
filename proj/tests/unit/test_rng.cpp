#include <doctest.h>

#include <set>

#include "fcprune/rng.hpp"

using namespace fcprune;

TEST_CASE("splitmix64 reference sequence for seed 0") {
    Rng rng(0);
    CHECK(rng.next_u64() == 0xE220A8397B1DCDAFULL);
    CHECK(rng.next_u64() == 0x6E789E6AA1B965F4ULL);
    CHECK(rng.next_u64() == 0x06C45D188009454FULL);
    Rng rng42(42);
    CHECK(rng42.next_u64() == 0xBDD732262FEB6E95ULL);
}

TEST_CASE("identical seeds give identical streams; copies are independent") {
    Rng a(123), b(123);
    for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng base(9);
    Rng copy = base; // value semantics: advancing the copy leaves base alone
    (void)copy.next_u64();
    Rng fresh(9);
    CHECK(base.next_u64() == fresh.next_u64());
}

TEST_CASE("uniform stays in [0,1) and normal looks centered") {
    Rng rng(4);
    double sum = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 2000.0 == doctest::Approx(0.5).epsilon(0.05));

    double nsum = 0.0, nsq = 0.0;
    for (int i = 0; i < 4000; ++i) {
        const double n = rng.normal();
        nsum += n;
        nsq += n * n;
    }
    CHECK(nsum / 4000.0 == doctest::Approx(0.0).epsilon(0.1));
    CHECK(nsq / 4000.0 == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("permutation is a bijection and seed-stable") {
    Rng rng(7);
    const auto p = rng.permutation(40);
    std::set<std::size_t> seen(p.begin(), p.end());
    CHECK(seen.size() == 40);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 39);

    Rng rng2(7);
    CHECK(rng2.permutation(40) == p);
}
