#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <numeric>
#include <set>
#include <vector>

#include "roadkit/parallel.hpp"
#include "roadkit/rng.hpp"

using namespace roadkit;

TEST_CASE("keyed streams are reproducible and key-sensitive") {
    Rng a = Rng::keyed(1, "alpha", 7);
    Rng b = Rng::keyed(1, "alpha", 7);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    std::set<std::uint64_t> firsts;
    firsts.insert(Rng::keyed(1, "alpha", 7).next_u64());
    firsts.insert(Rng::keyed(1, "alpha", 8).next_u64());
    firsts.insert(Rng::keyed(1, "beta", 7).next_u64());
    firsts.insert(Rng::keyed(2, "alpha", 7).next_u64());
    firsts.insert(Rng::keyed(1, "alpha").next_u64());
    CHECK(firsts.size() == 5);

    // String keying sees content, not identity.
    std::string s = "alpha";
    CHECK(Rng::keyed(1, s, 7).next_u64() == Rng::keyed(1, "alpha", 7).next_u64());
}

TEST_CASE("next_double and keyed_unit stay in the unit interval") {
    Rng rng(3);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.02));
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);

    const double v = keyed_unit(9, "noise", 4, 5, 0);
    CHECK(v == keyed_unit(9, "noise", 4, 5, 0));
    CHECK(v != keyed_unit(9, "noise", 4, 5, 1));
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
}

TEST_CASE("next_below is exact and near-uniform") {
    Rng rng(4);
    std::array<int, 7> hits{};
    for (int i = 0; i < 70000; ++i) {
        const std::uint64_t r = rng.next_below(7);
        REQUIRE(r < 7);
        hits[static_cast<std::size_t>(r)]++;
    }
    for (int h : hits) {
        CHECK(h > 10000 - 500);
        CHECK(h < 10000 + 500);
    }
    CHECK(rng.next_below(1) == 0);
}

TEST_CASE("shuffle is a seed-stable permutation") {
    std::vector<int> v(52);
    std::iota(v.begin(), v.end(), 0);
    std::vector<int> w = v;

    Rng r1(11);
    r1.shuffle(v);
    Rng r2(11);
    r2.shuffle(w);
    CHECK(v == w);
    CHECK(v != std::vector<int>(v.size()) /* not all zero */);

    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(52);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(sorted == expect);

    std::vector<int> u = expect;
    Rng r3(12);
    r3.shuffle(u);
    CHECK(u != v);
}

TEST_CASE("parallel_for covers each index exactly once for any worker count") {
    for (int threads : {1, 2, 3, 8, 100}) {
        CAPTURE(threads);
        const std::size_t n = 97;
        std::vector<std::atomic<int>> visits(n);
        parallel_for(n, threads, [&](std::size_t i) { visits[i].fetch_add(1); });
        for (std::size_t i = 0; i < n; ++i) REQUIRE(visits[i].load() == 1);
    }
    parallel_for(0, 4, [&](std::size_t) { FAIL("must not be called"); });
}

TEST_CASE("parallel_for rethrows a task exception") {
    CHECK_THROWS_WITH_AS(
        parallel_for(16, 4,
                     [&](std::size_t i) {
                         if (i == 9) throw std::runtime_error("task 9 exploded");
                     }),
        doctest::Contains("exploded"), std::runtime_error);
}

TEST_CASE("slot-writing results are independent of the worker count") {
    const std::size_t n = 301;
    auto run = [&](int threads) {
        std::vector<std::uint64_t> out(n);
        parallel_for(n, threads, [&](std::size_t i) {
            out[i] = Rng::keyed(5, "slot", static_cast<std::uint64_t>(i)).next_u64();
        });
        return out;
    };
    const auto base = run(1);
    CHECK(run(2) == base);
    CHECK(run(7) == base);
    CHECK(run(64) == base);
}
