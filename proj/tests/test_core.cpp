#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>

#include "quxai/matrix.hpp"
#include "quxai/parallel.hpp"
#include "quxai/rng.hpp"

using namespace quxai;

TEST_CASE("matrix: construction, access, columns") {
    Matrix m{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 2);
    CHECK(m(2, 1) == 6.0);
    CHECK(m.column(0) == std::vector<double>{1.0, 3.0, 5.0});

    m.set_column(1, std::vector<double>{9.0, 9.0, 9.0});
    CHECK(m(0, 1) == 9.0);

    CHECK_THROWS_AS((void)Matrix::from_rows({{1.0}, {1.0, 2.0}}), Error);
}

TEST_CASE("cholesky solve recovers a known SPD system") {
    // A = L L^T with L = [[2,0],[1,3]] -> A = [[4,2],[2,10]].
    Matrix a{{4.0, 2.0}, {2.0, 10.0}};
    // b = A * [1, -2]^T = [0, -18]^T
    Matrix b(2, 1);
    b(0, 0) = 0.0;
    b(1, 0) = -18.0;
    const Matrix x = solve_spd(a, b);
    CHECK(x(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x(1, 0) == doctest::Approx(-2.0).epsilon(1e-12));

    Matrix not_spd{{1.0, 2.0}, {2.0, 1.0}}; // eigenvalues 3, -1
    CHECK_THROWS_AS((void)solve_spd(not_spd, b), Error);
}

TEST_CASE("rng: identical seeds give identical streams, distinct seeds diverge") {
    Rng a(42), b(42), c(43);
    bool all_equal_ab = true, any_diff_ac = false;
    for (int i = 0; i < 100; ++i) {
        const double ua = a.uniform();
        if (ua != b.uniform()) all_equal_ab = false;
        if (ua != c.uniform()) any_diff_ac = true;
    }
    CHECK(all_equal_ab);
    CHECK(any_diff_ac);
}

TEST_CASE("rng: uniform_int stays in range and hits every value") {
    Rng rng(7);
    std::vector<int> counts(6, 0);
    for (int i = 0; i < 6000; ++i) {
        const std::uint64_t v = rng.uniform_int(6);
        REQUIRE(v < 6);
        counts[static_cast<std::size_t>(v)]++;
    }
    for (int c : counts) CHECK(c > 800);
}

TEST_CASE("rng: normal draws have roughly standard moments") {
    Rng rng(11);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.03);
    CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("rng: permutation is a permutation") {
    Rng rng(3);
    auto p = rng.permutation(50);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < 50; ++i) CHECK(p[i] == i);
}

TEST_CASE("mix_seed: distinct stream indices give distinct substreams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(mix_seed(123, i));
    CHECK(seen.size() == 1000);
    CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
}

TEST_CASE("parallel_for covers every index exactly once and respects the cap") {
    std::vector<std::atomic<int>> hits(500);
    set_max_threads(7);
    parallel_for(500, [&](std::size_t i) { hits[i].fetch_add(1); });
    set_max_threads(0);
    for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("parallel_for propagates the first worker exception") {
    set_max_threads(4);
    CHECK_THROWS_AS(
        parallel_for(64, [](std::size_t i) { if (i == 13) fail_compute("boom"); }), Error);
    set_max_threads(0);
}
