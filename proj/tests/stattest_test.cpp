#include <catch2/catch.hpp>

#include <cmath>

#include <fissionlab/samplers.hpp>
#include <fissionlab/stattest.hpp>

#include "test_support.hpp"

using namespace fissionlab;

TEST_CASE("t_test basics and the closed-form oracle") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{2.0, 3.0, 4.0, 5.0};

    const TestReport same = t_test(x, x);
    REQUIRE(same.statistic == 0.0);
    REQUIRE(same.p_value == Approx(1.0));

    // Direct evaluation of the pooled formula.
    const TestReport rep = t_test(x, y, TVariant::Pooled);
    const double sp2 = (3.0 * variance_of(x) + 3.0 * variance_of(y)) / 6.0;
    const double expected_stat = (2.5 - 3.5) / std::sqrt(sp2 * 0.5);
    REQUIRE(rep.statistic == Approx(expected_stat).epsilon(1e-10));
    REQUIRE(rep.df == Approx(6.0));
    const double expected_p = 2.0 * student_t_cdf(-std::abs(expected_stat), 6.0);
    REQUIRE(rep.p_value == Approx(expected_p).epsilon(1e-10));

    REQUIRE_THROWS_AS(t_test(std::vector<double>{1.0}, y), InsufficientDataError);
    const std::vector<double> c1(5, 2.0);
    REQUIRE_THROWS_AS(t_test(c1, c1), ZeroVarianceError);
    const std::vector<double> c2(5, 3.0);
    const TestReport inf_rep = t_test(c2, c1);
    REQUIRE(inf_rep.p_value == 0.0);
}

TEST_CASE("pooled t with equal sizes matches the shared-variance form") {
    // With n1 = n2 = n/2 the pooled statistic denominator is sqrt(4 s^2 / n).
    const std::vector<double> x{0.3, -1.2, 0.7, 1.9, -0.4};
    const std::vector<double> y{1.1, 0.2, -0.8, 2.2, 0.5};
    const TestReport rep = t_test(x, y, TVariant::Pooled);
    const double s2 = (variance_of(x) + variance_of(y)) / 2.0;
    const double denom = std::sqrt(4.0 * s2 / 10.0);
    REQUIRE(rep.statistic == Approx((mean_of(x) - mean_of(y)) / denom).epsilon(1e-12));
}

TEST_CASE("welch t handles unequal variances") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    const std::vector<double> y{10.0, 30.0, 20.0, 40.0, 0.0};
    const TestReport rep = t_test(x, y, TVariant::Welch);
    const double a = variance_of(x) / 5.0, b = variance_of(y) / 5.0;
    REQUIRE(rep.statistic == Approx((mean_of(x) - mean_of(y)) / std::sqrt(a + b)));
    const double df = (a + b) * (a + b) / (a * a / 4.0 + b * b / 4.0);
    REQUIRE(rep.df == Approx(df));
}

TEST_CASE("t_test null rejection rate is calibrated") {
    Rng rng(Seed{51});
    std::size_t rejects = 0;
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> x(20), y(20);
        for (auto& v : x) v = normal_draw(rng);
        for (auto& v : y) v = normal_draw(rng);
        if (t_test(x, y).p_value <= 0.05) ++rejects;
    }
    const double rate = static_cast<double>(rejects) / reps;
    CHECK(rate > 0.037);
    CHECK(rate < 0.063);
}

TEST_CASE("wilcoxon against exhaustive enumeration at n1=n2=4") {
    // 20 fixed continuous datasets; exact two-sided p from all C(8,4) splits.
    Rng rng(Seed{53});
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(4), y(4);
        for (auto& v : x) v = normal_draw(rng);
        for (auto& v : y) v = normal_draw(rng) + 0.4;
        const double exact = testsupport::wilcoxon_exact_p(x, y);
        const double approx = wilcoxon_rank_sum(x, y).p_value;
        INFO("rep=" << rep << " exact=" << exact << " approx=" << approx);
        CHECK(std::abs(approx - exact) <= 0.02);
    }
}

TEST_CASE("wilcoxon stays close to exact enumeration under heavy ties") {
    // Tie-heavy integer samples put the rank sum on an irregular lattice, so
    // the fixed continuity correction is only approximate; at n1=n2=9 the
    // approximation still tracks the inclusive exact p closely.
    Rng rng(Seed{54});
    for (int rep = 0; rep < 8; ++rep) {
        std::vector<double> x(9), y(9);
        for (auto& v : x) v = std::floor(5.0 * rng.next_double());
        for (auto& v : y) v = std::floor(5.0 * rng.next_double() + 0.6);
        const double exact = testsupport::wilcoxon_exact_p(x, y);
        const double approx = wilcoxon_rank_sum(x, y).p_value;
        INFO("rep=" << rep << " exact=" << exact << " approx=" << approx);
        CHECK(std::abs(approx - exact) <= 0.05);
    }
}

TEST_CASE("wilcoxon handles total ties and gross separation") {
    const std::vector<double> c(6, 1.0);
    const TestReport tied = wilcoxon_rank_sum(c, c);
    REQUIRE(tied.statistic == 0.0);
    REQUIRE(tied.p_value == 1.0);

    const std::vector<double> lo = sample_nb(5.0, 5.0, 50, Seed{59});
    const std::vector<double> hi = sample_nb(60.0, 40.0, 50, Seed{61});
    REQUIRE(wilcoxon_rank_sum(lo, hi).p_value < 1e-6);

    REQUIRE_THROWS_AS(wilcoxon_rank_sum(std::vector<double>{}, c),
                      InsufficientDataError);
}

TEST_CASE("wilcoxon is invariant under monotone transforms") {
    Rng rng(Seed{67});
    std::vector<double> x(30), y(25);
    for (auto& v : x) v = normal_draw(rng);
    for (auto& v : y) v = normal_draw(rng) + 0.3;
    const double p = wilcoxon_rank_sum(x, y).p_value;
    auto transform = [](std::vector<double> v) {
        for (auto& e : v) e = std::exp(3.0 * e) + 1.0;
        return v;
    };
    const double p2 = wilcoxon_rank_sum(transform(x), transform(y)).p_value;
    REQUIRE(p == Approx(p2).epsilon(1e-12));
}

TEST_CASE("adjusted rand index: exact cases and the pair-counting oracle") {
    const std::vector<int> a{1, 1, 2, 2};
    REQUIRE(adjusted_rand_index(a, a) == Approx(1.0));

    const std::vector<int> swapped{2, 2, 1, 1};
    REQUIRE(adjusted_rand_index(a, swapped) == Approx(1.0));

    const std::vector<int> b{1, 2, 1, 2};
    REQUIRE(adjusted_rand_index(a, b) == Approx(-0.5));
    REQUIRE(testsupport::ari_pair_counting(a, b) == Approx(-0.5));

    REQUIRE_THROWS_AS(adjusted_rand_index(a, std::vector<int>{1, 2}),
                      LengthMismatchError);
}

TEST_CASE("adjusted rand index matches pair counting on random labelings") {
    Rng rng(Seed{71});
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 20 + static_cast<std::size_t>(rng.next_double() * 60);
        std::vector<int> a(n), b(n);
        const int ka = 2 + static_cast<int>(rng.next_double() * 4);
        const int kb = 2 + static_cast<int>(rng.next_double() * 4);
        for (auto& v : a) v = 1 + static_cast<int>(rng.next_double() * ka);
        for (auto& v : b) v = 1 + static_cast<int>(rng.next_double() * kb);
        const double lib = adjusted_rand_index(a, b);
        const double oracle = testsupport::ari_pair_counting(a, b);
        REQUIRE(lib == Approx(oracle).margin(1e-12));
        // Symmetry and permutation invariance.
        REQUIRE(adjusted_rand_index(b, a) == Approx(lib).margin(1e-12));
        std::vector<int> renamed = a;
        for (auto& v : renamed) v = -v + 100;
        REQUIRE(adjusted_rand_index(renamed, b) == Approx(lib).margin(1e-12));
    }
}

TEST_CASE("rejection_rate counts p <= alpha") {
    REQUIRE(rejection_rate(std::vector<double>{0.01, 0.99}, 0.05) == Approx(0.5));
    REQUIRE(rejection_rate(std::vector<double>{0.0, 0.0}, 0.05) == Approx(1.0));
    REQUIRE(rejection_rate(std::vector<double>{0.05}, 0.05) == Approx(1.0));

    Rng rng(Seed{73});
    std::vector<double> unif(10000);
    for (auto& v : unif) v = rng.next_double();
    const double rate = rejection_rate(unif, 0.05);
    CHECK(rate > 0.037);
    CHECK(rate < 0.063);

    REQUIRE_THROWS_AS(rejection_rate(std::vector<double>{1.2}, 0.05), RangeError);
    REQUIRE_THROWS_AS(rejection_rate(unif, -0.1), RangeError);
}

TEST_CASE("qq_uniform produces plot-ready pairs") {
    const auto pairs = qq_uniform(std::vector<double>{0.75, 0.25});
    REQUIRE(pairs.size() == 2);
    REQUIRE(pairs[0].first == Approx(0.25));
    REQUIRE(pairs[0].second == Approx(0.25));
    REQUIRE(pairs[1].first == Approx(0.75));
    REQUIRE(pairs[1].second == Approx(0.75));

    // A perfectly uniform grid deviates by exactly 0.5/m.
    const std::size_t m = 100;
    std::vector<double> grid(m);
    for (std::size_t i = 0; i < m; ++i)
        grid[i] = static_cast<double>(i + 1) / static_cast<double>(m);
    double max_dev = 0.0;
    for (const auto& [e, o] : qq_uniform(grid)) max_dev = std::max(max_dev, std::abs(o - e));
    REQUIRE(max_dev == Approx(0.5 / static_cast<double>(m)));

    Rng rng(Seed{79});
    std::vector<double> unif(10000);
    for (auto& v : unif) v = rng.next_double();
    CHECK(ks_uniform_distance(unif) < 1.63 / std::sqrt(10000.0));
}

TEST_CASE("t_test p-values are uniform under an exchangeable null") {
    Rng rng(Seed{83});
    std::vector<double> pvals(10000);
    for (auto& p : pvals) {
        std::vector<double> x(15), y(15);
        for (auto& v : x) v = normal_draw(rng);
        for (auto& v : y) v = normal_draw(rng);
        p = t_test(x, y).p_value;
    }
    CHECK(ks_uniform_distance(pvals) < 1.63 / std::sqrt(10000.0));
}
