#ifndef FISSIONLAB_STATTEST_HPP
#define FISSIONLAB_STATTEST_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fissionlab/errors.hpp"
#include "fissionlab/matrix.hpp"
#include "fissionlab/special.hpp"

namespace fissionlab {

enum class TestMethod { TPooled, TWelch, WilcoxonNormalApprox };
enum class TVariant { Pooled, Welch };

struct TestReport {
    double statistic = 0.0;
    double p_value = 1.0;
    TestMethod method = TestMethod::TPooled;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    double df = std::numeric_limits<double>::quiet_NaN();
};

// Two-sided two-sample t-test. Pooled: common-variance statistic with
// df = n1+n2-2 (with n1 == n2 this is the equal-size form exactly).
// Welch: Satterthwaite degrees of freedom.
inline TestReport t_test(std::span<const double> x, std::span<const double> y,
                         TVariant variant = TVariant::Pooled) {
    const std::size_t n1 = x.size(), n2 = y.size();
    if (n1 < 2 || n2 < 2)
        throw InsufficientDataError("t_test needs at least 2 observations per group");
    const double m1 = mean_of(x), m2 = mean_of(y);
    const double v1 = variance_of(x), v2 = variance_of(y);
    const double diff = m1 - m2;

    TestReport rep;
    rep.n1 = n1;
    rep.n2 = n2;
    double se;
    if (variant == TVariant::Pooled) {
        rep.method = TestMethod::TPooled;
        const double sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) /
                           static_cast<double>(n1 + n2 - 2);
        se = std::sqrt(sp2 * (1.0 / n1 + 1.0 / n2));
        rep.df = static_cast<double>(n1 + n2 - 2);
    } else {
        rep.method = TestMethod::TWelch;
        const double a = v1 / static_cast<double>(n1);
        const double b = v2 / static_cast<double>(n2);
        se = std::sqrt(a + b);
        if (a + b > 0.0)
            rep.df = (a + b) * (a + b) /
                     (a * a / static_cast<double>(n1 - 1) +
                      b * b / static_cast<double>(n2 - 1));
        else
            rep.df = static_cast<double>(n1 + n2 - 2);
    }

    if (se == 0.0) {
        if (diff == 0.0)
            throw ZeroVarianceError("t_test: both samples constant and equal");
        rep.statistic = diff > 0.0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
        rep.p_value = 0.0;
        return rep;
    }
    rep.statistic = diff / se;
    rep.p_value = 2.0 * student_t_cdf(-std::abs(rep.statistic), rep.df);
    if (rep.p_value > 1.0) rep.p_value = 1.0;
    return rep;
}

// Wilcoxon rank-sum with mid-ranks, continuity correction and a two-sided
// normal approximation. The variance and fourth moment of the rank sum under
// the permutation null are computed exactly from the mid-rank population
// (which also yields the usual tie-corrected variance), and an Edgeworth
// kurtosis term sharpens the tail at small sample sizes.
inline TestReport wilcoxon_rank_sum(std::span<const double> x,
                                    std::span<const double> y) {
    const std::size_t n1 = x.size(), n2 = y.size();
    if (n1 < 1 || n2 < 1)
        throw InsufficientDataError("wilcoxon_rank_sum needs nonempty samples");
    const std::size_t n = n1 + n2;

    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n);
    for (double v : x) pooled.emplace_back(v, 0);
    for (double v : y) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double rank_sum_x = 0.0;
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j); // avg of i+1..j
        for (std::size_t k = i; k < j; ++k) {
            ranks[k] = mid_rank;
            if (pooled[k].second == 0) rank_sum_x += mid_rank;
        }
        i = j;
    }

    TestReport rep;
    rep.method = TestMethod::WilcoxonNormalApprox;
    rep.n1 = n1;
    rep.n2 = n2;

    // Centered power sums of the mid-rank population.
    const double nd = static_cast<double>(n);
    const double rbar = (nd + 1.0) / 2.0;
    double s2 = 0.0, s4 = 0.0;
    for (double r : ranks) {
        const double d = r - rbar;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    // Factorial sampling probabilities of drawing r marked slots.
    const double m = static_cast<double>(n1);
    const double p1 = m / nd;
    const double p2 = (n1 >= 2) ? p1 * (m - 1.0) / (nd - 1.0) : 0.0;
    const double p3 = (n1 >= 3) ? p2 * (m - 2.0) / (nd - 2.0) : 0.0;
    const double p4 = (n1 >= 4) ? p3 * (m - 3.0) / (nd - 3.0) : 0.0;

    const double var = (p1 - p2) * s2; // equals the tie-corrected variance
    if (var <= 0.0) {
        rep.statistic = 0.0;
        rep.p_value = 1.0;
        return rep;
    }
    // Fourth central moment of the rank sum under sampling without
    // replacement (the mid-rank population is symmetric, so odd terms drop).
    const double mu4 = p1 * s4 - 4.0 * p2 * s4 + 3.0 * p2 * (s2 * s2 - s4) +
                       6.0 * p3 * (2.0 * s4 - s2 * s2) +
                       p4 * (3.0 * s2 * s2 - 6.0 * s4);
    const double excess_kurtosis = mu4 / (var * var) - 3.0;

    const double dev = rank_sum_x - p1 * (nd * rbar);
    const double cc = 0.5; // continuity correction
    const double z = (std::abs(dev) <= cc) ? 0.0 : (std::abs(dev) - cc) / std::sqrt(var);
    rep.statistic = (dev < 0.0) ? -z : z;
    const double lower_tail = normal_cdf(-z) - excess_kurtosis / 24.0 *
                                                   ((-z) * (-z) * (-z) + 3.0 * z) *
                                                   normal_pdf(z);
    rep.p_value = std::clamp(2.0 * lower_tail, 0.0, 1.0);
    return rep;
}

// Chance-corrected agreement between two partitions (contingency-table form).
// Label values are opaque; the result is invariant to renaming clusters.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size())
        throw LengthMismatchError("adjusted_rand_index needs equal-length labels");
    const std::size_t n = a.size();
    if (n < 2) throw LengthMismatchError("adjusted_rand_index needs n >= 2");

    std::map<int, std::size_t> ia, ib;
    for (int v : a) ia.emplace(v, ia.size());
    for (int v : b) ib.emplace(v, ib.size());
    const std::size_t ka = ia.size(), kb = ib.size();
    std::vector<double> cnt(ka * kb, 0.0), ra(ka, 0.0), cb(kb, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = ia[a[i]], c = ib[b[i]];
        cnt[r * kb + c] += 1.0;
        ra[r] += 1.0;
        cb[c] += 1.0;
    }
    auto comb2 = [](double m) { return 0.5 * m * (m - 1.0); };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (double v : cnt) sum_ij += comb2(v);
    for (double v : ra) sum_a += comb2(v);
    for (double v : cb) sum_b += comb2(v);
    const double total = comb2(static_cast<double>(n));
    const double expected = sum_a * sum_b / total;
    const double denom = 0.5 * (sum_a + sum_b) - expected;
    if (denom == 0.0) return 1.0; // both partitions trivial
    return (sum_ij - expected) / denom;
}

// Fraction of p-values at or below alpha (rejection at p <= alpha).
inline double rejection_rate(std::span<const double> p_values, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw RangeError("rejection_rate requires alpha in [0,1]");
    if (p_values.empty()) throw RangeError("rejection_rate needs p-values");
    std::size_t hits = 0;
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0))
            throw RangeError("rejection_rate: p-value outside [0,1]");
        if (p <= alpha) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(p_values.size());
}

// Plot-ready uniform QQ pairs: expected_i = (i - 0.5)/m against sorted p.
inline std::vector<std::pair<double, double>> qq_uniform(
    std::span<const double> p_values) {
    std::vector<double> sorted(p_values.begin(), p_values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(sorted.size());
    const double m = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        out.emplace_back((static_cast<double>(i) + 0.5) / m, sorted[i]);
    return out;
}

// Kolmogorov-Smirnov distance of a sample against Uniform(0,1).
inline double ks_uniform_distance(std::span<const double> p_values) {
    std::vector<double> sorted(p_values.begin(), p_values.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        d = std::max(d, std::abs(static_cast<double>(i + 1) / m - sorted[i]));
        d = std::max(d, std::abs(sorted[i] - static_cast<double>(i) / m));
    }
    return d;
}

} // namespace fissionlab

#endif
