#ifndef FISSIONLAB_TEST_SUPPORT_HPP
#define FISSIONLAB_TEST_SUPPORT_HPP

// Independent oracles used by the tests. These deliberately take different
// numerical routes from the library (std::lgamma / std::erfc, pair counting,
// fixed-step quadrature, exhaustive enumeration) so that agreement is
// meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include <fissionlab/matrix.hpp>
#include <fissionlab/rng.hpp>
#include <fissionlab/special.hpp>

namespace testsupport {

// Standard error of the empirical covariance between paired samples,
// estimated from the fourth moments of the observed products.
inline double cov_entry_se(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const double ma = fissionlab::mean_of(a), mb = fissionlab::mean_of(b);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double prod = (a[i] - ma) * (b[i] - mb);
        m1 += prod;
        m2 += prod * prod;
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    return std::sqrt(std::max(0.0, m2 - m1 * m1) / static_cast<double>(n));
}

inline std::vector<double> matrix_col(const fissionlab::Matrix& m, std::size_t j) {
    return m.col(j);
}

// Two-sided exact Wilcoxon rank-sum p-value by enumerating every split of the
// pooled sample (feasible for small n1+n2). Mid-ranks, like the statistic.
inline double wilcoxon_exact_p(std::span<const double> x, std::span<const double> y) {
    const std::size_t n1 = x.size(), n = x.size() + y.size();
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    // Mid-rank of each pooled value.
    auto rank_of = [&](double v) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v);
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), v);
        const double first = static_cast<double>(lo - sorted.begin()) + 1.0;
        const double last = static_cast<double>(hi - sorted.begin());
        return 0.5 * (first + last);
    };
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n; ++i) ranks[i] = rank_of(pooled[i]);

    double w_obs = 0.0;
    for (std::size_t i = 0; i < n1; ++i) w_obs += ranks[i];
    const double mean = static_cast<double>(n1) * static_cast<double>(n + 1) / 2.0;

    std::vector<std::size_t> pick(n1);
    std::iota(pick.begin(), pick.end(), 0);
    std::size_t total = 0, extreme = 0;
    for (;;) {
        double w = 0.0;
        for (std::size_t i : pick) w += ranks[i];
        ++total;
        if (std::abs(w - mean) >= std::abs(w_obs - mean) - 1e-12) ++extreme;
        // next combination
        std::size_t i = n1;
        while (i > 0) {
            --i;
            if (pick[i] != i + n - n1) break;
        }
        if (pick[i] == i + n - n1) break;
        ++pick[i];
        for (std::size_t j = i + 1; j < n1; ++j) pick[j] = pick[j - 1] + 1;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

// ARI via pair counting: a genuinely different route from the
// contingency-table formula.
inline double ari_pair_counting(std::span<const int> u, std::span<const int> v) {
    const std::size_t n = u.size();
    double a = 0, b = 0, c = 0, d = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool su = u[i] == u[j], sv = v[i] == v[j];
            if (su && sv) ++a;
            else if (su && !sv) ++b;
            else if (!su && sv) ++c;
            else ++d;
        }
    const double denom = (a + b) * (b + d) + (a + c) * (c + d);
    if (denom == 0.0) return 1.0;
    return 2.0 * (a * d - b * c) / denom;
}

// NB profile log-likelihood evaluated directly (std::lgamma), for grid-search
// maximization independent of the library's optimizer and Lanczos lgamma.
inline double nb_loglik_direct(std::span<const double> x, double theta) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ll = n * (theta * std::log(theta / (theta + mean)) - std::lgamma(theta)) +
                n * mean * std::log(mean / (theta + mean));
    for (double v : x) ll += std::lgamma(v + theta) - std::lgamma(v + 1.0);
    return ll;
}

struct GridMax {
    double theta = 0.0;
    bool at_boundary = false;
};

// Dense-grid maximizer of the same profile likelihood, evaluated from a value
// histogram with std::lgamma.
inline GridMax nb_grid_search(std::span<const double> x, double lo = 0.1,
                              double hi = 100.0, double step = 0.01) {
    std::map<long long, double> hist;
    double mean = 0.0;
    for (double v : x) {
        hist[static_cast<long long>(v)] += 1.0;
        mean += v;
    }
    const double n = static_cast<double>(x.size());
    mean /= n;
    auto loglik = [&](double theta) {
        double ll = n * (theta * std::log(theta / (theta + mean)) - std::lgamma(theta)) +
                    n * mean * std::log(mean / (theta + mean));
        for (const auto& [v, c] : hist)
            ll += c * (std::lgamma(static_cast<double>(v) + theta) -
                       std::lgamma(static_cast<double>(v) + 1.0));
        return ll;
    };
    GridMax best;
    double best_ll = -std::numeric_limits<double>::infinity();
    const std::size_t m = static_cast<std::size_t>((hi - lo) / step) + 1;
    for (std::size_t i = 0; i < m; ++i) {
        const double theta = lo + static_cast<double>(i) * step;
        const double ll = loglik(theta);
        if (ll > best_ll) {
            best_ll = ll;
            best.theta = theta;
        }
    }
    best.at_boundary = best.theta >= hi - step || best.theta <= lo + step;
    return best;
}

// Noncentral-t CDF by fixed-step composite Simpson over the chi-square
// variable v: P(T <= x) = E_V[Phi(x sqrt(V/df) - delta)]. Uses std::erfc and
// std::lgamma; independent of the library's adaptive route over s.
inline double nct_cdf_bruteforce(double x, double df, double delta,
                                 std::size_t steps = 2000000) {
    const double v_hi = df + 120.0 + 14.0 * std::sqrt(2.0 * df);
    const double lo = 1e-12;
    const double h = (v_hi - lo) / static_cast<double>(steps);
    const double log_norm = -0.5 * df * std::log(2.0) - std::lgamma(0.5 * df);
    auto f = [&](double v) {
        const double logpdf = log_norm + (0.5 * df - 1.0) * std::log(v) - 0.5 * v;
        const double z = x * std::sqrt(v / df) - delta;
        return std::exp(logpdf) * 0.5 * std::erfc(-z * M_SQRT1_2);
    };
    double sum = f(lo) + f(v_hi);
    for (std::size_t i = 1; i < steps; ++i) {
        const double v = lo + static_cast<double>(i) * h;
        sum += f(v) * (i % 2 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

// Chi-square goodness-of-fit p-value for observed counts vs expected
// probabilities, pooling the tail so every expected count is >= 5.
inline double chi_square_gof_p(const std::vector<double>& observed,
                               const std::vector<double>& expected_prob,
                               double total) {
    std::vector<double> obs, exp;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o_acc += observed[i];
        e_acc += expected_prob[i] * total;
        if (e_acc >= 5.0) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 && !exp.empty()) {
        obs.back() += o_acc;
        exp.back() += e_acc;
    }
    if (exp.size() < 2) return 1.0;
    double stat = 0.0;
    for (std::size_t i = 0; i < exp.size(); ++i) {
        const double d = obs[i] - exp[i];
        stat += d * d / exp[i];
    }
    return fissionlab::chi_square_sf(stat, static_cast<double>(exp.size() - 1));
}

} // namespace testsupport

#endif
