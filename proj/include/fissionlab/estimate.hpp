#ifndef FISSIONLAB_ESTIMATE_HPP
#define FISSIONLAB_ESTIMATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fissionlab/errors.hpp"
#include "fissionlab/matrix.hpp"
#include "fissionlab/special.hpp"

namespace fissionlab {

// Finite sentinel for the Poisson limit; keeps downstream beta-binomial
// parameters finite.
inline constexpr double THETA_CAP = 1e6;

enum class CovDenominator { N, NMinusOne };

inline CovMatrix empirical_cov(const Matrix& x,
                               CovDenominator denom = CovDenominator::NMinusOne) {
    const std::size_t n = x.rows(), p = x.cols();
    if (n < 2) throw InsufficientDataError("empirical_cov needs n >= 2");
    std::vector<double> mean(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    Matrix c(p, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            const double dj = x(i, j) - mean[j];
            for (std::size_t k = j; k < p; ++k)
                c(j, k) += dj * (x(i, k) - mean[k]);
        }
    const double d =
        static_cast<double>(denom == CovDenominator::NMinusOne ? n - 1 : n);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = j; k < p; ++k) {
            c(j, k) /= d;
            c(k, j) = c(j, k);
        }
    return CovMatrix(std::move(c));
}

struct NBFit {
    double mu_hat = 0.0;
    double theta_hat = THETA_CAP;
    double loglik = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

namespace detail {

// Count histogram; NB log-likelihood in theta only touches distinct values.
struct CountHist {
    std::vector<std::pair<long long, double>> bins; // (value, count)
    double n = 0.0;
    double mean = 0.0;
    double var = 0.0; // denominator n-1
};

inline CountHist make_count_hist(std::span<const double> x) {
    CountHist h;
    std::map<long long, double> m;
    double sum = 0.0, sum2 = 0.0;
    for (double v : x) {
        if (v < 0.0 || v != std::floor(v))
            throw DegenerateDataError("nb_mle expects nonnegative integer counts");
        m[static_cast<long long>(v)] += 1.0;
        sum += v;
        sum2 += v * v;
    }
    h.n = static_cast<double>(x.size());
    h.mean = sum / h.n;
    h.var = (h.n > 1.0) ? (sum2 - h.n * h.mean * h.mean) / (h.n - 1.0) : 0.0;
    h.bins.assign(m.begin(), m.end());
    return h;
}

inline double nb_profile_loglik(const CountHist& h, double theta) {
    const double mu = h.mean;
    double ll = h.n * (theta * std::log(theta / (theta + mu)) - log_gamma(theta)) +
                h.n * h.mean * std::log(mu / (theta + mu));
    for (const auto& [v, c] : h.bins)
        ll += c * (log_gamma(static_cast<double>(v) + theta) -
                   log_gamma(static_cast<double>(v) + 1.0));
    return ll;
}

} // namespace detail

// Profile maximum likelihood for NB(mu, theta): mu_hat is the sample mean
// (exact profile MLE) and theta_hat maximizes the profile log-likelihood by
// golden-section search on log(theta) in [log 1e-3, log THETA_CAP] with
// tolerance 1e-8. Underdispersed input (sample variance <= mean) returns the
// THETA_CAP sentinel with converged = false instead of failing.
inline NBFit nb_mle(std::span<const double> x) {
    if (x.size() < 2) throw InsufficientDataError("nb_mle needs at least 2 counts");
    const detail::CountHist h = detail::make_count_hist(x);
    NBFit fit;
    fit.mu_hat = h.mean;
    if (h.mean <= 0.0)
        throw DegenerateDataError("nb_mle: all counts are zero, mu_hat degenerate");
    if (h.var <= h.mean) {
        fit.theta_hat = THETA_CAP;
        fit.loglik = detail::nb_profile_loglik(h, THETA_CAP);
        fit.converged = false;
        return fit;
    }

    constexpr double GOLD = 0.6180339887498949; // (sqrt(5)-1)/2
    double lo = std::log(1e-3), hi = std::log(THETA_CAP);
    double m1 = hi - GOLD * (hi - lo);
    double m2 = lo + GOLD * (hi - lo);
    double f1 = detail::nb_profile_loglik(h, std::exp(m1));
    double f2 = detail::nb_profile_loglik(h, std::exp(m2));
    std::size_t it = 0;
    while (hi - lo > 1e-8) {
        if (f1 < f2) {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + GOLD * (hi - lo);
            f2 = detail::nb_profile_loglik(h, std::exp(m2));
        } else {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - GOLD * (hi - lo);
            f1 = detail::nb_profile_loglik(h, std::exp(m1));
        }
        ++it;
    }
    const double log_theta = 0.5 * (lo + hi);
    fit.theta_hat = std::exp(log_theta);
    fit.iterations = it;
    const bool at_upper = log_theta > std::log(THETA_CAP) - 1e-6;
    const bool at_lower = log_theta < std::log(1e-3) + 1e-6;
    if (at_upper) fit.theta_hat = THETA_CAP;
    fit.converged = !at_upper && !at_lower;
    fit.loglik = detail::nb_profile_loglik(h, fit.theta_hat);
    return fit;
}

namespace detail {

inline std::vector<std::vector<std::size_t>> rows_by_label(
    const std::vector<int>& labels, std::size_t n) {
    if (labels.size() != n)
        throw LengthMismatchError("labels length does not match row count");
    int max_label = 0;
    for (int l : labels) {
        if (l < 1) throw LabelError("labels must be >= 1");
        max_label = std::max(max_label, l);
    }
    std::vector<std::vector<std::size_t>> idx(static_cast<std::size_t>(max_label));
    for (std::size_t i = 0; i < n; ++i)
        idx[static_cast<std::size_t>(labels[i] - 1)].push_back(i);
    for (std::size_t g = 0; g < idx.size(); ++g)
        if (idx[g].size() < 2)
            throw InsufficientDataError("label class " + std::to_string(g + 1) +
                                        " has fewer than 2 members");
    return idx;
}

inline Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < x.cols(); ++j) out(r, j) = x(rows[r], j);
    return out;
}

} // namespace detail

// Empirical covariance within each label class.
inline std::vector<CovMatrix> per_component_cov(
    const Matrix& x, const std::vector<int>& labels,
    CovDenominator denom = CovDenominator::NMinusOne) {
    const auto idx = detail::rows_by_label(labels, x.rows());
    std::vector<CovMatrix> out;
    out.reserve(idx.size());
    for (const auto& rows : idx)
        out.push_back(empirical_cov(detail::take_rows(x, rows), denom));
    return out;
}

// NB profile MLE within each label class, per variable.
inline std::vector<std::vector<NBFit>> per_component_nb_mle(
    const Matrix& x, const std::vector<int>& labels) {
    const auto idx = detail::rows_by_label(labels, x.rows());
    std::vector<std::vector<NBFit>> out;
    out.reserve(idx.size());
    for (const auto& rows : idx) {
        std::vector<NBFit> fits;
        fits.reserve(x.cols());
        for (std::size_t j = 0; j < x.cols(); ++j) {
            std::vector<double> col(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) col[r] = x(rows[r], j);
            fits.push_back(nb_mle(col));
        }
        out.push_back(std::move(fits));
    }
    return out;
}

} // namespace fissionlab

#endif
