#ifndef FISSIONLAB_SAMPLERS_HPP
#define FISSIONLAB_SAMPLERS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fissionlab/errors.hpp"
#include "fissionlab/matrix.hpp"
#include "fissionlab/rng.hpp"
#include "fissionlab/special.hpp"

namespace fissionlab {

enum class Family { Gaussian, NegBin };

struct GaussianComponent {
    std::vector<double> mean;
    CovMatrix cov;
};

// Per-variable mean and overdispersion; Var = mu + mu^2/theta per variable.
struct NBComponent {
    std::vector<double> mu;
    std::vector<double> theta;
};

struct MixtureSpec {
    Family family = Family::Gaussian;
    std::vector<double> weights;
    std::vector<GaussianComponent> gaussian;
    std::vector<NBComponent> negbin;

    std::size_t n_components() const { return weights.size(); }
    std::size_t dim() const {
        if (family == Family::Gaussian)
            return gaussian.empty() ? 0 : gaussian.front().mean.size();
        return negbin.empty() ? 0 : negbin.front().mu.size();
    }

    void validate() const {
        const std::size_t g = n_components();
        if (g < 1) throw ParameterError("mixture needs at least one component");
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw ParameterError("mixture weights must be nonnegative");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw ParameterError("mixture weights must sum to 1");
        const std::size_t p = dim();
        if (p == 0) throw ParameterError("mixture components must have dimension >= 1");
        if (family == Family::Gaussian) {
            if (gaussian.size() != g)
                throw ParameterError("weights and Gaussian components differ in count");
            for (const auto& c : gaussian) {
                if (c.mean.size() != p || c.cov.dim() != p)
                    throw DimMismatchError("Gaussian components must share dimension");
            }
        } else {
            if (negbin.size() != g)
                throw ParameterError("weights and NB components differ in count");
            for (const auto& c : negbin) {
                if (c.mu.size() != p || c.theta.size() != p)
                    throw DimMismatchError("NB components must share dimension");
                for (double m : c.mu)
                    if (!(m > 0.0)) throw ParameterError("NB mu must be positive");
                for (double t : c.theta)
                    if (!(t > 0.0)) throw ParameterError("NB theta must be positive");
            }
        }
    }

    // pi-weighted component mean (Gaussian only).
    std::vector<double> mean_of_component_means() const {
        const std::size_t p = dim();
        std::vector<double> out(p, 0.0);
        for (std::size_t g = 0; g < n_components(); ++g)
            for (std::size_t j = 0; j < p; ++j)
                out[j] += weights[g] * gaussian[g].mean[j];
        return out;
    }

    // Between-component covariance sum_g pi_g (mu_g - mu_bar)(mu_g - mu_bar)^T.
    CovMatrix between_component_cov() const {
        const std::size_t p = dim();
        const std::vector<double> mbar = mean_of_component_means();
        Matrix m(p, p);
        for (std::size_t g = 0; g < n_components(); ++g)
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t k = 0; k < p; ++k)
                    m(j, k) += weights[g] * (gaussian[g].mean[j] - mbar[j]) *
                               (gaussian[g].mean[k] - mbar[k]);
        return CovMatrix(std::move(m));
    }

    // Law of total variance: sum_g pi_g Sigma_g + between-component spread.
    CovMatrix marginal_cov() const {
        const std::size_t p = dim();
        Matrix m(p, p);
        for (std::size_t g = 0; g < n_components(); ++g)
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t k = 0; k < p; ++k)
                    m(j, k) += weights[g] * gaussian[g].cov(j, k);
        CovMatrix within(std::move(m));
        return within.plus(between_component_cov());
    }
};

struct LabeledSample {
    Matrix data;
    std::vector<int> labels; // 1-based component labels
};

// ---- sampling operations ----------------------------------------------------

// Rows i.i.d. N(mean, cov) via the lower-triangular Cholesky factor.
inline Matrix sample_mvn(const std::vector<double>& mean, const CovMatrix& cov,
                         std::size_t n, Seed seed) {
    if (cov.dim() != mean.size())
        throw DimMismatchError("sample_mvn: mean and covariance dimension mismatch");
    const std::size_t p = mean.size();
    const Matrix L = cov.cholesky();
    Rng rng(seed);
    Matrix out(n, p);
    std::vector<double> z(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) z[j] = normal_draw(rng);
        for (std::size_t j = 0; j < p; ++j) {
            double v = mean[j];
            for (std::size_t k = 0; k <= j; ++k) v += L(j, k) * z[k];
            out(i, j) = v;
        }
    }
    return out;
}

inline std::vector<double> sample_nb(double mu, double theta, std::size_t n, Seed seed) {
    if (!(mu > 0.0) || !(theta > 0.0))
        throw ParameterError("sample_nb requires positive mu and theta");
    Rng rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<double>(negbin_draw(rng, mu, theta));
    return out;
}

inline long long sample_betabin(long long x, double a, double b, Seed seed) {
    if (x < 0) throw ParameterError("sample_betabin requires x >= 0");
    if (a <= 0.0 || b <= 0.0)
        throw ParameterError("sample_betabin requires positive shape parameters");
    Rng rng(seed);
    return betabin_draw(rng, x, a, b);
}

inline LabeledSample sample_mixture(const MixtureSpec& spec, std::size_t n, Seed seed) {
    spec.validate();
    const std::size_t p = spec.dim();
    const std::size_t G = spec.n_components();
    Rng rng(seed);
    LabeledSample out;
    out.data = Matrix(n, p);
    out.labels.resize(n);

    std::vector<Matrix> chol;
    if (spec.family == Family::Gaussian) {
        chol.reserve(G);
        for (const auto& c : spec.gaussian) chol.push_back(c.cov.cholesky());
    }
    std::vector<double> z(p);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = categorical_draw(rng, spec.weights);
        out.labels[i] = static_cast<int>(g) + 1;
        if (spec.family == Family::Gaussian) {
            const auto& comp = spec.gaussian[g];
            for (std::size_t j = 0; j < p; ++j) z[j] = normal_draw(rng);
            for (std::size_t j = 0; j < p; ++j) {
                double v = comp.mean[j];
                for (std::size_t k = 0; k <= j; ++k) v += chol[g](j, k) * z[k];
                out.data(i, j) = v;
            }
        } else {
            const auto& comp = spec.negbin[g];
            for (std::size_t j = 0; j < p; ++j)
                out.data(i, j) =
                    static_cast<double>(negbin_draw(rng, comp.mu[j], comp.theta[j]));
        }
    }
    return out;
}

namespace detail {

// CDF table for NB(mu, theta), long enough that any u in [0,1) lands inside.
inline std::vector<double> negbin_cdf_table(double mu, double theta) {
    const double logp0 = theta * std::log(theta / (theta + mu));
    const double ratio_base = mu / (mu + theta);
    std::vector<double> cdf;
    cdf.reserve(256);
    double pmf = std::exp(logp0);
    double acc = pmf;
    cdf.push_back(acc);
    std::size_t k = 0;
    while (acc < 1.0 - 1e-14 && k < 100000000) {
        pmf *= (static_cast<double>(k) + theta) / (static_cast<double>(k) + 1.0) * ratio_base;
        acc += pmf;
        ++k;
        cdf.push_back(acc);
        if (pmf < 1e-320) break;
    }
    cdf.back() = 1.0;
    return cdf;
}

inline double negbin_quantile_from_table(const std::vector<double>& cdf, double u) {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    return static_cast<double>(it - cdf.begin());
}

} // namespace detail

// Equicorrelated negative binomial columns through a Gaussian copula: an
// equicorrelated MVN is pushed through the standard-normal CDF and then the
// NB quantile function, so marginals stay NB(mu, theta) up to discretization
// while rank dependence increases with rho.
inline Matrix sample_correlated_nb(double mu, double theta, double rho, std::size_t n,
                                   std::size_t p, Seed seed) {
    if (!(mu > 0.0) || !(theta > 0.0))
        throw ParameterError("sample_correlated_nb requires positive mu and theta");
    if (!(rho >= 0.0 && rho < 1.0))
        throw ParameterError("sample_correlated_nb requires rho in [0,1)");
    Rng rng(seed);
    const std::vector<double> cdf = detail::negbin_cdf_table(mu, theta);
    const double shared_w = std::sqrt(rho);
    const double indiv_w = std::sqrt(1.0 - rho);
    Matrix out(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        const double shared = (rho > 0.0) ? normal_draw(rng) : 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double z = shared_w * shared + indiv_w * normal_draw(rng);
            const double u = normal_cdf(z);
            out(i, j) = detail::negbin_quantile_from_table(cdf, u);
        }
    }
    return out;
}

} // namespace fissionlab

#endif
