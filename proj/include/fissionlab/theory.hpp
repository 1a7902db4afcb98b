#ifndef FISSIONLAB_THEORY_HPP
#define FISSIONLAB_THEORY_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "fissionlab/errors.hpp"
#include "fissionlab/matrix.hpp"
#include "fissionlab/samplers.hpp"
#include "fissionlab/special.hpp"

namespace fissionlab {

// True variance, plug-in variance and fission tuning parameter for the
// 1-D bias analysis.
struct BiasSpec {
    double sigma2 = 1.0;
    double b2 = 1.0;
    double tau = 1.0;

    void validate() const {
        if (!(sigma2 > 0.0 && b2 > 0.0 && tau > 0.0))
            throw ParameterError("BiasSpec requires positive sigma2, b2 and tau");
    }
};

// Cor(X1, X2) after fission of N(mu, sigma2) with plug-in variance b2:
// (sigma2 - b2) / sqrt((sigma2 + tau^2 b2)(sigma2 + b2/tau^2)).
inline double rho_fission(const BiasSpec& spec) {
    spec.validate();
    const double num = spec.sigma2 - spec.b2;
    const double t2 = spec.tau * spec.tau;
    const double den = std::sqrt((spec.sigma2 + t2 * spec.b2) *
                                 (spec.sigma2 + spec.b2 / t2));
    return num / den;
}

namespace detail {

inline double type1_noncentrality(double rho, std::size_t n) {
    if (rho * rho >= M_PI / 2.0)
        throw DomainError("type1 requires rho^2 < pi/2");
    return rho * std::sqrt(static_cast<double>(n)) /
           std::sqrt(M_PI / 2.0 - rho * rho);
}

} // namespace detail

// Two-sided rejection probability 1 - F(q) + F(-q) where F is the CDF of
// N(rho*sqrt(n)/sqrt(pi/2 - rho^2), 1) and q the upper alpha/2 standard
// normal quantile. Assumes the clustering splits X1 at its mean into two
// clusters of size n/2 with equal within-cluster variances; the harness
// reports cluster-size imbalance as a diagnostic for that assumption.
inline double type1_z(double rho, std::size_t n, double alpha) {
    if (n < 2) throw ParameterError("type1_z requires n >= 2");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("type1_z requires alpha in (0,1)");
    const double delta = detail::type1_noncentrality(rho, n);
    const double q = normal_quantile(1.0 - alpha / 2.0);
    return 1.0 - normal_cdf(q - delta) + normal_cdf(-q - delta);
}

// Student variant: F is the noncentral-t CDF with df = n-2 and the same
// noncentrality; q is the central Student-t upper alpha/2 quantile.
inline double type1_t(double rho, std::size_t n, double alpha) {
    if (n < 3) throw ParameterError("type1_t requires n >= 3");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("type1_t requires alpha in (0,1)");
    const double delta = detail::type1_noncentrality(rho, n);
    const double df = static_cast<double>(n - 2);
    const double q = student_t_quantile(1.0 - alpha / 2.0, df);
    return 1.0 - noncentral_t_cdf(q, df, delta) + noncentral_t_cdf(-q, df, delta);
}

enum class Type1Variant { Z, StudentT };

struct Type1Curve {
    std::vector<std::pair<double, double>> grid; // (relative_bias, alpha_hat)
    std::size_t n = 0;
    double alpha = 0.0;
    Type1Variant variant = Type1Variant::Z;
};

// Relative bias is (b2 - sigma2)/sigma2; the plug-in at grid value r is
// b2 = sigma2 * (1 + r).
inline Type1Curve type1_curve(double sigma2, double tau,
                              const std::vector<double>& relative_bias_grid,
                              std::size_t n, double alpha, Type1Variant variant) {
    Type1Curve curve;
    curve.n = n;
    curve.alpha = alpha;
    curve.variant = variant;
    for (double r : relative_bias_grid) {
        BiasSpec spec{sigma2, sigma2 * (1.0 + r), tau};
        const double rho = rho_fission(spec);
        const double a = (variant == Type1Variant::Z) ? type1_z(rho, n, alpha)
                                                      : type1_t(rho, n, alpha);
        curve.grid.emplace_back(r, a);
    }
    return curve;
}

// Marginal Cov(X1, X2) under conditional fission: the between-component
// spread sum_g pi_g (mu_g - mu_bar)(mu_g - mu_bar)^T.
inline CovMatrix cov_conditional_fission(const MixtureSpec& spec) {
    spec.validate();
    if (spec.family != Family::Gaussian)
        throw ParameterError("cov_conditional_fission requires a Gaussian mixture");
    return spec.between_component_cov();
}

// Within-component Cov(X1, X2 | Z = g) under marginal fission: Sigma_g - Sigma.
inline CovMatrix cov_marginal_fission_conditional(const CovMatrix& sigma_g,
                                                  const CovMatrix& sigma) {
    if (sigma_g.dim() != sigma.dim())
        throw DimMismatchError("cov_marginal_fission_conditional: dimension mismatch");
    return sigma_g.plus(sigma, -1.0);
}

// Cov(X1, X2) when fission uses an estimated covariance: Sigma - Sigma_hat.
inline CovMatrix cov_prop1(const CovMatrix& sigma, const CovMatrix& sigma_hat) {
    if (sigma.dim() != sigma_hat.dim())
        throw DimMismatchError("cov_prop1: dimension mismatch");
    return sigma.plus(sigma_hat, -1.0);
}

// Cov(X1, X2) for NB thinning with plug-in theta_hat:
// tau(1-tau) (mu^2/theta) (1 - (theta+1)/(theta_hat+1)).
inline double cov_nb_thin(double mu, double theta, double theta_hat, double tau) {
    if (!(mu > 0.0 && theta > 0.0 && theta_hat > 0.0))
        throw ParameterError("cov_nb_thin requires positive mu, theta, theta_hat");
    if (!(tau > 0.0 && tau < 1.0))
        throw ParameterError("cov_nb_thin requires tau in (0,1)");
    return tau * (1.0 - tau) * (mu * mu / theta) *
           (1.0 - (theta + 1.0) / (theta_hat + 1.0));
}

struct HalfNormalMoments {
    double mean_upper = 0.0; // E[X | X > mu]
    double mean_lower = 0.0; // E[X | X <= mu]
    double var_within = 0.0; // Var(X | X > mu) = Var(X | X <= mu)
};

// Moments of a Gaussian N(mu, sigma2) truncated at its mean.
inline HalfNormalMoments halfnormal_cluster_moments(double mu, double sigma2_x1) {
    if (!(sigma2_x1 > 0.0))
        throw ParameterError("halfnormal_cluster_moments requires sigma2 > 0");
    HalfNormalMoments m;
    const double shift = std::sqrt(2.0 * sigma2_x1 / M_PI);
    m.mean_upper = mu + shift;
    m.mean_lower = mu - shift;
    m.var_within = (1.0 - 2.0 / M_PI) * sigma2_x1;
    return m;
}

// The four covariance structures of a Gaussian mixture decomposition in one
// place: marginal and within-component Cov(X1, X2) under conditional and
// marginal fission with true parameters.
struct FissionCovarianceSummary {
    CovMatrix conditional_fission_marginal;          // between-component spread
    CovMatrix conditional_fission_within;            // zero
    CovMatrix marginal_fission_marginal;             // zero
    std::vector<CovMatrix> marginal_fission_within;  // Sigma_g - Sigma, per g
};

inline FissionCovarianceSummary covariance_summary(const MixtureSpec& spec) {
    spec.validate();
    if (spec.family != Family::Gaussian)
        throw ParameterError("covariance_summary requires a Gaussian mixture");
    const std::size_t p = spec.dim();
    FissionCovarianceSummary s;
    s.conditional_fission_marginal = cov_conditional_fission(spec);
    s.conditional_fission_within = CovMatrix(Matrix(p, p));
    s.marginal_fission_marginal = CovMatrix(Matrix(p, p));
    const CovMatrix sigma = spec.marginal_cov();
    for (const auto& comp : spec.gaussian)
        s.marginal_fission_within.push_back(
            cov_marginal_fission_conditional(comp.cov, sigma));
    return s;
}

} // namespace fissionlab

#endif
