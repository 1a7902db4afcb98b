#ifndef FISSIONLAB_DECOMPOSE_HPP
#define FISSIONLAB_DECOMPOSE_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fissionlab/errors.hpp"
#include "fissionlab/matrix.hpp"
#include "fissionlab/rng.hpp"
#include "fissionlab/samplers.hpp"

namespace fissionlab {

enum class PluginMode { Marginal, Conditional };
enum class DecomposeMethod { GaussFission, GaussThin, PoissonThin, NBThin };

// Scale parameter(s) injected into a decomposition: a single global value
// (Marginal) or one per mixture component indexed by user-supplied labels
// (Conditional). This module never runs clustering itself; whoever calls it
// owns the labels.
struct ScalePlugin {
    PluginMode mode = PluginMode::Marginal;
    std::vector<CovMatrix> gaussian_cov;          // size 1 (Marginal) or G
    std::vector<std::vector<double>> nb_theta;    // size 1 or G; inner: p or 1 (broadcast)
    std::vector<int> labels;                      // 1-based, required iff Conditional

    static ScalePlugin marginal_cov(CovMatrix cov) {
        ScalePlugin p;
        p.mode = PluginMode::Marginal;
        p.gaussian_cov.push_back(std::move(cov));
        return p;
    }
    static ScalePlugin conditional_cov(std::vector<CovMatrix> covs,
                                       std::vector<int> labels) {
        ScalePlugin p;
        p.mode = PluginMode::Conditional;
        p.gaussian_cov = std::move(covs);
        p.labels = std::move(labels);
        return p;
    }
    static ScalePlugin marginal_theta(std::vector<double> theta) {
        ScalePlugin p;
        p.mode = PluginMode::Marginal;
        p.nb_theta.push_back(std::move(theta));
        return p;
    }
    static ScalePlugin marginal_theta(double theta) {
        return marginal_theta(std::vector<double>{theta});
    }
    static ScalePlugin conditional_theta(std::vector<std::vector<double>> theta,
                                         std::vector<int> labels) {
        ScalePlugin p;
        p.mode = PluginMode::Conditional;
        p.nb_theta = std::move(theta);
        p.labels = std::move(labels);
        return p;
    }
};

// The two decomposed datasets plus the tuning parameter and mode metadata.
struct FissionPair {
    Matrix x1;
    Matrix x2;
    double tau = 0.0;
    DecomposeMethod method = DecomposeMethod::GaussFission;
    PluginMode plugin_mode = PluginMode::Marginal;
};

namespace detail {

inline void check_labels(const ScalePlugin& plugin, std::size_t n, std::size_t G) {
    if (plugin.mode != PluginMode::Conditional) return;
    if (plugin.labels.size() != n)
        throw LabelError("conditional plugin needs one label per row");
    for (int l : plugin.labels)
        if (l < 1 || static_cast<std::size_t>(l) > G)
            throw LabelError("conditional label " + std::to_string(l) +
                             " outside 1.." + std::to_string(G));
}

inline std::size_t row_component(const ScalePlugin& plugin, std::size_t i) {
    return plugin.mode == PluginMode::Conditional
               ? static_cast<std::size_t>(plugin.labels[i] - 1)
               : 0;
}

inline std::vector<Matrix> plugin_cholesky(const ScalePlugin& plugin, std::size_t p,
                                           double scale = 1.0) {
    if (plugin.gaussian_cov.empty())
        throw DecompositionError("plugin carries no covariance for a Gaussian method");
    if (plugin.mode == PluginMode::Marginal && plugin.gaussian_cov.size() != 1)
        throw DecompositionError("marginal plugin must hold exactly one covariance");
    std::vector<Matrix> chol;
    chol.reserve(plugin.gaussian_cov.size());
    for (const auto& cov : plugin.gaussian_cov) {
        if (cov.dim() != p)
            throw DimMismatchError("plugin covariance dimension does not match data");
        chol.push_back(scale == 1.0 ? cov.cholesky() : cov.scaled(scale).cholesky());
    }
    return chol;
}

// Resolved per-variable theta for component g, broadcasting scalars.
inline double plugin_theta(const ScalePlugin& plugin, std::size_t g, std::size_t j) {
    const auto& v = plugin.nb_theta[g];
    const double theta = v.size() == 1 ? v[0] : v[j];
    if (!(theta > 0.0)) throw ParameterError("plugin theta must be positive");
    return theta;
}

inline void check_theta_plugin(const ScalePlugin& plugin, std::size_t n, std::size_t p) {
    if (plugin.nb_theta.empty())
        throw ParameterError("plugin carries no theta for an NB method");
    if (plugin.mode == PluginMode::Marginal && plugin.nb_theta.size() != 1)
        throw ParameterError("marginal plugin must hold exactly one theta vector");
    check_labels(plugin, n, plugin.nb_theta.size());
    for (const auto& v : plugin.nb_theta)
        if (v.size() != 1 && v.size() != p)
            throw DimMismatchError("plugin theta must have one entry or one per variable");
}

inline void check_counts(const Matrix& x, const char* who) {
    for (double v : x.data()) {
        if (v < 0.0)
            throw NegativeCountError(std::string(who) + ": negative count entry");
        if (v != std::floor(v))
            throw NegativeCountError(std::string(who) + ": non-integer count entry");
    }
}

} // namespace detail

// X1 = X + tau*W, X2 = X - W/tau with W ~ N(0, Sigma_plugin(row)). The shared
// W makes the decomposition jointly multivariate.
inline FissionPair gaussian_fission(const Matrix& x, double tau,
                                    const ScalePlugin& plugin, Seed seed) {
    if (!(tau > 0.0)) throw ParameterError("gaussian_fission requires tau > 0");
    const std::size_t n = x.rows(), p = x.cols();
    detail::check_labels(plugin, n, plugin.gaussian_cov.size());
    const std::vector<Matrix> chol = detail::plugin_cholesky(plugin, p);

    Rng rng(seed);
    FissionPair out;
    out.x1 = Matrix(n, p);
    out.x2 = Matrix(n, p);
    out.tau = tau;
    out.method = DecomposeMethod::GaussFission;
    out.plugin_mode = plugin.mode;
    std::vector<double> z(p), w(p);
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix& L = chol[detail::row_component(plugin, i)];
        for (std::size_t j = 0; j < p; ++j) z[j] = normal_draw(rng);
        for (std::size_t j = 0; j < p; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k <= j; ++k) v += L(j, k) * z[k];
            w[j] = v;
        }
        for (std::size_t j = 0; j < p; ++j) {
            out.x1(i, j) = x(i, j) + tau * w[j];
            out.x2(i, j) = x(i, j) - w[j] / tau;
        }
    }
    return out;
}

// X1 | X ~ N(tau2*X, tau2(1-tau2)*Sigma_plugin), X2 = X - X1.
inline FissionPair gaussian_thin(const Matrix& x, double tau2,
                                 const ScalePlugin& plugin, Seed seed) {
    if (!(tau2 > 0.0 && tau2 < 1.0))
        throw ParameterError("gaussian_thin requires tau2 in (0,1)");
    const std::size_t n = x.rows(), p = x.cols();
    detail::check_labels(plugin, n, plugin.gaussian_cov.size());
    const std::vector<Matrix> chol =
        detail::plugin_cholesky(plugin, p, tau2 * (1.0 - tau2));

    Rng rng(seed);
    FissionPair out;
    out.x1 = Matrix(n, p);
    out.x2 = Matrix(n, p);
    out.tau = tau2;
    out.method = DecomposeMethod::GaussThin;
    out.plugin_mode = plugin.mode;
    std::vector<double> z(p);
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix& L = chol[detail::row_component(plugin, i)];
        for (std::size_t j = 0; j < p; ++j) z[j] = normal_draw(rng);
        for (std::size_t j = 0; j < p; ++j) {
            double eps = 0.0;
            for (std::size_t k = 0; k <= j; ++k) eps += L(j, k) * z[k];
            out.x1(i, j) = tau2 * x(i, j) + eps;
            out.x2(i, j) = x(i, j) - out.x1(i, j);
        }
    }
    return out;
}

// Entrywise binomial split; exact sum identity on integer counts.
inline FissionPair poisson_thin(const Matrix& x, double tau, Seed seed) {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw ParameterError("poisson_thin requires tau in [0,1]");
    detail::check_counts(x, "poisson_thin");
    const std::size_t n = x.rows(), p = x.cols();
    Rng rng(seed);
    FissionPair out;
    out.x1 = Matrix(n, p);
    out.x2 = Matrix(n, p);
    out.tau = tau;
    out.method = DecomposeMethod::PoissonThin;
    out.plugin_mode = PluginMode::Marginal;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            const long long xi = static_cast<long long>(x(i, j));
            const long long x1 = binomial_draw(rng, xi, tau);
            out.x1(i, j) = static_cast<double>(x1);
            out.x2(i, j) = static_cast<double>(xi - x1);
        }
    return out;
}

// Entrywise beta-binomial thinning: X1 ~ BetaBin(x, tau*theta, (1-tau)*theta)
// with theta resolved per (row component, variable). Columns are decomposed
// independently; cross-variable dependence in X is NOT removed.
inline FissionPair nb_thin(const Matrix& x, double tau, const ScalePlugin& plugin,
                           Seed seed) {
    if (!(tau > 0.0 && tau < 1.0))
        throw ParameterError("nb_thin requires tau in (0,1)");
    detail::check_counts(x, "nb_thin");
    const std::size_t n = x.rows(), p = x.cols();
    detail::check_theta_plugin(plugin, n, p);

    Rng rng(seed);
    FissionPair out;
    out.x1 = Matrix(n, p);
    out.x2 = Matrix(n, p);
    out.tau = tau;
    out.method = DecomposeMethod::NBThin;
    out.plugin_mode = plugin.mode;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = detail::row_component(plugin, i);
        for (std::size_t j = 0; j < p; ++j) {
            const double theta = detail::plugin_theta(plugin, g, j);
            const long long xi = static_cast<long long>(x(i, j));
            const long long x1 =
                betabin_draw(rng, xi, tau * theta, (1.0 - tau) * theta);
            out.x1(i, j) = static_cast<double>(x1);
            out.x2(i, j) = static_cast<double>(xi - x1);
        }
    }
    return out;
}

// Empirical cross-covariance between paired matrices, with the Monte Carlo
// standard error of every entry (from the second moment of the products).
struct CrossCov {
    Matrix cov;
    Matrix se;
};

inline CrossCov cross_covariance_with_se(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimMismatchError("cross_covariance expects equal shapes");
    const std::size_t n = a.rows(), p = a.cols();
    if (n < 2) throw InsufficientDataError("cross_covariance needs n >= 2");
    std::vector<double> ma(p, 0.0), mb(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            ma[j] += a(i, j);
            mb[j] += b(i, j);
        }
    for (std::size_t j = 0; j < p; ++j) {
        ma[j] /= static_cast<double>(n);
        mb[j] /= static_cast<double>(n);
    }
    CrossCov out;
    out.cov = Matrix(p, p);
    out.se = Matrix(p, p);
    Matrix sq(p, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            const double da = a(i, j) - ma[j];
            for (std::size_t k = 0; k < p; ++k) {
                const double prod = da * (b(i, k) - mb[k]);
                out.cov(j, k) += prod;
                sq(j, k) += prod * prod;
            }
        }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) {
            const double m1 = out.cov(j, k) / static_cast<double>(n);
            const double m2 = sq(j, k) / static_cast<double>(n);
            out.cov(j, k) = m1;
            out.se(j, k) = std::sqrt(std::max(0.0, m2 - m1 * m1) /
                                     static_cast<double>(n));
        }
    return out;
}

inline Matrix cross_covariance(const Matrix& a, const Matrix& b) {
    return cross_covariance_with_se(a, b).cov;
}

struct FissionCovCheck {
    Matrix marginal_cov;               // empirical Cov(X1, X2) over all rows
    Matrix marginal_se;
    std::vector<Matrix> within_cov;    // empirical Cov(X1, X2 | component g)
    std::vector<Matrix> within_se;
    std::vector<std::size_t> counts;   // rows per component
};

// Samples the Gaussian mixture, applies fission with the TRUE parameters in
// the requested mode, and returns the empirical cross-covariances overall and
// per true component. Harness/test primitive for the covariance identities.
inline FissionCovCheck gaussian_fission_conditional_covcheck(const MixtureSpec& spec,
                                                             double tau, std::size_t n,
                                                             Seed seed,
                                                             PluginMode mode) {
    spec.validate();
    if (spec.family != Family::Gaussian)
        throw ParameterError("covcheck requires a Gaussian mixture");
    const LabeledSample sample = sample_mixture(spec, n, derive_seed(seed, 1));

    ScalePlugin plugin;
    if (mode == PluginMode::Conditional) {
        std::vector<CovMatrix> covs;
        for (const auto& c : spec.gaussian) covs.push_back(c.cov);
        plugin = ScalePlugin::conditional_cov(std::move(covs), sample.labels);
    } else {
        plugin = ScalePlugin::marginal_cov(spec.marginal_cov());
    }
    const FissionPair pair =
        gaussian_fission(sample.data, tau, plugin, derive_seed(seed, 2));

    const std::size_t G = spec.n_components(), p = spec.dim();
    FissionCovCheck out;
    const CrossCov marginal = cross_covariance_with_se(pair.x1, pair.x2);
    out.marginal_cov = marginal.cov;
    out.marginal_se = marginal.se;
    out.within_cov.reserve(G);
    out.within_se.reserve(G);
    out.counts.assign(G, 0);
    for (int l : sample.labels) ++out.counts[static_cast<std::size_t>(l - 1)];
    for (std::size_t g = 0; g < G; ++g) {
        Matrix a(out.counts[g], p), b(out.counts[g], p);
        std::size_t r = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<std::size_t>(sample.labels[i] - 1) != g) continue;
            for (std::size_t j = 0; j < p; ++j) {
                a(r, j) = pair.x1(i, j);
                b(r, j) = pair.x2(i, j);
            }
            ++r;
        }
        const CrossCov within = cross_covariance_with_se(a, b);
        out.within_cov.push_back(within.cov);
        out.within_se.push_back(within.se);
    }
    return out;
}

} // namespace fissionlab

#endif
