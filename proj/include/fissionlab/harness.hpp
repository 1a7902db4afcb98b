#ifndef FISSIONLAB_HARNESS_HPP
#define FISSIONLAB_HARNESS_HPP

#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fissionlab/cluster.hpp"
#include "fissionlab/decompose.hpp"
#include "fissionlab/errors.hpp"
#include "fissionlab/estimate.hpp"
#include "fissionlab/matrix.hpp"
#include "fissionlab/rng.hpp"
#include "fissionlab/samplers.hpp"
#include "fissionlab/stattest.hpp"
#include "fissionlab/theory.hpp"

namespace fissionlab {

enum class ScenarioKind {
    IdealGaussian,
    AdverseGaussian,
    BiasSweep,
    NBMixtureSplit,
    NBCorrelated,
    TwoPopulationSynthetic
};

enum class FissionMode { Marginal, ConditionalOracle };
enum class ClusteringScope { Multivariate, Univariate };

inline const char* kind_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::IdealGaussian: return "ideal_gaussian";
        case ScenarioKind::AdverseGaussian: return "adverse_gaussian";
        case ScenarioKind::BiasSweep: return "bias_sweep";
        case ScenarioKind::NBMixtureSplit: return "nb_mixture_split";
        case ScenarioKind::NBCorrelated: return "nb_correlated";
        case ScenarioKind::TwoPopulationSynthetic: return "two_population_synthetic";
    }
    return "?";
}

inline const char* mode_name(FissionMode m) {
    return m == FissionMode::Marginal ? "marginal" : "conditional_oracle";
}

inline const char* scope_name(ClusteringScope s) {
    return s == ClusteringScope::Multivariate ? "multivariate" : "univariate";
}

inline const char* test_name(TestMethod t) {
    switch (t) {
        case TestMethod::TPooled: return "t_pooled";
        case TestMethod::TWelch: return "t_welch";
        case TestMethod::WilcoxonNormalApprox: return "wilcoxon";
    }
    return "?";
}

// Config-driven description of one experiment. Grids with no meaning for a
// kind are left empty; the harness then runs a single unset point for them.
struct ScenarioConfig {
    std::string name;
    ScenarioKind kind = ScenarioKind::BiasSweep;
    MixtureSpec mixture;
    std::vector<double> tau_grid;
    std::vector<std::size_t> n_grid;
    std::vector<double> bias_grid; // relative bias (b2 - s2)/s2 of the plug-in scale
    std::vector<double> rho_grid;  // pairwise correlation of the data columns
    std::size_t k_cluster = 2;
    FissionMode fission_mode = FissionMode::Marginal;
    TestMethod test = TestMethod::TPooled;
    std::size_t replicates = 1000;
    double alpha = 0.05;
    Seed master_seed{20250801};
    ClusteringScope clustering_scope = ClusteringScope::Multivariate;
    // Components compared in matched (power) scenarios, 1-based.
    std::pair<int, int> target_components{1, 2};
    KMeansOptions kmeans;
    // TwoPopulationSynthetic: variables [0, h0_genes) carry no between-
    // population difference, the rest do.
    std::size_t h0_genes = 0;

    void validate() const {
        if (tau_grid.empty() || n_grid.empty())
            throw ConfigError("scenario needs nonempty tau and n grids");
        if (replicates < 1) throw ConfigError("scenario needs replicates >= 1");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw ConfigError("scenario needs alpha in (0,1)");
        if (k_cluster < 2) throw ConfigError("scenario needs k_cluster >= 2");
        mixture.validate();
        const bool gaussian_kind = kind == ScenarioKind::IdealGaussian ||
                                   kind == ScenarioKind::AdverseGaussian ||
                                   kind == ScenarioKind::BiasSweep;
        if (gaussian_kind && mixture.family != Family::Gaussian)
            throw ConfigError("this scenario kind needs a Gaussian mixture");
        if (!gaussian_kind && mixture.family != Family::NegBin)
            throw ConfigError("this scenario kind needs an NB mixture");
        if (kind == ScenarioKind::IdealGaussian && mixture.n_components() < 2)
            throw ConfigError("matched-pair scenario needs at least 2 components");
        if (kind == ScenarioKind::NBCorrelated && mixture.n_components() != 1)
            throw ConfigError("correlated-NB scenario needs a single component");
        if (kind == ScenarioKind::NBCorrelated)
            for (double t : tau_grid)
                if (!(t > 0.0 && t < 1.0))
                    throw ConfigError("thinning tau must lie in (0,1)");
    }
};

struct GridPoint {
    std::size_t index = 0; // flattened position, also the seed salt
    double tau = 0.0;
    std::size_t n = 0;
    double bias = std::numeric_limits<double>::quiet_NaN();
    double rho = std::numeric_limits<double>::quiet_NaN();
};

struct ReplicateResult {
    GridPoint point;
    std::size_t replicate = 0;
    Seed seed_used{0};
    double ari = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> p_values;          // one per tested variable
    std::vector<double> p_values_control;  // Gaussian fission arm (NBCorrelated)
    std::vector<std::size_t> cluster_sizes;
    bool failed = false;
    std::string error;
};

struct SummaryRow {
    std::string scenario;
    std::string kind;
    double tau = 0.0;
    std::size_t n = 0;
    double bias = std::numeric_limits<double>::quiet_NaN();
    double rho = std::numeric_limits<double>::quiet_NaN();
    std::string mode;
    std::string test;
    std::string metric;
    double value = 0.0;
    double se = 0.0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
};

struct ExperimentSummary {
    std::vector<SummaryRow> rows;
};

struct ExperimentDetail {
    ScenarioConfig cfg;
    std::vector<GridPoint> grid;
    std::vector<std::vector<ReplicateResult>> results; // [point][replicate]
};

namespace detail {

inline std::vector<GridPoint> build_grid(const ScenarioConfig& cfg) {
    const std::vector<double> biases =
        cfg.bias_grid.empty()
            ? std::vector<double>{std::numeric_limits<double>::quiet_NaN()}
            : cfg.bias_grid;
    const std::vector<double> rhos =
        cfg.rho_grid.empty()
            ? std::vector<double>{std::numeric_limits<double>::quiet_NaN()}
            : cfg.rho_grid;
    std::vector<GridPoint> grid;
    std::size_t idx = 0;
    for (double tau : cfg.tau_grid)
        for (std::size_t n : cfg.n_grid)
            for (double bias : biases)
                for (double rho : rhos)
                    grid.push_back(GridPoint{idx++, tau, n, bias, rho});
    return grid;
}

// Majority true component of each 1-based cluster label; ties toward the
// smaller component index.
inline std::vector<int> cluster_majorities(const std::vector<int>& cluster_labels,
                                           const std::vector<int>& true_labels,
                                           std::size_t k, std::size_t G) {
    std::vector<std::size_t> counts(k * G, 0);
    for (std::size_t i = 0; i < cluster_labels.size(); ++i) {
        const std::size_t c = static_cast<std::size_t>(cluster_labels[i] - 1);
        const std::size_t g = static_cast<std::size_t>(true_labels[i] - 1);
        ++counts[c * G + g];
    }
    std::vector<int> majority(k, 1);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t best = 0, arg = 0;
        for (std::size_t g = 0; g < G; ++g)
            if (counts[c * G + g] > best) {
                best = counts[c * G + g];
                arg = g;
            }
        majority[c] = static_cast<int>(arg) + 1;
    }
    return majority;
}

inline std::vector<std::size_t> cluster_sizes_of(const std::vector<int>& labels,
                                                 std::size_t k) {
    std::vector<std::size_t> sz(k, 0);
    for (int l : labels) ++sz[static_cast<std::size_t>(l - 1)];
    return sz;
}

// The "erroneously split" pair: two estimated clusters majority-drawn from
// the same true component; among candidates the largest combined size wins,
// ties toward the lexicographically smallest index pair. Falls back to the
// two largest clusters if no pair shares a majority component.
inline std::pair<int, int> spurious_pair(const std::vector<int>& cluster_labels,
                                         const std::vector<int>& true_labels,
                                         std::size_t k, std::size_t G) {
    const std::vector<int> majority =
        cluster_majorities(cluster_labels, true_labels, k, G);
    const std::vector<std::size_t> sz = cluster_sizes_of(cluster_labels, k);
    int best_a = -1, best_b = -1;
    std::size_t best_size = 0;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            if (majority[a] != majority[b]) continue;
            const std::size_t s = sz[a] + sz[b];
            if (s > best_size) {
                best_size = s;
                best_a = static_cast<int>(a);
                best_b = static_cast<int>(b);
            }
        }
    if (best_a < 0) {
        // No shared-majority pair (cannot happen when k exceeds the number of
        // majority values); use the two largest clusters.
        std::size_t a = 0, b = 1;
        for (std::size_t c = 1; c < k; ++c)
            if (sz[c] > sz[a]) a = c;
        b = (a == 0) ? 1 : 0;
        for (std::size_t c = 0; c < k; ++c)
            if (c != a && sz[c] > sz[b]) b = c;
        best_a = static_cast<int>(std::min(a, b));
        best_b = static_cast<int>(std::max(a, b));
    }
    return {best_a + 1, best_b + 1};
}

// Clusters matched to the two target components by majority vote; ties by
// cluster size then index. Empty when either target has no matching cluster.
inline std::optional<std::pair<int, int>> matched_pair(
    const std::vector<int>& cluster_labels, const std::vector<int>& true_labels,
    std::size_t k, std::size_t G, std::pair<int, int> targets) {
    const std::vector<int> majority =
        cluster_majorities(cluster_labels, true_labels, k, G);
    const std::vector<std::size_t> sz = cluster_sizes_of(cluster_labels, k);
    auto match = [&](int target) -> int {
        int best = -1;
        for (std::size_t c = 0; c < k; ++c) {
            if (majority[c] != target) continue;
            if (best < 0 || sz[c] > sz[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
        }
        return best;
    };
    const int a = match(targets.first);
    const int b = match(targets.second);
    if (a < 0 || b < 0 || a == b) return std::nullopt;
    return std::make_pair(a + 1, b + 1);
}

inline TestReport run_test(TestMethod method, std::span<const double> a,
                           std::span<const double> b) {
    if (method == TestMethod::WilcoxonNormalApprox) return wilcoxon_rank_sum(a, b);
    return t_test(a, b, method == TestMethod::TPooled ? TVariant::Pooled
                                                      : TVariant::Welch);
}

// One two-sample test per variable of x2 between the members of the two
// selected clusters. Degenerate groups yield p = 1 (no rejection possible).
inline std::vector<double> test_pair_per_variable(const Matrix& x2,
                                                  const std::vector<int>& cluster_labels,
                                                  std::pair<int, int> pair,
                                                  TestMethod method) {
    std::vector<std::size_t> rows_a, rows_b;
    for (std::size_t i = 0; i < cluster_labels.size(); ++i) {
        if (cluster_labels[i] == pair.first) rows_a.push_back(i);
        if (cluster_labels[i] == pair.second) rows_b.push_back(i);
    }
    std::vector<double> p(x2.cols(), 1.0);
    std::vector<double> a(rows_a.size()), b(rows_b.size());
    for (std::size_t j = 0; j < x2.cols(); ++j) {
        for (std::size_t r = 0; r < rows_a.size(); ++r) a[r] = x2(rows_a[r], j);
        for (std::size_t r = 0; r < rows_b.size(); ++r) b[r] = x2(rows_b[r], j);
        try {
            p[j] = run_test(method, a, b).p_value;
        } catch (const Error&) {
            p[j] = 1.0;
        }
    }
    return p;
}

inline ScalePlugin gaussian_plugin(const ScenarioConfig& cfg, const GridPoint& pt,
                                   const LabeledSample& sample) {
    if (cfg.fission_mode == FissionMode::ConditionalOracle) {
        std::vector<CovMatrix> covs;
        for (const auto& c : cfg.mixture.gaussian) covs.push_back(c.cov);
        return ScalePlugin::conditional_cov(std::move(covs), sample.labels);
    }
    // Marginal: an explicit bias grid scales the true marginal covariance;
    // otherwise the full-sample empirical estimate is the only choice.
    if (!std::isnan(pt.bias))
        return ScalePlugin::marginal_cov(
            cfg.mixture.marginal_cov().scaled(1.0 + pt.bias));
    return ScalePlugin::marginal_cov(empirical_cov(sample.data));
}

inline ScalePlugin nb_plugin(const ScenarioConfig& cfg, const GridPoint& pt,
                             const LabeledSample& sample) {
    if (cfg.fission_mode == FissionMode::ConditionalOracle) {
        std::vector<std::vector<double>> thetas;
        for (const auto& c : cfg.mixture.negbin) thetas.push_back(c.theta);
        return ScalePlugin::conditional_theta(std::move(thetas), sample.labels);
    }
    if (!std::isnan(pt.bias)) {
        std::vector<double> theta = cfg.mixture.negbin.front().theta;
        for (double& t : theta) t *= 1.0 + pt.bias;
        return ScalePlugin::marginal_theta(std::move(theta));
    }
    std::vector<double> theta(sample.data.cols());
    for (std::size_t j = 0; j < sample.data.cols(); ++j)
        theta[j] = nb_mle(sample.data.col(j)).theta_hat;
    return ScalePlugin::marginal_theta(std::move(theta));
}

struct ScopeOutcome {
    double ari = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> p_values;
    std::vector<std::size_t> cluster_sizes;
};

// Cluster x1, pick the cluster pair per scenario kind, test every variable of
// x2 between the pair. Univariate scope repeats the whole pipeline per
// variable on its own column.
inline ScopeOutcome cluster_and_test(const ScenarioConfig& cfg, const Matrix& x1,
                                     const Matrix& x2,
                                     const std::vector<int>& true_labels,
                                     std::size_t G, Seed seed) {
    const bool matched = cfg.kind == ScenarioKind::IdealGaussian;
    ScopeOutcome out;
    if (cfg.clustering_scope == ClusteringScope::Multivariate) {
        const KMeansResult km = kmeans(x1, cfg.k_cluster, seed, cfg.kmeans);
        out.ari = adjusted_rand_index(km.labels, true_labels);
        std::optional<std::pair<int, int>> pair;
        if (matched)
            pair = matched_pair(km.labels, true_labels, cfg.k_cluster, G,
                                cfg.target_components);
        else
            pair = spurious_pair(km.labels, true_labels, cfg.k_cluster, G);
        if (!pair) {
            out.p_values.assign(x2.cols(), 1.0); // matching failed: power loss
            out.cluster_sizes = cluster_sizes_of(km.labels, cfg.k_cluster);
            return out;
        }
        out.p_values = test_pair_per_variable(x2, km.labels, *pair, cfg.test);
        const auto sz = cluster_sizes_of(km.labels, cfg.k_cluster);
        out.cluster_sizes = {sz[static_cast<std::size_t>(pair->first - 1)],
                             sz[static_cast<std::size_t>(pair->second - 1)]};
        return out;
    }

    // Univariate scope: an independent clustering per variable.
    const std::size_t p = x1.cols();
    out.p_values.assign(p, 1.0);
    double ari_sum = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        Matrix col(x1.rows(), 1);
        for (std::size_t i = 0; i < x1.rows(); ++i) col(i, 0) = x1(i, j);
        const KMeansResult km =
            kmeans(col, cfg.k_cluster, derive_seed(seed, 0x756e69ULL, j), cfg.kmeans);
        ari_sum += adjusted_rand_index(km.labels, true_labels);
        std::optional<std::pair<int, int>> pair;
        if (matched)
            pair = matched_pair(km.labels, true_labels, cfg.k_cluster, G,
                                cfg.target_components);
        else
            pair = spurious_pair(km.labels, true_labels, cfg.k_cluster, G);
        if (!pair) continue;
        std::vector<double> a, b;
        for (std::size_t i = 0; i < x2.rows(); ++i) {
            if (km.labels[i] == pair->first) a.push_back(x2(i, j));
            if (km.labels[i] == pair->second) b.push_back(x2(i, j));
        }
        try {
            out.p_values[j] = run_test(cfg.test, a, b).p_value;
        } catch (const Error&) {
            out.p_values[j] = 1.0;
        }
    }
    out.ari = ari_sum / static_cast<double>(p);
    return out;
}

} // namespace detail

// One replicate of one grid point: sample, decompose, cluster X1, select the
// comparison pair, test on X2. Reproducible from (cfg, point, r) alone.
inline ReplicateResult run_replicate(const ScenarioConfig& cfg, const GridPoint& pt,
                                     std::size_t r) {
    ReplicateResult res;
    res.point = pt;
    res.replicate = r;
    res.seed_used = derive_seed(cfg.master_seed, pt.index + 1, r + 1);
    const Seed sample_seed = derive_seed(res.seed_used, 1);
    const Seed decompose_seed = derive_seed(res.seed_used, 2);
    const Seed cluster_seed = derive_seed(res.seed_used, 3);

    try {
        switch (cfg.kind) {
            case ScenarioKind::IdealGaussian:
            case ScenarioKind::AdverseGaussian:
            case ScenarioKind::BiasSweep: {
                const LabeledSample sample =
                    sample_mixture(cfg.mixture, pt.n, sample_seed);
                const ScalePlugin plugin = detail::gaussian_plugin(cfg, pt, sample);
                const FissionPair pair =
                    gaussian_fission(sample.data, pt.tau, plugin, decompose_seed);
                const detail::ScopeOutcome o =
                    detail::cluster_and_test(cfg, pair.x1, pair.x2, sample.labels,
                                             cfg.mixture.n_components(), cluster_seed);
                res.ari = o.ari;
                res.p_values = o.p_values;
                res.cluster_sizes = o.cluster_sizes;
                break;
            }
            case ScenarioKind::NBMixtureSplit:
            case ScenarioKind::TwoPopulationSynthetic: {
                const LabeledSample sample =
                    sample_mixture(cfg.mixture, pt.n, sample_seed);
                const ScalePlugin plugin = detail::nb_plugin(cfg, pt, sample);
                const FissionPair pair =
                    nb_thin(sample.data, pt.tau, plugin, decompose_seed);
                const detail::ScopeOutcome o =
                    detail::cluster_and_test(cfg, pair.x1, pair.x2, sample.labels,
                                             cfg.mixture.n_components(), cluster_seed);
                res.ari = o.ari;
                res.p_values = o.p_values;
                res.cluster_sizes = o.cluster_sizes;
                break;
            }
            case ScenarioKind::NBCorrelated: {
                const auto& comp = cfg.mixture.negbin.front();
                const double mu = comp.mu.front();
                const double theta = comp.theta.front();
                const std::size_t p = cfg.mixture.dim();
                const double rho = std::isnan(pt.rho) ? 0.0 : pt.rho;
                const Matrix x =
                    sample_correlated_nb(mu, theta, rho, pt.n, p, sample_seed);
                const std::vector<int> ones(pt.n, 1);

                ScalePlugin plugin;
                if (cfg.fission_mode == FissionMode::ConditionalOracle ||
                    std::isnan(pt.bias)) {
                    plugin = ScalePlugin::marginal_theta(theta);
                } else {
                    plugin = ScalePlugin::marginal_theta(theta * (1.0 + pt.bias));
                }
                const FissionPair pair = nb_thin(x, pt.tau, plugin, decompose_seed);
                detail::ScopeOutcome o = detail::cluster_and_test(
                    cfg, pair.x1, pair.x2, ones, 1, cluster_seed);
                res.p_values = std::move(o.p_values);
                res.cluster_sizes = std::move(o.cluster_sizes);

                // Analogous Gaussian fission arm on equicorrelated data with
                // the same relative bias applied to the covariance plug-in.
                const CovMatrix sigma = CovMatrix::equicorrelated(p, rho);
                const Matrix xg = sample_mvn(std::vector<double>(p, 0.0), sigma,
                                             pt.n, derive_seed(res.seed_used, 4));
                const double scale =
                    (cfg.fission_mode == FissionMode::ConditionalOracle ||
                     std::isnan(pt.bias))
                        ? 1.0
                        : 1.0 + pt.bias;
                const ScalePlugin gplugin =
                    ScalePlugin::marginal_cov(sigma.scaled(scale));
                const double tau_fission =
                    std::sqrt((1.0 - pt.tau) / pt.tau); // same information split
                const FissionPair gpair = gaussian_fission(
                    xg, tau_fission, gplugin, derive_seed(res.seed_used, 5));
                const detail::ScopeOutcome og = detail::cluster_and_test(
                    cfg, gpair.x1, gpair.x2, ones, 1, derive_seed(res.seed_used, 6));
                res.p_values_control = og.p_values;
                break;
            }
        }
    } catch (const std::exception& e) {
        res.failed = true;
        res.error = e.what();
    }
    return res;
}

inline ExperimentDetail run_experiment_detailed(const ScenarioConfig& cfg,
                                                std::size_t workers = 0) {
    cfg.validate();
    ExperimentDetail detail;
    detail.cfg = cfg;
    detail.grid = detail::build_grid(cfg);
    const std::size_t n_points = detail.grid.size();
    const std::size_t R = cfg.replicates;
    const std::size_t n_tasks = n_points * R;
    detail.results.assign(n_points, std::vector<ReplicateResult>(R));

    if (workers == 0) workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min(workers, n_tasks);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= n_tasks) break;
            const std::size_t point = t / R;
            const std::size_t r = t % R;
            detail.results[point][r] = run_replicate(cfg, detail.grid[point], r);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return detail;
}

namespace detail {

inline SummaryRow base_row(const ScenarioConfig& cfg, const GridPoint& pt) {
    SummaryRow row;
    row.scenario = cfg.name;
    row.kind = kind_name(cfg.kind);
    row.tau = pt.tau;
    row.n = pt.n;
    row.bias = pt.bias;
    row.rho = pt.rho;
    row.mode = mode_name(cfg.fission_mode);
    row.test = test_name(cfg.test);
    row.replicates = cfg.replicates;
    row.seed = cfg.master_seed.value;
    return row;
}

inline void add_rejection_row(std::vector<SummaryRow>& rows, SummaryRow base,
                              const std::string& metric,
                              const std::vector<double>& pvals, double alpha,
                              std::size_t R) {
    if (pvals.empty()) return;
    const double rate = rejection_rate(pvals, alpha);
    base.metric = metric;
    base.value = rate;
    base.se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(R));
    rows.push_back(std::move(base));
}

} // namespace detail

// Deterministic aggregation in grid-point order; independent of how many
// workers produced the results.
inline ExperimentSummary summarize(const ExperimentDetail& detail) {
    const ScenarioConfig& cfg = detail.cfg;
    ExperimentSummary summary;
    for (std::size_t pi = 0; pi < detail.grid.size(); ++pi) {
        const GridPoint& pt = detail.grid[pi];
        const auto& reps = detail.results[pi];

        std::vector<double> pooled, pooled_control, pooled_h0, pooled_h1, aris;
        std::size_t failures = 0;
        for (const auto& r : reps) {
            if (r.failed) {
                ++failures;
                continue;
            }
            for (std::size_t j = 0; j < r.p_values.size(); ++j) {
                pooled.push_back(r.p_values[j]);
                if (cfg.kind == ScenarioKind::TwoPopulationSynthetic) {
                    if (j < cfg.h0_genes)
                        pooled_h0.push_back(r.p_values[j]);
                    else
                        pooled_h1.push_back(r.p_values[j]);
                }
            }
            for (double p : r.p_values_control) pooled_control.push_back(p);
            if (!std::isnan(r.ari)) aris.push_back(r.ari);
        }
        const std::size_t R = reps.size();

        if (cfg.kind == ScenarioKind::TwoPopulationSynthetic) {
            detail::add_rejection_row(summary.rows, detail::base_row(cfg, pt),
                                      "rejection_h0", pooled_h0, cfg.alpha, R);
            detail::add_rejection_row(summary.rows, detail::base_row(cfg, pt),
                                      "rejection_h1", pooled_h1, cfg.alpha, R);
        } else {
            const char* metric =
                cfg.kind == ScenarioKind::IdealGaussian ? "power" : "type1";
            detail::add_rejection_row(summary.rows, detail::base_row(cfg, pt), metric,
                                      pooled, cfg.alpha, R);
            detail::add_rejection_row(summary.rows, detail::base_row(cfg, pt),
                                      "type1_gauss_control", pooled_control,
                                      cfg.alpha, R);
        }
        if (!aris.empty()) {
            SummaryRow row = detail::base_row(cfg, pt);
            row.metric = "ari_mean";
            row.value = mean_of(aris);
            row.se = std::sqrt(variance_of(aris) / static_cast<double>(aris.size()));
            summary.rows.push_back(std::move(row));
        }
        // Diagnostic for the equal-cluster-size assumption behind the
        // analytic Type I curves: |n1 - n2| / (n1 + n2) of the tested pair.
        std::vector<double> imbalances;
        for (const auto& r : reps) {
            if (r.failed || r.cluster_sizes.size() != 2) continue;
            const double a = static_cast<double>(r.cluster_sizes[0]);
            const double b = static_cast<double>(r.cluster_sizes[1]);
            if (a + b > 0.0) imbalances.push_back(std::abs(a - b) / (a + b));
        }
        if (!imbalances.empty()) {
            SummaryRow row = detail::base_row(cfg, pt);
            row.metric = "cluster_imbalance_mean";
            row.value = mean_of(imbalances);
            row.se = std::sqrt(variance_of(imbalances) /
                               static_cast<double>(imbalances.size()));
            summary.rows.push_back(std::move(row));
        }
        if (failures > 0) {
            SummaryRow row = detail::base_row(cfg, pt);
            row.metric = "failed_replicates";
            row.value = static_cast<double>(failures);
            row.se = 0.0;
            summary.rows.push_back(std::move(row));
        }
    }
    return summary;
}

inline ExperimentSummary run_experiment(const ScenarioConfig& cfg,
                                        std::size_t workers = 0) {
    return summarize(run_experiment_detailed(cfg, workers));
}

// ---- builtin scenarios -------------------------------------------------------

namespace detail {

inline MixtureSpec gaussian_mixture_spec(
    std::vector<std::vector<double>> means, std::vector<double> vars,
    std::vector<double> weights) {
    MixtureSpec spec;
    spec.family = Family::Gaussian;
    spec.weights = std::move(weights);
    for (std::size_t g = 0; g < means.size(); ++g) {
        GaussianComponent c;
        c.cov = CovMatrix::scaled_identity(means[g].size(), vars[g]);
        c.mean = std::move(means[g]);
        spec.gaussian.push_back(std::move(c));
    }
    return spec;
}

} // namespace detail

// Fully populated configurations for the built-in experiments. Grids are
// config fields, not constants; CLI flags and JSON configs can override them.
inline std::vector<ScenarioConfig> builtin_scenarios() {
    std::vector<ScenarioConfig> out;

    { // Well-separated three-component Gaussian mixture; matched-pair power.
        ScenarioConfig cfg;
        cfg.name = "fig1_ideal";
        cfg.kind = ScenarioKind::IdealGaussian;
        cfg.mixture = detail::gaussian_mixture_spec(
            {{0.0, 0.0}, {5.0, 5.0}, {-5.0, 5.0}}, {1.0, 1.0, 1.0},
            {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
        cfg.tau_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8,
                        0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
        cfg.n_grid = {100, 500};
        cfg.k_cluster = 3;
        cfg.fission_mode = FissionMode::ConditionalOracle;
        cfg.test = TestMethod::TPooled;
        cfg.target_components = {1, 2};
        out.push_back(std::move(cfg));
    }
    { // One standard bivariate Gaussian forced into two clusters; the bias
      // grid scales the covariance plug-in of the marginal arm.
        ScenarioConfig cfg;
        cfg.name = "fig2_adverse";
        cfg.kind = ScenarioKind::AdverseGaussian;
        cfg.mixture = detail::gaussian_mixture_spec({{0.0, 0.0}}, {1.0}, {1.0});
        cfg.tau_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8,
                        0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
        cfg.n_grid = {100, 500};
        cfg.bias_grid = {0.0, 0.2, 0.5, 1.0};
        cfg.k_cluster = 2;
        cfg.fission_mode = FissionMode::Marginal;
        cfg.test = TestMethod::TPooled;
        out.push_back(std::move(cfg));
    }
    { // 1-D Type I error against the relative bias of the variance plug-in.
        ScenarioConfig cfg;
        cfg.name = "figS1_bias";
        cfg.kind = ScenarioKind::BiasSweep;
        cfg.mixture = detail::gaussian_mixture_spec({{0.0}}, {1.0}, {1.0});
        cfg.tau_grid = {1.0};
        cfg.n_grid = {50, 100, 200, 500, 1000};
        cfg.bias_grid = {-0.5, -0.2, 0.0, 0.2, 0.5};
        cfg.k_cluster = 2;
        cfg.fission_mode = FissionMode::Marginal;
        cfg.test = TestMethod::TPooled;
        out.push_back(std::move(cfg));
    }
    { // Two-component NB mixture split into three clusters.
        ScenarioConfig cfg;
        cfg.name = "fig3_nb";
        cfg.kind = ScenarioKind::NBMixtureSplit;
        cfg.mixture.family = Family::NegBin;
        cfg.mixture.weights = {0.5, 0.5};
        cfg.mixture.negbin = {NBComponent{{5.0}, {5.0}},
                              NBComponent{{60.0}, {40.0}}};
        cfg.tau_grid = {0.5};
        cfg.n_grid = {100};
        cfg.k_cluster = 3;
        cfg.fission_mode = FissionMode::Marginal;
        cfg.test = TestMethod::WilcoxonNormalApprox;
        out.push_back(std::move(cfg));
    }
    { // Correlated NB columns, univariate thinning vs the multivariate
      // Gaussian fission control arm.
        ScenarioConfig cfg;
        cfg.name = "fig3c_multivariate";
        cfg.kind = ScenarioKind::NBCorrelated;
        cfg.mixture.family = Family::NegBin;
        cfg.mixture.weights = {1.0};
        cfg.mixture.negbin = {NBComponent{std::vector<double>(50, 10.0),
                                          std::vector<double>(50, 10.0)}};
        cfg.tau_grid = {0.5};
        cfg.n_grid = {100};
        cfg.rho_grid = {0.0, 0.3, 0.6, 0.9};
        cfg.bias_grid = {-0.5, -0.25, 0.0, 0.25, 0.5};
        cfg.k_cluster = 2;
        cfg.fission_mode = FissionMode::Marginal;
        cfg.test = TestMethod::WilcoxonNormalApprox;
        out.push_back(std::move(cfg));
    }
    { // Synthetic two-population NB data: 250 null + 250 shifted genes,
      // univariate conditional thinning.
        ScenarioConfig cfg;
        cfg.name = "a5_twopop";
        cfg.kind = ScenarioKind::TwoPopulationSynthetic;
        cfg.mixture.family = Family::NegBin;
        cfg.mixture.weights = {0.5, 0.5};
        const std::size_t h0 = 250, h1 = 250, p = h0 + h1;
        NBComponent pop1, pop2;
        pop1.mu.resize(p);
        pop1.theta.resize(p);
        pop2.mu.resize(p);
        pop2.theta.resize(p);
        Rng gen(Seed{0xA5A5A5A5ULL});
        for (std::size_t j = 0; j < p; ++j) {
            const double mu = std::exp(std::log(2.0) +
                                       gen.next_double() * (std::log(40.0) - std::log(2.0)));
            const double theta = std::exp(std::log(5.0) +
                                          gen.next_double() * (std::log(50.0) - std::log(5.0)));
            pop1.mu[j] = mu;
            pop1.theta[j] = theta;
            if (j < h0) {
                pop2.mu[j] = mu;
                pop2.theta[j] = theta;
            } else {
                pop2.mu[j] = 3.0 * mu;
                pop2.theta[j] = theta * (0.5 + gen.next_double());
            }
        }
        cfg.mixture.negbin = {std::move(pop1), std::move(pop2)};
        cfg.h0_genes = h0;
        cfg.tau_grid = {0.5};
        cfg.n_grid = {200};
        cfg.k_cluster = 2;
        cfg.fission_mode = FissionMode::ConditionalOracle;
        cfg.test = TestMethod::WilcoxonNormalApprox;
        cfg.clustering_scope = ClusteringScope::Univariate;
        cfg.replicates = 200;
        out.push_back(std::move(cfg));
    }
    return out;
}

inline ScenarioConfig builtin_scenario(const std::string& name) {
    for (auto& cfg : builtin_scenarios())
        if (cfg.name == name) return cfg;
    throw ConfigError("unknown builtin scenario: " + name);
}

} // namespace fissionlab

#endif
