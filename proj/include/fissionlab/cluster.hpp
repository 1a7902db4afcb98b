#ifndef FISSIONLAB_CLUSTER_HPP
#define FISSIONLAB_CLUSTER_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "fissionlab/errors.hpp"
#include "fissionlab/matrix.hpp"
#include "fissionlab/rng.hpp"

namespace fissionlab {

struct KMeansResult {
    std::vector<int> labels;   // 1-based cluster labels
    Matrix centers;            // k x p
    double inertia = 0.0;      // sum of squared distances to assigned center
    std::size_t n_iter = 0;
    std::size_t restarts_used = 0;
};

struct KMeansOptions {
    std::size_t restarts = 10;
    std::size_t max_iter = 300;
    double tol = 1e-6; // on squared center displacement
};

namespace detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

// k-means++: first center uniform, then D^2-weighted.
inline Matrix kmeanspp_init(const Matrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows(), p = x.cols();
    Matrix centers(k, p);
    const std::size_t first = static_cast<std::size_t>(rng.next_double() * n) % n;
    for (std::size_t j = 0; j < p; ++j) centers(0, j) = x(first, j);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(x.row(i), centers.row(0));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.next_double() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(rng.next_double() * n) % n;
        }
        for (std::size_t j = 0; j < p; ++j) centers(c, j) = x(pick, j);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], sq_dist(x.row(i), centers.row(c)));
    }
    return centers;
}

struct LloydRun {
    std::vector<int> labels0; // 0-based here
    Matrix centers;
    double inertia = 0.0;
    std::size_t n_iter = 0;
};

inline LloydRun lloyd(const Matrix& x, std::size_t k, const KMeansOptions& opt,
                      Rng rng) {
    const std::size_t n = x.rows(), p = x.cols();
    Matrix centers = kmeanspp_init(x, k, rng);
    std::vector<int> labels(n, 0);
    std::vector<double> counts(k);
    Matrix sums(k, p);
    double prev_inertia = std::numeric_limits<double>::infinity();
    std::size_t iter = 0;

    for (; iter < opt.max_iter; ++iter) {
        // Assignment; ties go to the lowest cluster index.
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_dist(x.row(i), centers.row(c));
                if (d < best) {
                    best = d;
                    arg = static_cast<int>(c);
                }
            }
            labels[i] = arg;
            inertia += best;
        }
        if (inertia > prev_inertia * (1.0 + 1e-12) + 1e-12)
            throw Error("kmeans: inertia increased across a Lloyd iteration");
        prev_inertia = inertia;

        // Means.
        counts.assign(k, 0.0);
        for (double& v : sums.data()) v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            counts[static_cast<std::size_t>(labels[i])] += 1.0;
            for (std::size_t j = 0; j < p; ++j)
                sums(static_cast<std::size_t>(labels[i]), j) += x(i, j);
        }

        // Empty-cluster repair: reseed at the point farthest from its
        // assigned center, one cluster at a time.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0.0) continue;
            double worst = -1.0;
            std::size_t donor = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = sq_dist(
                    x.row(i), centers.row(static_cast<std::size_t>(labels[i])));
                if (d > worst) {
                    worst = d;
                    donor = i;
                }
            }
            const std::size_t old = static_cast<std::size_t>(labels[donor]);
            counts[old] -= 1.0;
            for (std::size_t j = 0; j < p; ++j) sums(old, j) -= x(donor, j);
            labels[donor] = static_cast<int>(c);
            counts[c] = 1.0;
            for (std::size_t j = 0; j < p; ++j) sums(c, j) = x(donor, j);
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const double m = sums(c, j) / counts[c];
                const double d = m - centers(c, j);
                s += d * d;
                centers(c, j) = m;
            }
            shift = std::max(shift, s);
        }
        if (shift < opt.tol) {
            ++iter;
            break;
        }
    }

    // Final assignment against the converged centers.
    LloydRun run;
    run.centers = centers;
    run.n_iter = iter;
    run.labels0.resize(n);
    run.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double d = sq_dist(x.row(i), centers.row(c));
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        run.labels0[i] = arg;
        run.inertia += best;
    }
    return run;
}

} // namespace detail

// Lloyd iterations from k-means++ starts; best of opt.restarts runs by
// inertia, ties by restart index. Deterministic given the seed: every restart
// owns an independent derived substream.
inline KMeansResult kmeans(const Matrix& x, std::size_t k, Seed seed,
                           const KMeansOptions& opt = {}) {
    const std::size_t n = x.rows();
    if (k < 1) throw ParameterError("kmeans requires k >= 1");
    if (n < k) throw InsufficientDataError("kmeans requires n >= k");

    detail::LloydRun best;
    std::size_t best_restart = 0;
    bool have = false;
    const std::size_t restarts = std::max<std::size_t>(1, opt.restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
        detail::LloydRun run =
            detail::lloyd(x, k, opt, Rng(derive_seed(seed, 0x6b6d65616e73ULL, r)));
        if (!have || run.inertia < best.inertia) {
            best = std::move(run);
            best_restart = r;
            have = true;
        }
    }

    KMeansResult out;
    out.centers = std::move(best.centers);
    out.inertia = best.inertia;
    out.n_iter = best.n_iter;
    out.restarts_used = restarts;
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = best.labels0[i] + 1;
    (void)best_restart;
    return out;
}

} // namespace fissionlab

#endif
