#ifndef FISSIONLAB_RNG_HPP
#define FISSIONLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fissionlab/errors.hpp"

namespace fissionlab {

// Seed for the counter-based generator. Same seed + same call sequence gives
// a bit-identical stream on every platform and thread layout.
struct Seed {
    std::uint64_t value = 0;
};

namespace detail {
inline constexpr std::uint64_t GOLDEN_GAMMA = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

// Derives an independent substream seed from (master, keys...). Used to give
// every replicate / restart / row its own stream so parallel and serial runs
// agree bit-for-bit.
inline Seed derive_seed(Seed master, std::uint64_t k0, std::uint64_t k1 = 0,
                        std::uint64_t k2 = 0) {
    std::uint64_t h = master.value;
    h = detail::mix64((h ^ k0) + detail::GOLDEN_GAMMA);
    h = detail::mix64((h ^ k1) + 3 * detail::GOLDEN_GAMMA);
    h = detail::mix64((h ^ k2) + 5 * detail::GOLDEN_GAMMA);
    return Seed{h};
}

// SplitMix64: a counter with a strong output mix. State advances by a fixed
// increment, so streams can be split freely via derive_seed.
class Rng {
public:
    Rng() : state_(0) {}
    explicit Rng(Seed s) : state_(s.value) {}

    std::uint64_t next_u64() {
        state_ += detail::GOLDEN_GAMMA;
        return detail::mix64(state_);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1): never returns either endpoint.
    double next_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// ---- scalar variates -------------------------------------------------------

// Marsaglia polar method; no cached second value.
inline double normal_draw(Rng& rng) {
    double u, v, s;
    do {
        u = 2.0 * rng.next_double() - 1.0;
        v = 2.0 * rng.next_double() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

// Marsaglia-Tsang squeeze for shape >= 1, with the power boost for shape < 1.
inline double gamma_draw(Rng& rng, double shape, double scale = 1.0) {
    if (shape <= 0.0 || scale <= 0.0)
        throw ParameterError("gamma_draw requires positive shape and scale");
    if (shape < 1.0) {
        const double u = rng.next_open();
        return gamma_draw(rng, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal_draw(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_open();
        if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

inline double beta_draw(Rng& rng, double a, double b) {
    if (a <= 0.0 || b <= 0.0)
        throw ParameterError("beta_draw requires positive shape parameters");
    const double x = gamma_draw(rng, a);
    const double y = gamma_draw(rng, b);
    return x / (x + y);
}

namespace detail {

// BINV inversion; valid while n*min(p,1-p) stays small enough that (1-p)^n
// does not underflow.
inline long long binomial_inversion(Rng& rng, long long n, double p) {
    const double q = 1.0 - p;
    const double s = p / q;
    const double a = static_cast<double>(n + 1) * s;
    double r = std::pow(q, static_cast<double>(n));
    double u = rng.next_double();
    long long x = 0;
    while (u > r) {
        u -= r;
        ++x;
        if (x > n) { x = n; break; }
        r *= a / static_cast<double>(x) - s;
    }
    return x;
}

} // namespace detail

inline long long binomial_draw(Rng& rng, long long n, double p) {
    if (n < 0) throw ParameterError("binomial_draw requires n >= 0");
    if (p < 0.0 || p > 1.0) throw ParameterError("binomial_draw requires p in [0,1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    const bool flip = p > 0.5;
    const double pp = flip ? 1.0 - p : p;
    long long x;
    if (static_cast<double>(n) * pp <= 30.0) {
        x = detail::binomial_inversion(rng, n, pp);
    } else {
        // Exact split keeps the leaf inversion inside its safe range.
        const long long h = n / 2;
        x = binomial_draw(rng, h, pp) + binomial_draw(rng, n - h, pp);
    }
    return flip ? n - x : x;
}

inline long long poisson_draw(Rng& rng, double lambda) {
    if (lambda < 0.0) throw ParameterError("poisson_draw requires lambda >= 0");
    if (lambda == 0.0) return 0;
    if (lambda < 30.0) {
        // Multiplication method.
        const double limit = std::exp(-lambda);
        double prod = rng.next_double();
        long long k = 0;
        while (prod > limit) {
            ++k;
            prod *= rng.next_double();
        }
        return k;
    }
    // Split recursively; sums of independent Poissons are Poisson.
    const double half = lambda / 2.0;
    return poisson_draw(rng, half) + poisson_draw(rng, lambda - half);
}

inline long long betabin_draw(Rng& rng, long long x, double a, double b) {
    if (a <= 0.0 || b <= 0.0)
        throw ParameterError("betabin_draw requires positive shape parameters");
    if (x < 0) throw ParameterError("betabin_draw requires x >= 0");
    if (x == 0) return 0;
    return binomial_draw(rng, x, beta_draw(rng, a, b));
}

// Gamma-mixed Poisson draw with mean mu and Var = mu + mu^2/theta.
inline long long negbin_draw(Rng& rng, double mu, double theta) {
    if (mu <= 0.0 || theta <= 0.0)
        throw ParameterError("negbin_draw requires positive mu and theta");
    const double lambda = gamma_draw(rng, theta, mu / theta);
    return poisson_draw(rng, lambda);
}

// Index in [0, weights.size()) with the given probabilities. The
// single-outcome case consumes no randomness.
inline std::size_t categorical_draw(Rng& rng, std::span<const double> weights) {
    if (weights.size() <= 1) return 0;
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t g = 0; g + 1 < weights.size(); ++g) {
        acc += weights[g];
        if (u < acc) return g;
    }
    return weights.size() - 1;
}

} // namespace fissionlab

#endif
