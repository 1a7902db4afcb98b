#include <catch2/catch.hpp>

#include <cmath>

#include <fissionlab/decompose.hpp>
#include <fissionlab/estimate.hpp>
#include <fissionlab/theory.hpp>

#include "test_support.hpp"

using namespace fissionlab;

namespace {

Matrix poisson_matrix(double lambda, std::size_t n, std::size_t p, Seed seed) {
    Rng rng(seed);
    Matrix x(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            x(i, j) = static_cast<double>(poisson_draw(rng, lambda));
    return x;
}

Matrix nb_matrix(double mu, double theta, std::size_t n, Seed seed) {
    Matrix x(n, 1);
    const std::vector<double> v = sample_nb(mu, theta, n, seed);
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = v[i];
    return x;
}

void check_cov_entry(const Matrix& x1, const Matrix& x2, std::size_t j, std::size_t k,
                     double expected) {
    const Matrix c = cross_covariance(x1, x2);
    const auto a = x1.col(j);
    const auto b = x2.col(k);
    const double se = testsupport::cov_entry_se(a, b);
    INFO("cov(" << j << "," << k << ") = " << c(j, k) << " expected " << expected
                << " +- " << 3.0 * se);
    CHECK(std::abs(c(j, k) - expected) < 3.0 * se);
}

} // namespace

TEST_CASE("gaussian fission reconstruction identity") {
    const Matrix x = sample_mvn({1.0, -2.0}, CovMatrix::identity(2), 200, Seed{3});
    const auto pair =
        gaussian_fission(x, 2.0, ScalePlugin::marginal_cov(CovMatrix::identity(2)),
                         Seed{5});
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double recon = (pair.x1(i, j) + 4.0 * pair.x2(i, j)) / 5.0;
            REQUIRE(std::abs(recon - x(i, j)) < 1e-9);
        }
}

TEST_CASE("gaussian fission with the true covariance decouples the parts") {
    const std::size_t n = 100000;
    Matrix sigma_m(2, 2);
    sigma_m(0, 0) = 2.0;
    sigma_m(1, 1) = 1.0;
    sigma_m(0, 1) = sigma_m(1, 0) = 0.7;
    const CovMatrix sigma(std::move(sigma_m));
    const Matrix x = sample_mvn({0.0, 0.0}, sigma, n, Seed{7});
    const auto pair = gaussian_fission(x, 1.0, ScalePlugin::marginal_cov(sigma), Seed{9});
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k)
            check_cov_entry(pair.x1, pair.x2, j, k, 0.0);
}

TEST_CASE("gaussian fission with a biased plug-in tracks Sigma - Sigma_hat") {
    const std::size_t n = 100000;
    const CovMatrix sigma = CovMatrix::identity(1);
    const Matrix x = sample_mvn({0.0}, sigma, n, Seed{11});
    // Three-point plug-in grid around the truth.
    for (double c : {0.5, 1.0, 1.8}) {
        const auto pair = gaussian_fission(
            x, 1.0, ScalePlugin::marginal_cov(sigma.scaled(c)), Seed{13});
        const double expected = cov_prop1(sigma, sigma.scaled(c))(0, 0);
        check_cov_entry(pair.x1, pair.x2, 0, 0, expected);
    }
}

TEST_CASE("gaussian fission label and PSD errors") {
    const Matrix x = sample_mvn({0.0}, CovMatrix::identity(1), 10, Seed{15});
    REQUIRE_THROWS_AS(
        gaussian_fission(x, 1.0,
                         ScalePlugin::conditional_cov({CovMatrix::identity(1)},
                                                      std::vector<int>{1, 2, 1}),
                         Seed{1}),
        LabelError);
    std::vector<int> bad(10, 2);
    REQUIRE_THROWS_AS(
        gaussian_fission(x, 1.0,
                         ScalePlugin::conditional_cov({CovMatrix::identity(1)}, bad),
                         Seed{1}),
        LabelError);
    REQUIRE_THROWS_AS(gaussian_fission(x, 0.0,
                                       ScalePlugin::marginal_cov(CovMatrix::identity(1)),
                                       Seed{1}),
                      ParameterError);
    Matrix notpsd(2, 2);
    notpsd(0, 0) = notpsd(1, 1) = 1.0;
    notpsd(0, 1) = notpsd(1, 0) = 2.0;
    const Matrix x2 = sample_mvn({0.0, 0.0}, CovMatrix::identity(2), 10, Seed{17});
    REQUIRE_THROWS_AS(
        gaussian_fission(x2, 1.0,
                         ScalePlugin::marginal_cov(CovMatrix(std::move(notpsd))),
                         Seed{1}),
        DecompositionError);
}

TEST_CASE("conditional covcheck reproduces the covariance table") {
    MixtureSpec spec;
    spec.family = Family::Gaussian;
    spec.weights = {0.5, 0.5};
    spec.gaussian = {GaussianComponent{{-3.0}, CovMatrix::identity(1)},
                     GaussianComponent{{3.0}, CovMatrix::identity(1)}};
    const std::size_t n = 100000;

    const auto cond = gaussian_fission_conditional_covcheck(spec, 1.0, n, Seed{19},
                                                            PluginMode::Conditional);
    // Within-component cross-covariance vanishes for every component.
    for (std::size_t g = 0; g < 2; ++g) {
        const double se =
            11.0 / std::sqrt(static_cast<double>(cond.counts[g])); // generous bound
        CHECK(std::abs(cond.within_cov[g](0, 0)) < 3.0 * se);
    }
    // Marginal covariance equals the between-component spread (here 9).
    const double eq1 = cov_conditional_fission(spec)(0, 0);
    REQUIRE(eq1 == Approx(9.0));
    CHECK(std::abs(cond.marginal_cov(0, 0) - eq1) < 0.35);

    const auto marg = gaussian_fission_conditional_covcheck(spec, 1.0, n, Seed{23},
                                                            PluginMode::Marginal);
    const double eq2 =
        cov_marginal_fission_conditional(spec.gaussian[0].cov, spec.marginal_cov())(0, 0);
    REQUIRE(eq2 == Approx(-9.0));
    for (std::size_t g = 0; g < 2; ++g) {
        const double se = 22.0 / std::sqrt(static_cast<double>(marg.counts[g]));
        CHECK(std::abs(marg.within_cov[g](0, 0) - eq2) < 3.0 * se);
    }
    CHECK(std::abs(marg.marginal_cov(0, 0)) < 0.35);
}

TEST_CASE("gaussian thinning: defining identity and covariance law") {
    const std::size_t n = 100000;
    const CovMatrix sigma = CovMatrix::identity(1);
    const Matrix x = sample_mvn({0.0}, sigma, n, Seed{29});

    REQUIRE_THROWS_AS(gaussian_thin(x, 0.0, ScalePlugin::marginal_cov(sigma), Seed{1}),
                      ParameterError);
    REQUIRE_THROWS_AS(gaussian_thin(x, 1.0, ScalePlugin::marginal_cov(sigma), Seed{1}),
                      ParameterError);

    const auto pair = gaussian_thin(x, 0.5, ScalePlugin::marginal_cov(sigma), Seed{31});
    for (std::size_t i = 0; i < n; ++i) {
        // x2 is defined as x - x1; in floats the sum reproduces x to one or
        // two ulps, and the defining form is bit-exact.
        REQUIRE(pair.x2(i, 0) == x(i, 0) - pair.x1(i, 0));
        REQUIRE(pair.x1(i, 0) + pair.x2(i, 0) ==
                Approx(x(i, 0)).margin(4e-16 * std::max(1.0, std::abs(x(i, 0)))));
    }
    check_cov_entry(pair.x1, pair.x2, 0, 0, 0.0);

    const auto biased =
        gaussian_thin(x, 0.5, ScalePlugin::marginal_cov(sigma.scaled(2.0)), Seed{37});
    // tau2(1-tau2)(Sigma - 2 Sigma) = -0.25 Sigma.
    check_cov_entry(biased.x1, biased.x2, 0, 0, -0.25);
}

TEST_CASE("poisson thinning: exact split and independence") {
    Matrix zero(1, 1);
    const auto z = poisson_thin(zero, 0.4, Seed{1});
    REQUIRE(z.x1(0, 0) == 0.0);
    REQUIRE(z.x2(0, 0) == 0.0);

    const std::size_t n = 100000;
    const Matrix x = poisson_matrix(8.0, n, 1, Seed{41});
    const auto pair = poisson_thin(x, 0.25, Seed{43});
    for (std::size_t i = 0; i < n; ++i)
        REQUIRE(pair.x1(i, 0) + pair.x2(i, 0) == x(i, 0));
    const auto x1 = pair.x1.col(0);
    const auto x2 = pair.x2.col(0);
    CHECK(std::abs(mean_of(x1) - 2.0) < 3.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(mean_of(x2) - 6.0) < 3.0 * std::sqrt(6.0 / n));
    CHECK(std::abs(correlation_of(x1, x2)) < 3.0 / std::sqrt(static_cast<double>(n)));

    const auto all = poisson_thin(x, 1.0, Seed{47});
    REQUIRE(all.x1 == x);
    for (double v : all.x2.data()) REQUIRE(v == 0.0);

    Matrix neg(1, 1);
    neg(0, 0) = -1.0;
    REQUIRE_THROWS_AS(poisson_thin(neg, 0.5, Seed{1}), NegativeCountError);
}

TEST_CASE("nb thinning: covariance law across a plug-in grid") {
    const std::size_t n = 100000;
    const Matrix x = nb_matrix(5.0, 5.0, n, Seed{53});
    for (double theta_hat : {2.0, 5.0, 20.0}) {
        const auto pair =
            nb_thin(x, 0.5, ScalePlugin::marginal_theta(theta_hat), Seed{59});
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(pair.x1(i, 0) + pair.x2(i, 0) == x(i, 0));
        check_cov_entry(pair.x1, pair.x2, 0, 0, cov_nb_thin(5.0, 5.0, theta_hat, 0.5));
    }
    REQUIRE_THROWS_AS(nb_thin(x, 0.5, ScalePlugin::marginal_theta(-1.0), Seed{1}),
                      ParameterError);
    REQUIRE_THROWS_AS(nb_thin(x, 0.0, ScalePlugin::marginal_theta(5.0), Seed{1}),
                      ParameterError);
    REQUIRE_THROWS_AS(nb_thin(x, 1.0, ScalePlugin::marginal_theta(5.0), Seed{1}),
                      ParameterError);
    REQUIRE_THROWS_AS(nb_thin(x, 0.5,
                              ScalePlugin::conditional_theta({{5.0}}, {1, 2}), Seed{1}),
                      LabelError);
}

TEST_CASE("independence under the true scale parameter, every method") {
    const std::size_t n = 100000;
    const double bound = 3.0 / std::sqrt(static_cast<double>(n));

    const CovMatrix sigma = CovMatrix::equicorrelated(2, 0.4, 1.5);
    const Matrix g = sample_mvn({0.0, 0.0}, sigma, n, Seed{61});
    const auto fis = gaussian_fission(g, 0.7, ScalePlugin::marginal_cov(sigma), Seed{63});
    const auto thin = gaussian_thin(g, 0.3, ScalePlugin::marginal_cov(sigma), Seed{67});
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::abs(correlation_of(fis.x1.col(j), fis.x2.col(j))) < bound);
        CHECK(std::abs(correlation_of(thin.x1.col(j), thin.x2.col(j))) < bound);
    }

    const Matrix pois = poisson_matrix(6.0, n, 1, Seed{69});
    const auto ps = poisson_thin(pois, 0.5, Seed{71});
    CHECK(std::abs(correlation_of(ps.x1.col(0), ps.x2.col(0))) < bound);

    const Matrix nb = nb_matrix(5.0, 5.0, n, Seed{73});
    const auto ns = nb_thin(nb, 0.5, ScalePlugin::marginal_theta(5.0), Seed{79});
    CHECK(std::abs(correlation_of(ns.x1.col(0), ns.x2.col(0))) < bound);
}

TEST_CASE("nb thinning leaks cross-variable correlation") {
    const std::size_t n = 20000;
    double previous = 0.0;
    for (double rho : {0.3, 0.6, 0.9}) {
        const Matrix x = sample_correlated_nb(10.0, 10.0, rho, n, 2, Seed{83});
        const auto pair = nb_thin(x, 0.5, ScalePlugin::marginal_theta(10.0), Seed{89});
        const double leak = correlation_of(pair.x1.col(0), pair.x2.col(1));
        INFO("rho=" << rho << " leak=" << leak);
        CHECK(leak > 0.0);
        CHECK(leak > previous);
        previous = leak;
    }
}

TEST_CASE("conditional nb thinning uses per-component theta") {
    // Labels pick radically different thetas; with the right per-component
    // values both groups stay decoupled.
    const std::size_t n = 60000;
    Matrix x(2 * n, 1);
    std::vector<int> labels(2 * n);
    const std::vector<double> a = sample_nb(5.0, 2.0, n, Seed{97});
    const std::vector<double> b = sample_nb(5.0, 50.0, n, Seed{101});
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = a[i];
        labels[i] = 1;
        x(n + i, 0) = b[i];
        labels[n + i] = 2;
    }
    const auto pair = nb_thin(
        x, 0.5, ScalePlugin::conditional_theta({{2.0}, {50.0}}, labels), Seed{103});
    std::vector<double> x1a, x2a, x1b, x2b;
    for (std::size_t i = 0; i < n; ++i) {
        x1a.push_back(pair.x1(i, 0));
        x2a.push_back(pair.x2(i, 0));
        x1b.push_back(pair.x1(n + i, 0));
        x2b.push_back(pair.x2(n + i, 0));
    }
    const double bound = 3.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(correlation_of(x1a, x2a)) < bound);
    CHECK(std::abs(correlation_of(x1b, x2b)) < bound);
}
