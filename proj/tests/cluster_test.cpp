#include <catch2/catch.hpp>

#include <cmath>

#include <fissionlab/cluster.hpp>
#include <fissionlab/samplers.hpp>
#include <fissionlab/stattest.hpp>

using namespace fissionlab;

TEST_CASE("kmeans separates two tight pairs") {
    const Matrix x = Matrix::from_rows(
        {{0.0, 0.0}, {0.0, 0.1}, {10.0, 10.0}, {10.0, 10.1}});
    const KMeansResult km = kmeans(x, 2, Seed{7});
    REQUIRE(km.labels[0] == km.labels[1]);
    REQUIRE(km.labels[2] == km.labels[3]);
    REQUIRE(km.labels[0] != km.labels[2]);
    const std::vector<int> truth{1, 1, 2, 2};
    REQUIRE(adjusted_rand_index(km.labels, truth) == Approx(1.0));
}

TEST_CASE("kmeans boundary on 1-D normal data sits near the sample mean") {
    const std::size_t n = 10000;
    const Matrix x = sample_mvn({0.0}, CovMatrix::identity(1), n, Seed{11});
    const KMeansResult km = kmeans(x, 2, Seed{13});
    const double boundary = 0.5 * (km.centers(0, 0) + km.centers(1, 0));
    const double mean = mean_of(x.col(0));
    CHECK(std::abs(boundary - mean) < 0.05);
}

TEST_CASE("kmeans recovers a well-separated mixture almost perfectly") {
    MixtureSpec spec;
    spec.family = Family::Gaussian;
    spec.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    spec.gaussian = {GaussianComponent{{0.0, 0.0}, CovMatrix::identity(2)},
                     GaussianComponent{{5.0, 5.0}, CovMatrix::identity(2)},
                     GaussianComponent{{-5.0, 5.0}, CovMatrix::identity(2)}};
    const LabeledSample s = sample_mixture(spec, 600, Seed{17});
    // Decomposition at small tau barely perturbs the data.
    Rng noise(Seed{19});
    Matrix x1 = s.data;
    for (double& v : x1.data()) v += 0.1 * normal_draw(noise);
    const KMeansResult km = kmeans(x1, 3, Seed{23});
    CHECK(adjusted_rand_index(km.labels, s.labels) > 0.95);
}

TEST_CASE("kmeans is deterministic and invariant in the options") {
    const Matrix x = sample_mvn({0.0, 0.0}, CovMatrix::identity(2), 500, Seed{29});
    const KMeansResult a = kmeans(x, 3, Seed{31});
    const KMeansResult b = kmeans(x, 3, Seed{31});
    REQUIRE(a.labels == b.labels);
    REQUIRE(a.inertia == b.inertia);
    REQUIRE(a.restarts_used == 10);

    // More restarts can only improve (or keep) the best inertia.
    KMeansOptions more;
    more.restarts = 25;
    const KMeansResult c = kmeans(x, 3, Seed{31}, more);
    REQUIRE(c.inertia <= a.inertia + 1e-12);
}

TEST_CASE("kmeans keeps every cluster nonempty and labels at argmin") {
    const Matrix x = sample_mvn({0.0}, CovMatrix::identity(1), 50, Seed{37});
    const KMeansResult km = kmeans(x, 8, Seed{41});
    std::vector<std::size_t> counts(8, 0);
    for (int l : km.labels) {
        REQUIRE(l >= 1);
        REQUIRE(l <= 8);
        ++counts[static_cast<std::size_t>(l - 1)];
    }
    for (std::size_t c = 0; c < 8; ++c) REQUIRE(counts[c] > 0);

    // labels[i] is the nearest center, ties to the lowest index.
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t c = 0; c < 8; ++c) {
            const double d = (x(i, 0) - km.centers(c, 0)) * (x(i, 0) - km.centers(c, 0));
            if (d < best) {
                best = d;
                arg = static_cast<int>(c) + 1;
            }
        }
        REQUIRE(km.labels[i] == arg);
    }
}

TEST_CASE("kmeans input validation") {
    REQUIRE_THROWS_AS(kmeans(Matrix(2, 1), 3, Seed{1}), InsufficientDataError);
    REQUIRE_THROWS_AS(kmeans(Matrix(2, 1), 0, Seed{1}), ParameterError);
}

TEST_CASE("inertia equals the sum of squared distances to assigned centers") {
    const Matrix x = sample_mvn({0.0, 0.0}, CovMatrix::identity(2), 300, Seed{43});
    const KMeansResult km = kmeans(x, 4, Seed{47});
    double inertia = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const std::size_t c = static_cast<std::size_t>(km.labels[i] - 1);
        for (std::size_t j = 0; j < 2; ++j) {
            const double d = x(i, j) - km.centers(c, j);
            inertia += d * d;
        }
    }
    REQUIRE(km.inertia == Approx(inertia).epsilon(1e-12));
}
