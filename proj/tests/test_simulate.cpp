#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ivreg/errors.hpp"
#include "ivreg/rng.hpp"
#include "ivreg/simulate.hpp"

using namespace ivreg;

TEST_CASE("uniform, normal, gamma, and beta draws have the right moments") {
    Rng rng(2024);
    const int n = 40000;

    double umin = 1.0, umax = 0.0, usum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        usum += u;
    }
    CHECK(umin >= 0.0);
    CHECK(umax < 1.0);
    CHECK(usum / n == doctest::Approx(0.5).epsilon(0.02));

    double nsum = 0.0, nsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        nsum += x;
        nsq += x * x;
    }
    CHECK(nsum / n == doctest::Approx(0.0).epsilon(1).scale(0.02));
    CHECK(nsq / n == doctest::Approx(1.0).epsilon(0.03));

    double gsum = 0.0;
    for (int i = 0; i < n; ++i) gsum += rng.gamma(2.5);
    CHECK(gsum / n == doctest::Approx(2.5).epsilon(0.03));
    double gsmall = 0.0;
    for (int i = 0; i < n; ++i) gsmall += rng.gamma(0.4);  // boosted branch
    CHECK(gsmall / n == doctest::Approx(0.4).epsilon(0.05));

    double bsum = 0.0, bsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double b = rng.beta(3.0, 7.0);
        bsum += b;
        bsq += b * b;
    }
    const double bmean = bsum / n;
    CHECK(bmean == doctest::Approx(0.3).epsilon(0.02));
    CHECK(std::sqrt(bsq / n - bmean * bmean) ==
          doctest::Approx(0.13816985594155148).epsilon(0.05));

    CHECK_THROWS_AS(rng.gamma(0.0), DomainError);
}

TEST_CASE("identical seeds reproduce the random stream bit for bit") {
    Rng a(5), b(5);
    for (int i = 0; i < 200; ++i) {
        CHECK(a.uniform01() == b.uniform01());
        CHECK(a.normal() == b.normal());
        CHECK(a.gamma(1.7) == b.gamma(1.7));
    }
}

TEST_CASE("default truth uses the documented block pattern") {
    const Truth t = default_truth();
    REQUIRE(t.beta.size() == 300);
    REQUIRE(t.Gamma.rows() == 400);
    REQUIRE(t.Gamma.cols() == 300);

    for (Eigen::Index j = 0; j < 7; ++j) CHECK(t.beta[j] == 1.0);
    for (Eigen::Index j = 7; j < 292; ++j) CHECK(t.beta[j] == 0.0);
    for (Eigen::Index j = 292; j < 300; ++j) CHECK(t.beta[j] == -0.5);
    CHECK(t.beta_support.count() == 15);

    CHECK((t.Gamma.row(0).array() == 0.01).all());
    for (Eigen::Index i = 397; i < 400; ++i)
        CHECK((t.Gamma.row(i).array() == -0.005).all());
    CHECK((t.Gamma.middleRows(1, 396).array() == 0.0).all());
    CHECK(t.gamma_support.count() == 1200);
}

TEST_CASE("scaled truth rounds the block sizes from the dimensions") {
    const Truth t = scaled_truth(100, 120);
    REQUIRE(t.beta.size() == 100);
    REQUIRE(t.Gamma.rows() == 120);
    const Eigen::Index ones = (t.beta.array() == 1.0).count();
    const Eigen::Index negs = (t.beta.array() == -0.5).count();
    CHECK(ones == 5);   // round(0.05 * 100)
    CHECK(negs == 3);   // round(0.025 * 100) = round(2.5)
    CHECK(t.beta_support.count() == ones + negs);

    CHECK_THROWS_AS(scaled_truth(10, 12), DomainError);
    CHECK_THROWS_AS(scaled_truth(100, 3), DomainError);
}

TEST_CASE("genotypes are binary, deterministic, and have the expected mean") {
    const Eigen::MatrixXd Z = gen_genotypes(200, 200, 42);
    CHECK(((Z.array() == 0.0) || (Z.array() == 1.0)).all());
    CHECK(Z.mean() == doctest::Approx(0.3).epsilon(0.05));

    const Eigen::MatrixXd Z2 = gen_genotypes(200, 200, 42);
    CHECK((Z - Z2).lpNorm<Eigen::Infinity>() == 0.0);
    const Eigen::MatrixXd Z3 = gen_genotypes(200, 200, 43);
    CHECK((Z - Z3).lpNorm<Eigen::Infinity>() != 0.0);

    CHECK_THROWS_AS(gen_genotypes(0, 5, 1), DomainError);
}

TEST_CASE("datasets reuse the genotype stream and are reproducible") {
    const Truth t = scaled_truth(20, 24);
    const SimulatedDataset a = gen_dataset(30, t, 11);
    const SimulatedDataset b = gen_dataset(30, t, 11);
    CHECK((a.data.Z - b.data.Z).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a.data.X - b.data.X).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a.data.y - b.data.y).lpNorm<Eigen::Infinity>() == 0.0);

    // genotype prefix of the stream matches the standalone generator
    const Eigen::MatrixXd Z = gen_genotypes(30, 24, 11);
    CHECK((a.data.Z - Z).lpNorm<Eigen::Infinity>() == 0.0);

    CHECK(a.data.n() == 30);
    CHECK(a.data.p() == 20);
    CHECK(a.data.q() == 24);
    CHECK((a.truth.beta - t.beta).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("spread parameters read as variances by default, or as deviations") {
    // with a zero signal the covariate and response spreads are pure noise
    Truth t;
    t.beta = Eigen::VectorXd::Zero(40);
    t.Gamma = Eigen::MatrixXd::Zero(6, 40);
    t.beta_support = t.beta.array() != 0.0;
    t.gamma_support = t.Gamma.array() != 0.0;

    const Dataset var = gen_dataset(500, t, 9, NoiseScale::Variance).data;
    const Eigen::ArrayXXd xc_var = var.X.array() - 0.1;
    const double sd_x_var = std::sqrt(xc_var.square().mean());
    CHECK(sd_x_var == doctest::Approx(std::sqrt(0.1)).epsilon(0.03));
    const double sd_y_var = std::sqrt((var.y.array() - 1.0).square().mean());
    CHECK(sd_y_var == doctest::Approx(std::sqrt(0.5)).epsilon(0.08));

    const Dataset dev = gen_dataset(500, t, 9, NoiseScale::StdDev).data;
    const double sd_x_dev = std::sqrt((dev.X.array() - 0.1).square().mean());
    CHECK(sd_x_dev == doctest::Approx(0.1).epsilon(0.03));
    const double sd_y_dev = std::sqrt((dev.y.array() - 1.0).square().mean());
    CHECK(sd_y_dev == doctest::Approx(0.5).epsilon(0.08));
}

TEST_CASE("dataset generation validates the truth object") {
    Truth t = scaled_truth(20, 24);
    CHECK_THROWS_AS(gen_dataset(0, t, 1), DomainError);
    Truth bad = t;
    bad.beta = Eigen::VectorXd::Zero(7);
    CHECK_THROWS_AS(gen_dataset(10, bad, 1), DomainError);
}
