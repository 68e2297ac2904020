#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "helpers.hpp"
#include "psdm/moments.hpp"
#include "psdm/oracle.hpp"

using namespace psdm;
using namespace psdm::testing;

namespace {

GaussianPsdModel single_bump(double at, double eta) {
    Matrix one(1, 1);
    one << 1.0;
    PointMatrix pt(1, 1);
    pt << at;
    return GaussianPsdModel(one, pt, Precision::constant(eta, 1));
}

} // namespace

TEST_SUITE_BEGIN("moments");

TEST_CASE("expectation trace form") {
    const GaussianPsdModel p = normalize(two_point_example());
    CHECK(expectation(p, unit_integrand())(0) == doctest::Approx(1.0).epsilon(1e-10));

    // for unnormalized models the unit integrand recovers the mass
    std::mt19937_64 rng(67);
    for (int rep = 0; rep < 5; ++rep) {
        const GaussianPsdModel m = random_model(rng, 3, 2);
        CHECK(expectation(m, unit_integrand())(0) ==
              doctest::Approx(integrate(m)).epsilon(1e-12));
    }

    // coordinate integrand against quadrature on the example model
    const auto numeric = oracle::integrate_numeric(
        [&](const Vector& x) { return x(0) * p.eval(x); }, effective_support(p), {});
    CHECK(expectation(p, coordinate_integrand(1))(0) ==
          doctest::Approx(numeric.value).epsilon(1e-8));
}

TEST_CASE("mean") {
    CHECK(mean(single_bump(0.8, 2.0))(0) == doctest::Approx(0.8).epsilon(1e-13));

    PointMatrix X(2, 1);
    X << -1.3, 1.3;
    Matrix A = 0.7 * Matrix::Identity(2, 2);
    const GaussianPsdModel symmetric(A, X, Precision::constant(1.0, 1));
    CHECK(mean(symmetric)(0) == doctest::Approx(0.0).epsilon(1e-13));

    const GaussianPsdModel p = normalize(two_point_example());
    const auto mass = oracle::integrate_numeric(
        [&](const Vector& x) { return p.eval(x); }, effective_support(p), {});
    const auto first = oracle::integrate_numeric(
        [&](const Vector& x) { return x(0) * p.eval(x); }, effective_support(p), {});
    CHECK(mean(p)(0) == doctest::Approx(first.value / mass.value).epsilon(1e-7));

    // unnormalized input is renormalized internally
    CHECK(mean(two_point_example())(0) == doctest::Approx(mean(p)(0)).epsilon(1e-12));

    // Monte-Carlo cross-check within 3 standard errors
    const PointMatrix s =
        oracle::rejection_sample(p, Hypercube(vec1(-5.0), vec1(7.0)), 20000, 12345);
    const double mc_mean = s.col(0).mean();
    const double sd = std::sqrt((s.col(0).array() - mc_mean).square().sum() / (20000.0 - 1.0));
    CHECK(std::abs(mean(p)(0) - mc_mean) <= 3.0 * sd / std::sqrt(20000.0));
}

TEST_CASE("covariance") {
    // precision 1 squares to a Gaussian with variance 1/4
    const Matrix cov1 = covariance(single_bump(0.3, 1.0));
    CHECK(cov1(0, 0) == doctest::Approx(0.25).epsilon(1e-12));

    const GaussianPsdModel p = normalize(two_point_example());
    const auto mass = oracle::integrate_numeric(
        [&](const Vector& x) { return p.eval(x); }, effective_support(p), {});
    const auto first = oracle::integrate_numeric(
        [&](const Vector& x) { return x(0) * p.eval(x); }, effective_support(p), {});
    const auto second = oracle::integrate_numeric(
        [&](const Vector& x) { return x(0) * x(0) * p.eval(x); }, effective_support(p), {});
    const double mu = first.value / mass.value;
    const double var = second.value / mass.value - mu * mu;
    CHECK(covariance(p)(0, 0) == doctest::Approx(var).epsilon(1e-7));

    // symmetric PSD output on random models
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 5; ++rep) {
        const Matrix C = covariance(random_model(rng, 4, 3));
        CHECK((C - C.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Matrix> es(C);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("characteristic function") {
    const GaussianPsdModel p = normalize(two_point_example());
    CHECK(std::abs(characteristic_function(p, vec1(0.0)) - 1.0) < 1e-12);

    // single bump at x1: phase e^{i w x1}, Gaussian damping e^{-w^2/(8 eta)}
    const GaussianPsdModel bump = single_bump(0.5, 2.0);
    for (double w : {-1.3, 0.4, 2.2}) {
        const auto cf = characteristic_function(bump, vec1(w));
        const auto want = std::polar(std::exp(-w * w / 16.0), w * 0.5);
        CHECK(std::abs(cf - want) < 1e-12);
    }

    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> freq(-3.0, 3.0);
    for (int rep = 0; rep < 50; ++rep) {
        const double w = freq(rng);
        const auto plus = characteristic_function(p, vec1(w));
        const auto minus = characteristic_function(p, vec1(-w));
        CHECK(std::abs(plus - std::conj(minus)) < 1e-13);
        CHECK(std::abs(plus) <= 1.0 + 1e-10);
    }
}

TEST_CASE("conditioning") {
    std::mt19937_64 rng(79);
    std::uniform_real_distribution<double> box(-1.5, 1.5);

    // independent joint: conditional equals the normalized y factor
    const GaussianPsdModel fy = random_model(rng, 3, 1).with_split(VariableSplit::single(1, "y"));
    const GaussianPsdModel gx = random_model(rng, 2, 1).with_split(VariableSplit::single(1, "x"));
    const GaussianPsdModel joint = multiply(fy, gx);
    const GaussianPsdModel fy_norm = normalize(fy);
    for (double x0 : {-0.8, 0.1, 1.2}) {
        const GaussianPsdModel cond = condition(joint, "x", vec1(x0));
        CHECK(integrate(cond) == doctest::Approx(1.0).epsilon(1e-10));
        for (int rep = 0; rep < 30; ++rep) {
            const Vector y = vec1(box(rng));
            CHECK(cond.eval(y) == doctest::Approx(fy_norm.eval(y)).epsilon(1e-10));
        }
    }

    // correlated joint against a grid-normalized slice
    const GaussianPsdModel corr =
        random_model(rng, 4, 2).with_split(VariableSplit({{"y", 1}, {"x", 1}}));
    const Vector x0 = vec1(0.4);
    const GaussianPsdModel cond = condition(corr, "x", x0);

    const Eigen::Index g = 2001;
    const Hypercube ybox = effective_support(corr).segment(0, 1);
    const double dy = (ybox.upper()(0) - ybox.lower()(0)) / double(g - 1);
    Vector slice(g), axis(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        axis(i) = ybox.lower()(0) + dy * double(i);
        slice(i) = corr.eval(vec2(axis(i), x0(0)));
    }
    slice /= slice.sum() * dy;
    double l1 = 0.0;
    for (Eigen::Index i = 0; i < g; ++i) {
        l1 += std::abs(cond.eval(vec1(axis(i))) - slice(i)) * dy;
    }
    CHECK(l1 <= 1e-6);

    // equals partial evaluation followed by normalization
    const GaussianPsdModel via = normalize(partial_eval(corr, "x", x0));
    for (int rep = 0; rep < 100; ++rep) {
        const Vector y = vec1(box(rng));
        const double lhs = cond.eval(y);
        const double rhs = via.eval(y);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }

    CHECK_THROWS_AS(condition(corr, "x", vec1(1000.0)), ZeroConditional);
}

TEST_CASE("conditional expectation") {
    std::mt19937_64 rng(83);
    const GaussianPsdModel fy = random_model(rng, 3, 1).with_split(VariableSplit::single(1, "y"));
    const GaussianPsdModel gx = random_model(rng, 2, 1).with_split(VariableSplit::single(1, "x"));
    const GaussianPsdModel joint = multiply(fy, gx);

    CHECK(conditional_expectation(joint, "x", vec1(0.3), unit_integrand())(0) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // independence: conditional mean equals the unconditional one
    const double unconditional = mean(fy)(0);
    CHECK(conditional_expectation(joint, "x", vec1(0.3), coordinate_integrand(1))(0) ==
          doctest::Approx(unconditional).epsilon(1e-10));

    // quadrature agreement on a correlated joint
    const GaussianPsdModel corr =
        random_model(rng, 4, 2).with_split(VariableSplit({{"y", 1}, {"x", 1}}));
    const Vector x0 = vec1(-0.2);
    const GaussianPsdModel cond = condition(corr, "x", x0);
    const Hypercube ybox = effective_support(corr).segment(0, 1);
    const auto numeric = oracle::integrate_numeric(
        [&](const Vector& y) { return y(0) * cond.eval(y); }, ybox, {});
    CHECK(conditional_expectation(corr, "x", x0, coordinate_integrand(1))(0) ==
          doctest::Approx(numeric.value).epsilon(1e-7));
}

TEST_CASE("decision gradient descent on the squared loss") {
    const GaussianPsdModel bump = single_bump(1.7, 2.0);
    GradientDescentConfig cfg;
    cfg.steps = 500;
    cfg.rate = 0.1;
    const Vector theta = decision_gradient_descent(bump, squared_loss_gradient(), vec1(-3.0), cfg);
    CHECK(std::abs(theta(0) - 1.7) <= 1e-6);

    GradientDescentConfig none;
    none.steps = 0;
    CHECK(decision_gradient_descent(bump, squared_loss_gradient(), vec1(-3.0), none)(0) == -3.0);

    const GaussianPsdModel p = normalize(two_point_example());
    const Vector target = mean(p);
    const Vector reached = decision_gradient_descent(p, squared_loss_gradient(), vec1(2.0), cfg);
    CHECK(std::abs(reached(0) - target(0)) <= 1e-5);

    GradientDescentConfig wild;
    wild.steps = 200;
    wild.rate = 1e4;
    CHECK_THROWS_AS(decision_gradient_descent(p, squared_loss_gradient(), vec1(2.0), wild),
                    StepTooLarge);
}

TEST_SUITE_END();
