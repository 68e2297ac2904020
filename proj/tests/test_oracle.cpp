#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "psdm/moments.hpp"
#include "psdm/oracle.hpp"

using namespace psdm;
using namespace psdm::testing;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("classical integrals") {
    const auto unit = oracle::integrate_numeric(
        [](const Vector&) { return 1.0; }, Hypercube(vec2(0.0, 0.0), vec2(1.0, 1.0)), {});
    CHECK(unit.value == doctest::Approx(1.0).epsilon(1e-12));

    const auto gauss = oracle::integrate_numeric(
        [](const Vector& x) { return std::exp(-x(0) * x(0)); },
        Hypercube(vec1(-10.0), vec1(10.0)), {});
    CHECK(gauss.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-10));
    CHECK(!gauss.heuristic_error);

    oracle::QuadratureSpec grid;
    grid.method = oracle::QuadratureSpec::Method::tensor_grid;
    grid.points_per_axis = 201;
    const auto gauss2 = oracle::integrate_numeric(
        [](const Vector& x) { return std::exp(-x.squaredNorm()); },
        Hypercube(vec2(-8.0, -8.0), vec2(8.0, 8.0)), grid);
    CHECK(gauss2.value == doctest::Approx(M_PI).epsilon(1e-10));
    CHECK(gauss2.heuristic_error);

    oracle::QuadratureSpec qmc;
    qmc.method = oracle::QuadratureSpec::Method::quasi_random;
    qmc.count = 200000;
    const auto lin = oracle::integrate_numeric(
        [](const Vector& x) { return x(0) + x(1); }, Hypercube(vec2(0.0, 0.0), vec2(1.0, 1.0)),
        qmc);
    CHECK(lin.value == doctest::Approx(1.0).epsilon(1e-3));

    CHECK_THROWS_AS(oracle::integrate_numeric([](const Vector&) { return std::nan(""); },
                                              Hypercube(vec1(0.0), vec1(1.0)), {}),
                    InvalidArgument);
}

TEST_CASE("grid filter: uninformative observation is pure prediction") {
    const Eigen::Index g = 401;
    Vector axis(g);
    for (Eigen::Index i = 0; i < g; ++i) axis(i) = -5.0 + 10.0 * double(i) / double(g - 1);
    const double dx = axis(1) - axis(0);

    auto tau = [](double next, double prev) {
        return std::exp(-2.0 * (next - 0.8 * prev) * (next - 0.8 * prev));
    };
    auto omega_flat = [](const Vector&, double) { return 1.0; };
    auto p0 = [](double x) { return std::exp(-x * x); };

    const auto run = oracle::grid_bayes_filter(tau, omega_flat, p0, {vec1(0.0)}, axis);
    REQUIRE(run.densities.size() == 1);
    CHECK(run.densities[0].sum() * dx == doctest::Approx(1.0).epsilon(1e-10));

    // Chapman-Kolmogorov by hand on the same grid
    Vector prior(g);
    for (Eigen::Index i = 0; i < g; ++i) prior(i) = p0(axis(i));
    prior /= prior.sum() * dx;
    Vector predicted(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < g; ++j) acc += tau(axis(i), axis(j)) * prior(j);
        predicted(i) = acc * dx;
    }
    predicted /= predicted.sum() * dx;
    CHECK((run.densities[0] - predicted).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("grid filter: near-delta transition shifts the posterior") {
    // 5-point grid, transition concentrated on staying put, observation
    // weighting the rightmost cell
    Vector axis(5);
    axis << 0.0, 1.0, 2.0, 3.0, 4.0;
    auto tau = [](double next, double prev) { return next == prev ? 1.0 : 0.0; };
    auto omega = [](const Vector&, double x) { return x; };
    auto p0 = [](double) { return 1.0; };
    const auto run = oracle::grid_bayes_filter(tau, omega, p0, {vec1(0.0)}, axis);
    // posterior proportional to x on {0..4}: sum = 10, dx = 1
    const Vector& d = run.densities[0];
    CHECK(d(0) == doctest::Approx(0.0));
    CHECK(d(4) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(d(2) == doctest::Approx(0.2).epsilon(1e-12));

    auto omega_zero = [](const Vector&, double) { return 0.0; };
    CHECK_THROWS_AS(oracle::grid_bayes_filter(tau, omega_zero, p0, {vec1(0.0)}, axis),
                    ZeroEvidence);
}

TEST_CASE("rejection sampler is seeded and unbiased") {
    Matrix A(1, 1);
    A << 1.0;
    PointMatrix X(1, 1);
    X << 0.6;
    const GaussianPsdModel p(A, X, Precision::constant(1.0, 1));
    const Hypercube box(vec1(-4.0), vec1(5.0));

    const PointMatrix s1 = oracle::rejection_sample(p, box, 4000, 99);
    const PointMatrix s2 = oracle::rejection_sample(p, box, 4000, 99);
    CHECK((s1 - s2).cwiseAbs().maxCoeff() == 0.0);

    const double mean_hat = s1.col(0).mean();
    const double sd = std::sqrt((s1.col(0).array() - mean_hat).square().sum() / (4000.0 - 1.0));
    const double se = sd / std::sqrt(4000.0);
    CHECK(std::abs(mean_hat - 0.6) <= 3.0 * se);
}

TEST_CASE("rejection sampler histogram matches the density") {
    const GaussianPsdModel p = normalize(two_point_example());
    const Hypercube box(vec1(-4.0), vec1(6.0));
    const long n = 100000;
    const PointMatrix s = oracle::rejection_sample(p, box, n, 2718);

    const int bins = 40;
    const double lo = box.lower()(0), hi = box.upper()(0);
    const double width = (hi - lo) / bins;
    std::vector<long> counts(bins, 0);
    for (long i = 0; i < n; ++i) {
        int b = int((s(i, 0) - lo) / width);
        if (b == bins) --b;
        counts[std::size_t(b)]++;
    }
    const double total = integrate(p, Domain(box));
    double chi2 = 0.0;
    for (int b = 0; b < bins; ++b) {
        const Hypercube cell(vec1(lo + b * width), vec1(lo + (b + 1) * width));
        const double expected =
            double(n) * oracle::integrate_numeric(
                            [&](const Vector& x) { return p.eval(x); }, cell, {})
                            .value /
            total;
        if (expected < 1e-9) continue;
        const double diff = double(counts[std::size_t(b)]) - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < 72.0546629519878); // chi-square 0.999 quantile at 39 dof
}

TEST_CASE("point generators stay inside the box") {
    const Hypercube box(vec2(-1.0, 2.0), vec2(1.5, 3.0));
    const PointMatrix u = oracle::uniform_points(500, box, 3);
    const PointMatrix h = oracle::halton_points(500, box);
    for (Eigen::Index i = 0; i < 500; ++i) {
        CHECK(box.contains(u.row(i).transpose()));
        CHECK(box.contains(h.row(i).transpose()));
    }
    CHECK((oracle::uniform_points(500, box, 3) - u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_SUITE_END();
