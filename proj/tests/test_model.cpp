#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "helpers.hpp"
#include "psdm/model.hpp"
#include "psdm/oracle.hpp"

using namespace psdm;
using namespace psdm::testing;

namespace {

Vector assemble(const Vector& rest, Eigen::Index offset, const Vector& pinned) {
    Vector full(rest.size() + pinned.size());
    full.head(offset) = rest.head(offset);
    full.segment(offset, pinned.size()) = pinned;
    full.tail(rest.size() - offset) = rest.tail(rest.size() - offset);
    return full;
}

} // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("construction validates and symmetrizes") {
    Matrix one(1, 1);
    one << 1.0;
    PointMatrix origin(1, 1);
    origin << 0.0;
    const GaussianPsdModel single(one, origin, Precision::constant(1.0, 1));
    for (double x : {-1.0, 0.0, 0.5, 2.0}) {
        CHECK(single.eval(vec1(x)) == doctest::Approx(std::exp(-2.0 * x * x)).epsilon(1e-14));
    }

    const GaussianPsdModel rank1 = two_point_example();
    CHECK(rank1.min_coeff_eigenvalue() >= -1e-12);

    Matrix indefinite(2, 2);
    indefinite << 0.0, 1.0, 1.0, 0.0;
    PointMatrix X(2, 1);
    X << 0.0, 2.0;
    CHECK_THROWS_AS(GaussianPsdModel(indefinite, X, Precision::constant(1.0, 1)), NotPsd);

    Matrix skewed(2, 2);
    skewed << 1.0, 0.2, 0.0, 1.0;
    const GaussianPsdModel sym(skewed, X, Precision::constant(1.0, 1));
    CHECK(sym.coeffs()(0, 1) == doctest::Approx(0.1));
    CHECK(sym.coeffs()(0, 1) == sym.coeffs()(1, 0));

    CHECK_THROWS_AS(GaussianPsdModel(one, X, Precision::constant(1.0, 1)), DimensionMismatch);
    CHECK_THROWS_AS(GaussianPsdModel(one, origin, Precision::constant(1.0, 2)),
                    DimensionMismatch);
    CHECK_THROWS_AS(
        GaussianPsdModel(one, origin, Precision::constant(1.0, 1), VariableSplit::single(2)),
        DimensionMismatch);
}

TEST_CASE("mixture embedding") {
    PointMatrix origin(1, 1);
    origin << 0.0;
    const GaussianPsdModel one =
        GaussianPsdModel::from_mixture(vec1(1.0), origin, Precision::constant(2.0, 1));
    for (double x : {-0.7, 0.0, 1.3}) {
        CHECK(one.eval(vec1(x)) ==
              doctest::Approx(kernel(vec1(x), vec1(0.0), Precision::constant(2.0, 1)))
                  .epsilon(1e-15));
    }

    PointMatrix pm(2, 1);
    pm << -1.0, 1.0;
    const GaussianPsdModel pair =
        GaussianPsdModel::from_mixture(vec2(1.0, 1.0), pm, Precision::constant(1.0, 1));
    CHECK(pair.eval(vec1(0.0)) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));

    const GaussianPsdModel dropped =
        GaussianPsdModel::from_mixture(vec2(0.0, 3.0), pm, Precision::constant(1.5, 1));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> box(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const Vector x = vec1(box(rng));
        const double expected = 3.0 * kernel(x, vec1(1.0), Precision::constant(1.5, 1));
        CHECK(std::abs(dropped.eval(x) - expected) <= 1e-14 * (1.0 + expected));
    }

    CHECK_THROWS_AS(
        GaussianPsdModel::from_mixture(vec2(1.0, -0.1), pm, Precision::constant(1.0, 1)),
        InvalidArgument);
}

TEST_CASE("evaluation") {
    const GaussianPsdModel m = two_point_example();
    CHECK(m.eval(vec1(1.0)) == doctest::Approx(0.25 * std::exp(-2.0)).epsilon(1e-14));
    CHECK(m.eval(vec1(60.0)) < 1e-200); // kernel decay far from every base point
    CHECK(m.eval(vec1(60.0)) >= 0.0);

    // rank-one coefficients square the mixture amplitude
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector u(3);
    PointMatrix X(3, 2);
    for (Eigen::Index i = 0; i < 3; ++i) {
        u(i) = gauss(rng);
        X(i, 0) = gauss(rng);
        X(i, 1) = gauss(rng);
    }
    const Precision eta(vec2(1.0, 2.0));
    const GaussianPsdModel rank1(u * u.transpose(), X, eta);
    for (int rep = 0; rep < 50; ++rep) {
        const Vector x = vec2(gauss(rng), gauss(rng));
        double amp = 0.0;
        for (Eigen::Index i = 0; i < 3; ++i) amp += u(i) * kernel(X.row(i).transpose(), x, eta);
        CHECK(rank1.eval(x) == doctest::Approx(amp * amp).epsilon(1e-12));
    }
}

TEST_CASE("non-negativity of random models") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> box(-4.0, 4.0);
    for (int rep = 0; rep < 10; ++rep) {
        const GaussianPsdModel m = random_model(rng, 2 + Eigen::Index(rng() % 6), 2);
        for (int i = 0; i < 1000; ++i) {
            CHECK(m.eval(vec2(box(rng), box(rng))) >= -1e-12 * m.trace());
        }
    }
}

TEST_CASE("partial evaluation") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> box(-2.0, 2.0);

    // y-independent joint: all y base points identical, pinned at that point
    PointMatrix XY(3, 2);
    XY << -1.0, 0.5, 0.0, 0.5, 1.0, 0.5;
    Matrix L(3, 3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) L(i, j) = gauss(rng);
    const GaussianPsdModel joint(L * L.transpose(), XY, Precision(vec2(1.0, 2.0)),
                                 VariableSplit({{"x", 1}, {"y", 1}}));
    const GaussianPsdModel pinned = partial_eval(joint, "y", vec1(0.5));
    CHECK((pinned.coeffs() - joint.coeffs()).cwiseAbs().maxCoeff() < 1e-14);

    const GaussianPsdModel far = partial_eval(joint, "y", vec1(40.0));
    CHECK(far.coeffs().cwiseAbs().maxCoeff() < 1e-200);

    // pointwise consistency on a random joint
    const GaussianPsdModel wide =
        random_model(rng, 4, 3).with_split(VariableSplit({{"a", 1}, {"b", 2}}));
    const Vector y0 = vec2(box(rng), box(rng));
    const GaussianPsdModel cut = partial_eval(wide, "b", y0);
    for (int rep = 0; rep < 100; ++rep) {
        const Vector x = vec1(box(rng));
        const double lhs = cut.eval(x);
        const double rhs = wide.eval(assemble(x, 1, y0));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }

    CHECK_THROWS_AS(partial_eval(wide, "zz", y0), UnknownBlock);
    CHECK_THROWS_AS(partial_eval(wide, "b", vec1(0.0)), DimensionMismatch);
}

TEST_CASE("integration closed forms") {
    Matrix one(1, 1);
    one << 1.0;
    PointMatrix pt(1, 1);
    pt << 0.7;
    const GaussianPsdModel single(one, pt, Precision::constant(1.0, 1));
    CHECK(integrate(single) == doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-14));

    const GaussianPsdModel m = two_point_example();
    const double expected = std::sqrt(M_PI / 2.0) * (1.25 - std::exp(-2.0));
    CHECK(integrate(m) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(integrate(m) == doctest::Approx(1.39703).epsilon(1e-5));

    const auto numeric = oracle::integrate_numeric(
        [&](const Vector& x) { return m.eval(x); }, effective_support(m), {});
    CHECK(integrate(m) == doctest::Approx(numeric.value).epsilon(1e-10));

    Matrix zero = Matrix::Zero(2, 2);
    PointMatrix X(2, 1);
    X << 0.0, 2.0;
    const GaussianPsdModel null(zero, X, Precision::constant(1.0, 1));
    CHECK(integrate(null) == 0.0);

    // a box never exceeds the full-space mass and matches quadrature
    const Hypercube box(vec1(-0.5), vec1(1.5));
    const double boxed = integrate(m, Domain(box));
    CHECK(boxed <= integrate(m));
    const auto numeric_box =
        oracle::integrate_numeric([&](const Vector& x) { return m.eval(x); }, box, {});
    CHECK(boxed == doctest::Approx(numeric_box.value).epsilon(1e-10));
}

TEST_CASE("normalization") {
    const GaussianPsdModel m = two_point_example();
    const GaussianPsdModel p = normalize(m);
    CHECK(integrate(p) == doctest::Approx(1.0).epsilon(1e-12));
    const GaussianPsdModel p2 = normalize(p);
    CHECK((p2.coeffs() - p.coeffs()).cwiseAbs().maxCoeff() < 1e-12);
    const double mass = std::sqrt(M_PI / 2.0) * (1.25 - std::exp(-2.0));
    CHECK(p.coeffs()(0, 0) == doctest::Approx(1.0 / mass).epsilon(1e-12));

    Matrix zero = Matrix::Zero(1, 1);
    PointMatrix pt(1, 1);
    pt << 0.0;
    CHECK_THROWS_AS(normalize(GaussianPsdModel(zero, pt, Precision::constant(1.0, 1))),
                    ZeroMass);
}

TEST_CASE("marginalization") {
    std::mt19937_64 rng(43);
    const GaussianPsdModel fx = random_model(rng, 3, 1).with_split(VariableSplit::single(1, "x"));
    const GaussianPsdModel gy = random_model(rng, 2, 1).with_split(VariableSplit::single(1, "y"));
    const GaussianPsdModel joint = multiply(fx, gy); // independent blocks

    // integrating out y leaves fx scaled by the mass of gy
    const GaussianPsdModel marg = marginalize(joint, "y");
    const double gy_mass = integrate(gy);
    std::uniform_real_distribution<double> box(-2.5, 2.5);
    for (int rep = 0; rep < 100; ++rep) {
        const Vector x = vec1(box(rng));
        const double want = fx.eval(x) * gy_mass;
        CHECK(std::abs(marg.eval(x) - want) <= 1e-11 * (1.0 + std::abs(want)));
    }

    CHECK(integrate(marg) == doctest::Approx(integrate(joint)).epsilon(1e-10));

    // correlated joint: marginal density against the quadrature oracle
    const GaussianPsdModel corr =
        random_model(rng, 4, 2).with_split(VariableSplit({{"x", 1}, {"y", 1}}));
    const GaussianPsdModel mx = marginalize(corr, "y");
    const Hypercube ybox = effective_support(corr).segment(1, 1);
    for (int g = 0; g < 50; ++g) {
        const double x = -2.0 + 4.0 * double(g) / 49.0;
        const auto numeric = oracle::integrate_numeric(
            [&](const Vector& y) { return corr.eval(vec2(x, y(0))); }, ybox, {});
        CHECK(mx.eval(vec1(x)) == doctest::Approx(numeric.value).epsilon(1e-8));
    }

    CHECK_THROWS_AS(marginalize(fx, "x"), InvalidArgument);
    CHECK_THROWS_AS(marginalize(corr, "nope"), UnknownBlock);

    // box-restricted marginalization of one block
    const Hypercube ycut(vec1(-0.8), vec1(0.6));
    const GaussianPsdModel mx_cut = marginalize(corr, "y", Domain(ycut));
    for (int g = 0; g < 20; ++g) {
        const double x = -1.5 + 3.0 * double(g) / 19.0;
        const auto numeric = oracle::integrate_numeric(
            [&](const Vector& y) { return corr.eval(vec2(x, y(0))); }, ycut, {});
        CHECK(mx_cut.eval(vec1(x)) == doctest::Approx(numeric.value).epsilon(1e-8));
        CHECK(mx_cut.eval(vec1(x)) <= mx.eval(vec1(x)) * (1.0 + 1e-12));
    }
}

TEST_CASE("pointwise product is exact") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> box(-2.5, 2.5);

    // same-variable product of the example model with itself
    const GaussianPsdModel m = two_point_example();
    const GaussianPsdModel sq = multiply(m, m);
    for (int rep = 0; rep < 1000; ++rep) {
        const Vector x = vec1(box(rng));
        const double lhs = sq.eval(x);
        const double rhs = m.eval(x) * m.eval(x);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }

    // overlapping chains (x,y) * (y,z)
    const GaussianPsdModel a =
        random_model(rng, 3, 2).with_split(VariableSplit({{"x", 1}, {"y", 1}}));
    const GaussianPsdModel b =
        random_model(rng, 2, 2).with_split(VariableSplit({{"y", 1}, {"z", 1}}));
    const GaussianPsdModel ab = multiply(a, b);
    CHECK(ab.size() == 6);
    CHECK(ab.dim() == 3);
    CHECK(ab.split().blocks()[0].name == "x");
    CHECK(ab.split().blocks()[1].name == "y");
    CHECK(ab.split().blocks()[2].name == "z");
    CHECK(ab.precision()[1] ==
          doctest::Approx(a.precision()[1] + b.precision()[0]).epsilon(1e-15));
    for (int rep = 0; rep < 200; ++rep) {
        const Vector w = Vector::NullaryExpr(3, [&](Eigen::Index) { return box(rng); });
        const double lhs = ab.eval(w);
        const double rhs = a.eval(w.head(2)) * b.eval(w.tail(2));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }

    // a nearly flat factor barely changes the other side
    Matrix one(1, 1);
    one << 1.0;
    PointMatrix pt(1, 1);
    pt << 0.3;
    const GaussianPsdModel flat(one, pt, Precision::constant(1e-12, 1),
                                VariableSplit::single(1, "x"));
    const GaussianPsdModel mx = m.with_split(VariableSplit::single(1, "x"));
    const GaussianPsdModel prod = multiply(mx, flat);
    for (int rep = 0; rep < 50; ++rep) {
        const Vector x = vec1(box(rng));
        CHECK(prod.eval(x) == doctest::Approx(m.eval(x)).epsilon(1e-9));
    }

    const GaussianPsdModel wrong = random_model(rng, 2, 2).with_split(VariableSplit({{"y", 2}}));
    CHECK_THROWS_AS(multiply(a, wrong), DimensionMismatch);

    // oversized products are refused before materialization
    const GaussianPsdModel big1 = random_model(rng, 70, 1);
    const GaussianPsdModel big2 = random_model(rng, 60, 1);
    CHECK_THROWS_AS(multiply(big1, big2), CapExceeded);
}

TEST_CASE("reduction collapses repeated base points") {
    const GaussianPsdModel m = two_point_example();
    const GaussianPsdModel same = reduce(m, 1);
    CHECK((same.coeffs() - m.coeffs()).cwiseAbs().maxCoeff() == 0.0);

    // block-diagonal coefficients over duplicated points sum up
    PointMatrix Xdup(4, 1);
    Xdup << 0.0, 0.0, 2.0, 2.0;
    Matrix blockdiag = Matrix::Zero(4, 4);
    blockdiag.block(0, 0, 2, 2) << 1.0, 0.5, 0.5, 1.0;
    blockdiag.block(2, 2, 2, 2) << 1.0, 0.5, 0.5, 1.0;
    const GaussianPsdModel dup(blockdiag, Xdup, Precision::constant(1.0, 1));
    const GaussianPsdModel red = reduce(dup, 2);
    CHECK(red.size() == 2);
    CHECK(red.coeffs()(0, 0) == doctest::Approx(3.0));
    CHECK(red.coeffs()(0, 1) == doctest::Approx(0.0));
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> box(-2.0, 4.0);
    for (int rep = 0; rep < 100; ++rep) {
        const Vector x = vec1(box(rng));
        const double lhs = red.eval(x);
        const double rhs = dup.eval(x);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }

    CHECK_THROWS_AS(reduce(m, 2), PatternMismatch);
    PointMatrix Xbad(4, 1);
    Xbad << 0.0, 1.0, 2.0, 2.0;
    CHECK_THROWS_AS(reduce(GaussianPsdModel(blockdiag, Xbad, Precision::constant(1.0, 1)), 2),
                    PatternMismatch);
}

TEST_CASE("markov transition") {
    std::mt19937_64 rng(59);
    const GaussianPsdModel trans =
        random_model(rng, 3, 2).with_split(VariableSplit({{"x_next", 1}, {"x", 1}}));
    const GaussianPsdModel state = random_model(rng, 2, 1);

    const GaussianPsdModel out = markov_transition(trans, state);
    CHECK(out.size() == trans.size());
    CHECK(out.dim() == 1);
    CHECK((out.points() - trans.points().leftCols(1)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.precision()[0] == trans.precision()[0]);

    // matches direct quadrature of the defining integral
    const Hypercube xbox = effective_support(state, 9.0);
    for (double xn : {-1.0, 0.0, 0.8, 2.0}) {
        const auto numeric = oracle::integrate_numeric(
            [&](const Vector& x) { return trans.eval(vec2(xn, x(0))) * state.eval(x); }, xbox,
            {});
        CHECK(out.eval(vec1(xn)) == doctest::Approx(numeric.value).epsilon(1e-9));
    }

    // equals the explicit multiply -> marginalize -> reduce chain
    const GaussianPsdModel aligned = state.with_split(VariableSplit::single(1, "x"));
    const GaussianPsdModel chain =
        reduce(marginalize(multiply(trans, aligned), "x"), state.size());
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const Vector x = vec1(box(rng));
        CHECK(out.eval(x) == doctest::Approx(chain.eval(x)).epsilon(1e-13));
    }

    // a sharply concentrated state acts like slicing the transition
    Matrix one(1, 1);
    one << 1.0;
    PointMatrix at(1, 1);
    at << 0.4;
    const GaussianPsdModel delta(one, at, Precision::constant(4e4, 1));
    const GaussianPsdModel sliced = markov_transition(trans, delta);
    const double mass = integrate(delta);
    for (double xn : {-0.5, 0.3, 1.2}) {
        const double want = trans.eval(vec2(xn, 0.4)) * mass;
        CHECK(sliced.eval(vec1(xn)) == doctest::Approx(want).epsilon(2e-4));
    }
}

TEST_CASE("concurrent use of shared immutable models") {
    std::mt19937_64 rng(67);
    const GaussianPsdModel a =
        random_model(rng, 4, 2).with_split(VariableSplit({{"x", 1}, {"y", 1}}));
    const GaussianPsdModel b =
        random_model(rng, 3, 2).with_split(VariableSplit({{"y", 1}, {"z", 1}}));
    const double mass = integrate(a);
    const GaussianPsdModel reference = multiply(a, b);

    std::vector<std::thread> workers;
    std::vector<double> masses(8, 0.0);
    std::vector<double> products(8, 0.0);
    const Vector probe = (Vector(3) << 0.3, -0.4, 0.9).finished();
    for (int w = 0; w < 8; ++w) {
        workers.emplace_back([&, w] {
            for (int rep = 0; rep < 50; ++rep) {
                masses[std::size_t(w)] = integrate(a);
                products[std::size_t(w)] = multiply(a, b).eval(probe);
            }
        });
    }
    for (auto& t : workers) t.join();
    for (int w = 0; w < 8; ++w) {
        CHECK(masses[std::size_t(w)] == mass);
        CHECK(products[std::size_t(w)] == reference.eval(probe));
    }
}

TEST_CASE("operation outputs stay inside the cone") {
    std::mt19937_64 rng(61);
    for (int rep = 0; rep < 5; ++rep) {
        const GaussianPsdModel a =
            random_model(rng, 3, 2).with_split(VariableSplit({{"x", 1}, {"y", 1}}));
        const GaussianPsdModel b =
            random_model(rng, 2, 2).with_split(VariableSplit({{"y", 1}, {"z", 1}}));
        for (const GaussianPsdModel& out :
             {multiply(a, b), marginalize(a, "y"), partial_eval(a, "x", vec1(0.2)),
              normalize(a)}) {
            CHECK(out.min_coeff_eigenvalue() >= -1e-10 * (std::abs(out.trace()) + 1.0));
        }
    }
}

TEST_SUITE_END();
