#pragma once

#include <random>

#include "psdm/model.hpp"

namespace psdm::testing {

inline Vector vec1(double a) {
    Vector v(1);
    v << a;
    return v;
}

inline Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

inline GaussianPsdModel random_model(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d,
                                     double eta_lo = 0.4, double eta_hi = 3.0) {
    std::uniform_real_distribution<double> eta_dist(eta_lo, eta_hi);
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    PointMatrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index t = 0; t < d; ++t) X(i, t) = box(rng);
    }
    Vector eta(d);
    for (Eigen::Index t = 0; t < d; ++t) eta(t) = eta_dist(rng);
    Matrix L(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) L(i, j) = gauss(rng);
    }
    Matrix A = L * L.transpose() / double(n);
    return GaussianPsdModel(std::move(A), std::move(X), Precision(std::move(eta)));
}

/// The two-point rank-one example model: A = (1, -1/2; -1/2, 1/4),
/// X = (0; 2), eta = 1. Mixes a negative cross weight while staying PSD.
inline GaussianPsdModel two_point_example() {
    Matrix A(2, 2);
    A << 1.0, -0.5, -0.5, 0.25;
    PointMatrix X(2, 1);
    X << 0.0, 2.0;
    return GaussianPsdModel(A, X, Precision::constant(1.0, 1));
}

/// A box big enough that the model's tails outside are below 1e-14 of mass.
inline Hypercube effective_support(const GaussianPsdModel& m, double pad = 8.0) {
    Vector lo = m.points().colwise().minCoeff().transpose();
    Vector hi = m.points().colwise().maxCoeff().transpose();
    const double tail = pad / std::sqrt(m.precision().vec().minCoeff());
    return Hypercube(lo.array() - tail, hi.array() + tail);
}

/// A 1-d chain with smooth ridge-shaped transition (next ~ 0.8 * current)
/// and observation (y ~ x) models built as mixtures along the ridges.
struct ChainSpec {
    GaussianPsdModel transition;
    GaussianPsdModel observation;
    GaussianPsdModel initial;
};

inline ChainSpec make_chain(Eigen::Index centers = 7) {
    const double slope = 0.8;
    PointMatrix ridge(centers, 2);
    Vector weights(centers);
    for (Eigen::Index i = 0; i < centers; ++i) {
        const double c = -2.4 + 4.8 * double(i) / double(centers - 1);
        ridge(i, 0) = slope * c;
        ridge(i, 1) = c;
        weights(i) = 1.0;
    }
    Vector eta_t(2);
    eta_t << 2.0, 1.2;
    GaussianPsdModel transition =
        GaussianPsdModel::from_mixture(weights, ridge, Precision(eta_t))
            .with_split(VariableSplit({{"x_next", 1}, {"x", 1}}));

    PointMatrix obs_ridge(centers, 2);
    for (Eigen::Index i = 0; i < centers; ++i) {
        const double c = -2.4 + 4.8 * double(i) / double(centers - 1);
        obs_ridge(i, 0) = c;
        obs_ridge(i, 1) = c;
    }
    Vector eta_o(2);
    eta_o << 2.5, 1.5;
    GaussianPsdModel observation =
        GaussianPsdModel::from_mixture(weights, obs_ridge, Precision(eta_o))
            .with_split(VariableSplit({{"y", 1}, {"x", 1}}));

    PointMatrix x0(1, 1);
    x0 << 0.0;
    GaussianPsdModel initial =
        GaussianPsdModel::from_mixture(vec1(1.0), x0, Precision::constant(1.0, 1));
    return ChainSpec{std::move(transition), std::move(observation), std::move(initial)};
}

} // namespace psdm::testing
