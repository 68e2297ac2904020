#include "psdm/moments.hpp"

#include <cmath>
#include <string>

namespace psdm {

namespace {

Matrix smoothing_weights(const GaussianPsdModel& p) {
    // A o K_{X,X,eta/2}: the pair weights of every trace-form moment
    return (p.coeffs().array() * gram(p.points(), p.points(), 0.5 * p.precision()).array())
        .matrix();
}

double normalizing_mass(const GaussianPsdModel& p) {
    const double mass = integrate(p, full_space);
    if (!(mass > 1e-300)) {
        throw ZeroMass("model mass is " + std::to_string(mass));
    }
    return mass;
}

} // namespace

SmoothedIntegrand unit_integrand() {
    return SmoothedIntegrand{
        1, [](const Vector&, const Precision& eta) { return Vector::Constant(1, gaussian_volume(eta)); }};
}

SmoothedIntegrand coordinate_integrand(Eigen::Index dim) {
    return SmoothedIntegrand{dim, [](const Vector& z, const Precision& eta) {
                                 return Vector(gaussian_volume(eta) * z);
                             }};
}

Vector expectation(const GaussianPsdModel& p, const SmoothedIntegrand& g) {
    const Matrix W = smoothing_weights(p);
    const Precision eta2 = 2.0 * p.precision();
    Vector acc = Vector::Zero(g.arity);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        for (Eigen::Index j = 0; j < p.size(); ++j) {
            if (W(i, j) == 0.0) continue;
            const Vector mid = 0.5 * (p.points().row(i) + p.points().row(j)).transpose();
            acc += W(i, j) * g.smoothed(mid, eta2);
        }
    }
    return acc;
}

bool is_normalized(const GaussianPsdModel& p, double tol) {
    return std::abs(integrate(p, full_space) - 1.0) <= tol;
}

Vector mean(const GaussianPsdModel& p) {
    const double mass = normalizing_mass(p);
    const Matrix W = smoothing_weights(p);
    const double c2 = gaussian_volume(2.0 * p.precision());
    // sum_ij W_ij (x_i+x_j)/2 = X^T (W 1) by symmetry of W
    return c2 / mass * (p.points().transpose() * W.rowwise().sum());
}

Matrix covariance(const GaussianPsdModel& p) {
    const double mass = normalizing_mass(p);
    const Matrix W = smoothing_weights(p);
    const double c2 = gaussian_volume(2.0 * p.precision());
    const Vector mu = c2 / mass * (p.points().transpose() * W.rowwise().sum());

    Matrix second = Matrix::Zero(p.dim(), p.dim());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        for (Eigen::Index j = 0; j < p.size(); ++j) {
            if (W(i, j) == 0.0) continue;
            const Vector mid = 0.5 * (p.points().row(i) + p.points().row(j)).transpose();
            second += W(i, j) * (mid * mid.transpose());
        }
    }
    // each Gaussian pair bump contributes variance 1/(4 eta_t) per coordinate
    second += W.sum() * (0.25 * p.precision().vec().array().inverse()).matrix().asDiagonal();
    Matrix cov = c2 / mass * second - mu * mu.transpose();
    return 0.5 * (cov + cov.transpose());
}

std::complex<double> characteristic_function(const GaussianPsdModel& p, const Vector& omega) {
    if (omega.size() != p.dim()) {
        throw DimensionMismatch("frequency dimension does not match the model");
    }
    const double mass = normalizing_mass(p);
    const Matrix W = smoothing_weights(p);
    const double c2 = gaussian_volume(2.0 * p.precision());
    const double damp =
        std::exp(-(omega.array().square() / (8.0 * p.precision().vec().array())).sum());
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        for (Eigen::Index j = 0; j < p.size(); ++j) {
            if (W(i, j) == 0.0) continue;
            const double phase = 0.5 * omega.dot((p.points().row(i) + p.points().row(j)).transpose());
            acc += W(i, j) * std::polar(1.0, phase);
        }
    }
    return c2 * damp / mass * acc;
}

GaussianPsdModel condition(const GaussianPsdModel& joint, std::string_view block,
                           const Vector& value, const Domain& domain) {
    const GaussianPsdModel slice = partial_eval(joint, block, value);
    const double mass = integrate(slice, domain);
    if (!(mass > 1e-300)) {
        throw ZeroConditional("joint density carries no mass at the conditioning point");
    }
    return GaussianPsdModel(slice.coeffs() / mass, slice.points(), slice.precision(),
                            slice.split());
}

Vector conditional_expectation(const GaussianPsdModel& joint, std::string_view block,
                               const Vector& value, const SmoothedIntegrand& g,
                               const Domain& domain) {
    return expectation(condition(joint, block, value, domain), g);
}

Vector decision_gradient_descent(
    const GaussianPsdModel& p,
    const std::function<SmoothedIntegrand(const Vector& theta)>& loss_gradient, Vector theta0,
    const GradientDescentConfig& cfg) {
    GaussianPsdModel density = is_normalized(p) ? p : normalize(p, full_space);
    Vector theta = std::move(theta0);
    for (int step = 0; step < cfg.steps; ++step) {
        theta -= cfg.rate * expectation(density, loss_gradient(theta));
        if (theta.cwiseAbs().maxCoeff() > cfg.divergence_limit) {
            throw StepTooLarge("gradient descent diverged at step " + std::to_string(step + 1));
        }
    }
    return theta;
}

std::function<SmoothedIntegrand(const Vector&)> squared_loss_gradient() {
    return [](const Vector& theta) {
        return SmoothedIntegrand{theta.size(), [theta](const Vector& z, const Precision& eta) {
                                     return Vector(2.0 * gaussian_volume(eta) * (theta - z));
                                 }};
    };
}

} // namespace psdm
