#pragma once

#include <complex>
#include <functional>

#include "psdm/model.hpp"

namespace psdm {

/// Closed-form Gaussian smoothing of an integrand g:
///   smoothed(z, eta) = integral of g(x) exp(-sum_t eta_t (x_t - z_t)^2) dx.
/// Must be deterministic and safe for concurrent invocation.
struct SmoothedIntegrand {
    Eigen::Index arity; ///< output length
    std::function<Vector(const Vector& z, const Precision& eta)> smoothed;
};

SmoothedIntegrand unit_integrand();                         ///< g == 1
SmoothedIntegrand coordinate_integrand(Eigen::Index dim);   ///< g(x) = x

/// E_{x~p} g(x) = sum_ij (A o K_{X,X,eta/2})_ij * smoothed((x_i+x_j)/2, 2 eta).
/// For unnormalized p this is the unnormalized moment; g == 1 recovers
/// integrate(p).
Vector expectation(const GaussianPsdModel& p, const SmoothedIntegrand& g);

/// True when integrate(p) over the full space is within tol of 1.
bool is_normalized(const GaussianPsdModel& p, double tol = 1e-10);

// Mean / covariance / characteristic function under the density p/Z. An
// unnormalized input is renormalized internally (Z is one Gram contraction);
// the CLI surfaces a `renormalized` flag.
Vector mean(const GaussianPsdModel& p);
Matrix covariance(const GaussianPsdModel& p);
std::complex<double> characteristic_function(const GaussianPsdModel& p, const Vector& omega);

/// Bayes conditioning of a joint model on block `block` pinned at `value`:
/// partial_eval followed by normalize over `domain`. Throws ZeroConditional
/// when the slice carries no mass.
GaussianPsdModel condition(const GaussianPsdModel& joint, std::string_view block,
                           const Vector& value, const Domain& domain = full_space);

Vector conditional_expectation(const GaussianPsdModel& joint, std::string_view block,
                               const Vector& value, const SmoothedIntegrand& g,
                               const Domain& domain = full_space);

struct GradientDescentConfig {
    int steps = 500;
    double rate = 0.1;
    double divergence_limit = 1e6; ///< |theta|_inf beyond this -> StepTooLarge
};

/// Minimizes L(theta) = E_{x~p} loss(theta, x) by fixed-step gradient descent,
/// where `loss_gradient(theta)` supplies the smoothed form of
/// grad_theta loss(theta, .). p is renormalized internally.
Vector decision_gradient_descent(
    const GaussianPsdModel& p,
    const std::function<SmoothedIntegrand(const Vector& theta)>& loss_gradient, Vector theta0,
    const GradientDescentConfig& cfg = {});

/// Smoothed gradient family for the squared loss |theta - x|^2.
std::function<SmoothedIntegrand(const Vector&)> squared_loss_gradient();

} // namespace psdm
