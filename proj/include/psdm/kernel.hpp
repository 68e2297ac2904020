#pragma once

#include "psdm/types.hpp"

namespace psdm {

/// Gaussian kernel k_eta(x,y) = exp(-sum_t eta_t (x_t - y_t)^2). Value in
/// (0,1], equal to 1 iff x == y.
double kernel(const Vector& x, const Vector& y, const Precision& eta);

/// Kernel matrix with entry (i,j) = kernel(row i of X, row j of Y, eta).
Matrix gram(const PointMatrix& X, const PointMatrix& Y, const Precision& eta);

/// Total mass of a unit Gaussian bump: integral of k_eta(0,.) over R^d,
/// equal to pi^{d/2} prod_t eta_t^{-1/2}.
double gaussian_volume(const Precision& eta);

struct ProductIdentity {
    Vector center; ///< (eta1 x1 + eta2 x2) / (eta1 + eta2), elementwise
    double cross;  ///< k_{eta1 eta2/(eta1+eta2)}(x1, x2)
};

/// Combines two Gaussian bumps into one:
///   k_{eta1}(x,x1) k_{eta2}(x,x2) = cross * k_{eta1+eta2}(x, center)
/// for every x.
ProductIdentity product_identity(const Vector& x1, const Vector& x2,
                                 const Precision& eta1, const Precision& eta2);

/// Integral of k_eta(center,.) over the box, via the error function:
///   prod_t sqrt(pi/eta_t) * 1/2 * (erf(sqrt(eta_t)(b_t-c_t)) - erf(sqrt(eta_t)(a_t-c_t))).
/// Bounded by gaussian_volume(eta) and approaches it as the box grows.
double hypercube_gauss_integral(const Vector& center, const Precision& eta,
                                const Hypercube& box);

/// Integral of k_eta(center,.) over `domain` (gaussian_volume when full space).
double gauss_mass(const Vector& center, const Precision& eta, const Domain& domain);

} // namespace psdm
