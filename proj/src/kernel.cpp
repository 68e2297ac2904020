#include "psdm/kernel.hpp"

#include <cmath>

namespace psdm {

namespace {

double weighted_sqdist(const Vector& x, const Vector& y, const Vector& eta) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        const double diff = x(t) - y(t);
        s += eta(t) * diff * diff;
    }
    return s;
}

} // namespace

double kernel(const Vector& x, const Vector& y, const Precision& eta) {
    if (x.size() != y.size() || x.size() != eta.dim()) {
        throw DimensionMismatch("kernel arguments must share one dimension");
    }
    return std::exp(-weighted_sqdist(x, y, eta.vec()));
}

Matrix gram(const PointMatrix& X, const PointMatrix& Y, const Precision& eta) {
    if (X.cols() != Y.cols() || X.cols() != eta.dim()) {
        throw DimensionMismatch("gram point sets must share the precision dimension");
    }
    Matrix K(X.rows(), Y.rows());
    const Vector& e = eta.vec();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < Y.rows(); ++j) {
            double s = 0.0;
            for (Eigen::Index t = 0; t < X.cols(); ++t) {
                const double diff = X(i, t) - Y(j, t);
                s += e(t) * diff * diff;
            }
            K(i, j) = std::exp(-s);
        }
    }
    return K;
}

double gaussian_volume(const Precision& eta) {
    // pi^{d/2} prod eta_t^{-1/2}, in log space to dodge over/underflow
    double log_v = 0.5 * static_cast<double>(eta.dim()) * std::log(M_PI);
    log_v -= 0.5 * eta.vec().array().log().sum();
    return std::exp(log_v);
}

ProductIdentity product_identity(const Vector& x1, const Vector& x2, const Precision& eta1,
                                 const Precision& eta2) {
    if (x1.size() != x2.size() || x1.size() != eta1.dim() || eta1.dim() != eta2.dim()) {
        throw DimensionMismatch("product identity arguments must share one dimension");
    }
    const auto e1 = eta1.vec().array();
    const auto e2 = eta2.vec().array();
    Vector center = ((e1 * x1.array() + e2 * x2.array()) / (e1 + e2)).matrix();
    const double cross = kernel(x1, x2, coupling(eta1, eta2));
    return ProductIdentity{std::move(center), cross};
}

double hypercube_gauss_integral(const Vector& center, const Precision& eta,
                                const Hypercube& box) {
    if (center.size() != eta.dim() || center.size() != box.dim()) {
        throw DimensionMismatch("hypercube integral arguments must share one dimension");
    }
    double value = 1.0;
    for (Eigen::Index t = 0; t < center.size(); ++t) {
        const double root = std::sqrt(eta[t]);
        const double hi = std::erf(root * (box.upper()(t) - center(t)));
        const double lo = std::erf(root * (box.lower()(t) - center(t)));
        value *= std::sqrt(M_PI / eta[t]) * 0.5 * (hi - lo);
    }
    return value;
}

double gauss_mass(const Vector& center, const Precision& eta, const Domain& domain) {
    return domain ? hypercube_gauss_integral(center, eta, *domain) : gaussian_volume(eta);
}

} // namespace psdm
