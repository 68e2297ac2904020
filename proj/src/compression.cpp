#include "psdm/compression.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "psdm/oracle.hpp"

namespace psdm {

namespace {

PointMatrix tensor_probes(const Hypercube& domain, long per_axis) {
    const Eigen::Index d = domain.dim();
    long total = 1;
    for (Eigen::Index t = 0; t < d; ++t) total *= per_axis;
    PointMatrix pts(total, d);
    std::vector<long> idx(d, 0);
    for (long r = 0; r < total; ++r) {
        for (Eigen::Index t = 0; t < d; ++t) {
            pts(r, t) = domain.lower()(t) + (domain.upper()(t) - domain.lower()(t)) *
                                                double(idx[t]) / double(per_axis - 1);
        }
        for (Eigen::Index t = 0; t < d; ++t) {
            if (++idx[t] < per_axis) break;
            idx[t] = 0;
        }
    }
    return pts;
}

PointMatrix probe_set(const Hypercube& domain, long probes) {
    if (probes > 0) {
        return domain.dim() == 1 ? tensor_probes(domain, probes)
                                 : oracle::halton_points(probes, domain);
    }
    return domain.dim() <= 2 ? tensor_probes(domain, 201)
                             : oracle::halton_points(10000, domain);
}

} // namespace

GaussianPsdModel compress(const GaussianPsdModel& m, const CompressionPlan& plan) {
    PointMatrix targets;
    if (plan.targets) {
        targets = *plan.targets;
    } else {
        if (plan.num_targets < 1 || !plan.sample_domain) {
            throw InvalidArgument("plan needs explicit targets or a count plus sample domain");
        }
        targets = oracle::uniform_points(plan.num_targets, *plan.sample_domain, plan.seed);
    }
    if (targets.cols() != m.dim()) {
        throw DimensionMismatch("target points have the wrong dimension");
    }
    if (targets.rows() == m.points().rows() && targets == m.points()) {
        return m; // projection onto the own span is the identity
    }

    Matrix Ktt = gram(targets, targets, m.precision());
    Ktt.diagonal().array() += plan.jitter;
    Eigen::SelfAdjointEigenSolver<Matrix> es(Ktt);
    const double max_eig = es.eigenvalues().maxCoeff();
    const double min_eig = es.eigenvalues().minCoeff();
    if (!(min_eig > 0.0) || max_eig / min_eig > 1e14) {
        throw SingularGram("target Gram is numerically singular (condition estimate " +
                           std::to_string(max_eig / std::max(min_eig, 1e-300)) +
                           "); duplicate or near-duplicate targets?");
    }
    // solve through the numerically significant eigenspace only: directions at
    // roundoff level carry pointwise-negligible kernel combinations but would
    // otherwise pollute B by jitter/lambda ratios of order one
    const double cut = 16.0 * std::numeric_limits<double>::epsilon() * max_eig;
    const Vector inv = (es.eigenvalues().array() > cut)
                           .select(es.eigenvalues().array().inverse(), 0.0);
    const Matrix Ktx = gram(targets, m.points(), m.precision());
    const Matrix B =
        es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * Ktx;
    Matrix compressed = B * m.coeffs() * B.transpose();
    return GaussianPsdModel(std::move(compressed), std::move(targets), m.precision(), m.split());
}

CompressionErrorReport compression_error(const GaussianPsdModel& original,
                                         const GaussianPsdModel& compressed,
                                         const Hypercube& domain, long probes) {
    if (original.dim() != compressed.dim() || original.dim() != domain.dim()) {
        throw DimensionMismatch("models and domain must share one dimension");
    }
    const PointMatrix pts = probe_set(domain, probes);
    double max_abs = 0.0;
    double eps = 0.0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const Vector x = pts.row(i).transpose();
        const double f = std::max(0.0, original.eval(x));
        const double delta = std::abs(original.eval(x) - compressed.eval(x));
        max_abs = std::max(max_abs, delta);
        // smallest e >= 0 with e^2 + e sqrt(f) >= delta
        const double root = 0.5 * (std::sqrt(f + 4.0 * delta) - std::sqrt(f));
        eps = std::max(eps, root);
    }
    return CompressionErrorReport{max_abs, eps};
}

GaussianPsdModel compress_product(const GaussianPsdModel& a, const GaussianPsdModel& b,
                                  const CompressionPlan& plan) {
    return compress(multiply(a, b), plan);
}

} // namespace psdm
