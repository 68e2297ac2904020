#pragma once

#include <cstdint>
#include <optional>

#include "psdm/model.hpp"

namespace psdm {

struct CompressionPlan {
    std::optional<PointMatrix> targets;      ///< compress onto these points
    long num_targets = 0;                    ///< else: uniform-random count
    std::optional<Hypercube> sample_domain;  ///< where random targets are drawn
    std::uint64_t seed = 0;
    double jitter = 1e-10; ///< diagonal regularizer for the target Gram inverse
};

/// Nystroem projection onto the span of kernel functions at the target
/// points: coefficients become B A B^T with B = K_tt^{-1} K_tx. Same
/// precision; exact whenever the targets span the original points. Throws
/// SingularGram when the jittered target Gram is numerically singular
/// (condition estimate above 1e14).
GaussianPsdModel compress(const GaussianPsdModel& m, const CompressionPlan& plan);

struct CompressionErrorReport {
    double max_abs;              ///< max |f - f_compressed| over the probe set
    double mixed_bound_epsilon;  ///< smallest e >= 0 with |f-f~| <= e^2 + e sqrt(f) at all probes
};

/// Probe-set error statistics. probes == 0 picks the default probe policy:
/// a 201-per-axis tensor grid for d <= 2, 10^4 Halton points otherwise.
CompressionErrorReport compression_error(const GaussianPsdModel& original,
                                         const GaussianPsdModel& compressed,
                                         const Hypercube& domain, long probes = 0);

/// multiply followed by compress.
GaussianPsdModel compress_product(const GaussianPsdModel& a, const GaussianPsdModel& b,
                                  const CompressionPlan& plan);

} // namespace psdm
