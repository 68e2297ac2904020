#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "psdm/model.hpp"
#include "psdm/types.hpp"

namespace psdm::oracle {

// Brute-force references used by the test suites. Everything here works from
// pointwise function values only; none of the closed-form Gaussian identities
// or erf shortcuts appear, so agreement with the library is evidence rather
// than tautology.

struct QuadratureSpec {
    enum class Method {
        adaptive,    ///< adaptive 1-d rule composed over tensor directions (d <= 3)
        tensor_grid, ///< composite Simpson on a uniform tensor grid (d <= 3)
        quasi_random ///< Halton average (any d); heuristic error only
    };
    Method method = Method::adaptive;
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int points_per_axis = 201; ///< tensor_grid (odd)
    long count = 20000;        ///< quasi_random
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool heuristic_error = false; ///< true unless the Richardson-based bound applies
};

QuadratureResult integrate_numeric(const std::function<double(const Vector&)>& f,
                                   const Hypercube& domain,
                                   const QuadratureSpec& spec = {});

/// Discretized filter recursion by direct summation on a fixed 1-d grid.
/// Each returned density sums (x step) to 1.
struct GridBayesResult {
    Vector axis;
    std::vector<Vector> densities; ///< densities[t] after observation t+1
};
GridBayesResult grid_bayes_filter(const std::function<double(double, double)>& transition,
                                  const std::function<double(const Vector&, double)>& observation,
                                  const std::function<double(double)>& initial,
                                  const std::vector<Vector>& observations, const Vector& axis);

/// Uniform i.i.d. points in the box; deterministic for a fixed seed.
PointMatrix uniform_points(long count, const Hypercube& domain, std::uint64_t seed);

/// Halton low-discrepancy points in the box.
PointMatrix halton_points(long count, const Hypercube& domain);

/// I.i.d. samples from the model restricted to the box, by rejection against
/// a flat envelope (probe-grid max inflated by 1.2). Deterministic per seed.
/// Throws EnvelopeFailure when the acceptance rate drops below 1e-6.
PointMatrix rejection_sample(const GaussianPsdModel& p, const Hypercube& domain, long count,
                             std::uint64_t seed);

} // namespace psdm::oracle
