#pragma once

#include <string_view>

#include "psdm/kernel.hpp"
#include "psdm/types.hpp"

namespace psdm {

/// Non-negative function f(x) = sum_ij A_ij k_eta(x_i,x) k_eta(x_j,x)
/// parameterized by a positive semidefinite coefficient matrix A, base
/// points X (one per row) and kernel precision eta. Immutable value type.
///
/// Construction symmetrizes A, verifies positive semidefiniteness up to a
/// roundoff floor of -1e-10*(|trace|+1), and clips eigenvalues inside
/// [-floor, 0) to zero. A matrix below the floor is rejected as NotPsd.
class GaussianPsdModel {
public:
    GaussianPsdModel(Matrix coeffs, PointMatrix points, Precision eta);
    GaussianPsdModel(Matrix coeffs, PointMatrix points, Precision eta, VariableSplit split);

    /// Mixture embedding: weights a >= 0 and kernel precision eta give the
    /// model diag(a) on X with precision eta/2, which evaluates to
    /// sum_i a_i k_eta(x_i, x).
    static GaussianPsdModel from_mixture(const Vector& weights, const PointMatrix& points,
                                         const Precision& eta);

    Eigen::Index size() const { return points_.rows(); } ///< number of base points
    Eigen::Index dim() const { return points_.cols(); }
    const Matrix& coeffs() const { return coeffs_; }
    const PointMatrix& points() const { return points_; }
    const Precision& precision() const { return eta_; }
    const VariableSplit& split() const { return split_; }

    GaussianPsdModel with_split(VariableSplit split) const;

    double eval(const Vector& x) const;
    Vector eval_many(const PointMatrix& xs) const;

    double trace() const { return coeffs_.trace(); }
    double min_coeff_eigenvalue() const { return min_eig_; }

private:
    Matrix coeffs_;
    PointMatrix points_;
    Precision eta_;
    VariableSplit split_;
    double min_eig_;
};

/// Largest model size (base points) operations will materialize.
inline constexpr Eigen::Index kMaxBasePoints = 4096;

/// Total mass: c_{2 eta} Tr(A K_{X,X,eta/2}) over the full space, or the
/// erf closed form over a hypercube. Hypercube never exceeds full space.
double integrate(const GaussianPsdModel& m, const Domain& domain = full_space);

/// Scales coefficients by 1/integrate(m, domain). Throws ZeroMass when the
/// mass is below 1e-300.
GaussianPsdModel normalize(const GaussianPsdModel& m, const Domain& domain = full_space);

/// Pins the named block to `value`; the result lives on the remaining
/// coordinates (original order) and satisfies
/// eval(result, rest) == eval(m, reassembled(rest, value)) exactly.
GaussianPsdModel partial_eval(const GaussianPsdModel& m, std::string_view block,
                              const Vector& value);

/// Integrates out the named block (over `domain`, whose dimension is the
/// block width). Coefficient update is the Hadamard product
/// A o K_{Xb,Xb,eta_b/2} o G with G the per-pair Gaussian masses.
GaussianPsdModel marginalize(const GaussianPsdModel& m, std::string_view block,
                             const Domain& domain = full_space);

/// Pointwise product. Blocks are aligned by name: same-name blocks must have
/// equal widths and are merged (precisions add, base points combine at the
/// precision-weighted midpoints); remaining blocks pass through. Result block
/// order: a-only, shared (in a's order), b-only. Exact identity:
/// eval(result, (xa, y, xb)) == eval(a, (xa, y)) * eval(b, (y, xb)).
GaussianPsdModel multiply(const GaussianPsdModel& a, const GaussianPsdModel& b);

/// Collapses a base matrix of the form X0 (x) 1_copies (each distinct row
/// repeated `copies` times consecutively) onto the distinct rows, summing
/// coefficient blocks. eval is unchanged. Throws PatternMismatch when the
/// rows do not repeat within 1e-12.
GaussianPsdModel reduce(const GaussianPsdModel& m, Eigen::Index copies);

/// One Chapman-Kolmogorov step: integral of transition(x_next, x) * state(x)
/// over x. `transition` must have exactly two blocks (next, current) of equal
/// width; `state` one block, aligned positionally. The result keeps the
/// transition's next-block base points and precision.
GaussianPsdModel markov_transition(const GaussianPsdModel& transition,
                                   const GaussianPsdModel& state,
                                   const Domain& domain = full_space);

} // namespace psdm
