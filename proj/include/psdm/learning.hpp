#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "psdm/model.hpp"

namespace psdm {

struct SolverOptions {
    int max_iters = 500;
    double tol_grad = 1e-8;  ///< on the projected-gradient mapping norm
    double tol_obj = 0.0;    ///< objective-change stop (0 disables)
    bool backtracking = true;
    double step = 1.0;       ///< initial (or fixed) step gamma
    double shrink = 0.5;     ///< backtracking factor
    double armijo = 1e-4;    ///< sufficient-decrease constant
};

struct FitConfig {
    double lambda;  ///< regularization weight, > 0
    Precision eta;  ///< kernel precision of the fitted model
    Hypercube domain;
    std::optional<PointMatrix> centers; ///< use these centers as-is
    int num_centers = 0;                ///< else: uniform-random count in domain
    std::uint64_t seed = 0;
    SolverOptions solver{};
    int center_cap = 100; ///< assemble_quadratic materializes m^4 entries
    bool full_space_quadratic = false; ///< diagnostics: drop the domain restriction
};

struct FitReport {
    std::vector<double> objective; ///< value per accepted iterate (non-increasing under backtracking)
    double grad_norm = 0.0;
    int iterations = 0;
    double min_eigenvalue = 0.0;
    long dropped_samples = 0; ///< samples outside the fit domain
    bool converged = false;
    std::optional<double> l2_error;
};

struct FitResult {
    GaussianPsdModel model;
    FitReport report;
};

/// Dense m^2 x m^2 quadratic form T of the squared-model mass,
///   vec(A)^T T vec(A) = integral over the domain of f(x;A,centers,eta)^2,
/// with column-major vec. Entry for pairs (i,j),(k,l):
///   k_{eta/2}(x_i,x_k) k_{eta/2}(x_j,x_l) k_eta(m_ik, m_jl) * mass_{4 eta}((m_ik+m_jl)/2)
/// where m_ab is the midpoint of x_a,x_b. Throws CapExceeded above `cap`.
Matrix assemble_quadratic(const PointMatrix& centers, const Precision& eta, const Domain& domain,
                          int cap = 100);

/// Least-squares density fit: minimizes over the PSD cone
///   Q(A) - (2/n) sum_i k_i^T A k_i + lambda Tr(AKAK),
/// by projected gradient descent (eigenvalue clipping). Samples outside the
/// domain are dropped and counted. Non-convergence is reported, not thrown.
FitResult fit(const PointMatrix& samples, const FitConfig& cfg);

struct TheoremHyperparams {
    Precision eta;
    double lambda;
    int num_centers;
};

/// Smoothness-indexed schedule: eta = n^{2/(2 beta + d)} per coordinate,
/// lambda = n^{-(2 beta + 2 d)/(2 beta + d)},
/// m = ceil(n^{d/(2 beta + d)} (log n)^d).
TheoremHyperparams theorem_hyperparams(long n, double beta, Eigen::Index d);

/// L2(domain) distance between the model and a reference density, by
/// quadrature (d <= 3) or quasi-Monte-Carlo (d > 3, standard error of the
/// squared distance written to `standard_error` when given).
double l2_error(const GaussianPsdModel& model,
                const std::function<double(const Vector&)>& reference, const Hypercube& domain,
                double* standard_error = nullptr);

} // namespace psdm
