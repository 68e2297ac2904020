#include "psdm/learning.hpp"

#include <cmath>
#include <string>

#include "psdm/oracle.hpp"

namespace psdm {

namespace {

Matrix psd_project(const Matrix& A) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
    const Vector clipped = es.eigenvalues().cwiseMax(0.0);
    Matrix P = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (P + P.transpose());
}

struct Objective {
    const Matrix& T;  // m^2 x m^2 quadratic form of the squared-model mass
    const Matrix& S;  // (1/n) sum_i k_i k_i^T
    const Matrix& K;  // center Gram at full precision
    double lambda;

    double value(const Matrix& A) const {
        const Eigen::Map<const Vector> a(A.data(), A.size());
        const double quad = a.dot(T * a);
        const double data = 2.0 * A.cwiseProduct(S).sum();
        const double reg = lambda * (K * A * K).cwiseProduct(A).sum();
        return quad - data + reg;
    }

    Matrix gradient(const Matrix& A) const {
        const Eigen::Map<const Vector> a(A.data(), A.size());
        const Vector ta = T * a;
        const Eigen::Map<const Matrix> TA(ta.data(), A.rows(), A.cols());
        return 2.0 * TA - 2.0 * S + 2.0 * lambda * (K * A * K);
    }
};

} // namespace

Matrix assemble_quadratic(const PointMatrix& centers, const Precision& eta, const Domain& domain,
                          int cap) {
    const Eigen::Index m = centers.rows();
    const Eigen::Index d = centers.cols();
    if (eta.dim() != d) {
        throw DimensionMismatch("precision dimension does not match the centers");
    }
    if (domain && domain->dim() != d) {
        throw DimensionMismatch("domain dimension does not match the centers");
    }
    if (m > cap) {
        throw CapExceeded("quadratic form needs m^4 = " + std::to_string(m * m * m * m) +
                          " entries; cap is m <= " + std::to_string(cap));
    }

    const Matrix Kh = gram(centers, centers, 0.5 * eta);
    const Precision eta4 = 4.0 * eta;
    const Vector& e = eta.vec();

    Matrix T(m * m, m * m);
    Vector mid_ik(d), mid_jl(d), q(d);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const Eigen::Index s = i + j * m;
            for (Eigen::Index l = 0; l < m; ++l) {
                for (Eigen::Index k = 0; k < m; ++k) {
                    const Eigen::Index t = k + l * m;
                    if (t < s) continue;
                    double cross = 0.0;
                    for (Eigen::Index c = 0; c < d; ++c) {
                        mid_ik(c) = 0.5 * (centers(i, c) + centers(k, c));
                        mid_jl(c) = 0.5 * (centers(j, c) + centers(l, c));
                        const double diff = mid_ik(c) - mid_jl(c);
                        cross += e(c) * diff * diff;
                        q(c) = 0.5 * (mid_ik(c) + mid_jl(c));
                    }
                    const double val =
                        Kh(i, k) * Kh(j, l) * std::exp(-cross) * gauss_mass(q, eta4, domain);
                    T(s, t) = T(t, s) = val;
                }
            }
        }
    }
    return T;
}

FitResult fit(const PointMatrix& samples, const FitConfig& cfg) {
    if (!(cfg.lambda > 0.0)) {
        throw InvalidArgument("lambda must be positive");
    }
    const Eigen::Index d = cfg.domain.dim();
    if (samples.cols() != d || cfg.eta.dim() != d) {
        throw DimensionMismatch("samples, domain and precision must share one dimension");
    }

    PointMatrix centers;
    if (cfg.centers) {
        if (cfg.centers->cols() != d) {
            throw DimensionMismatch("provided centers have the wrong dimension");
        }
        centers = *cfg.centers;
    } else {
        if (cfg.num_centers < 1) {
            throw InvalidArgument("num_centers must be >= 1 when no centers are provided");
        }
        centers = oracle::uniform_points(cfg.num_centers, cfg.domain, cfg.seed);
    }
    const Eigen::Index m = centers.rows();

    // samples outside the fit domain do not enter the data term
    std::vector<Eigen::Index> kept;
    kept.reserve(samples.rows());
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        if (cfg.domain.contains(samples.row(i).transpose())) kept.push_back(i);
    }
    FitReport report;
    report.dropped_samples = samples.rows() - static_cast<long>(kept.size());

    const Domain quad_domain = cfg.full_space_quadratic ? full_space : Domain(cfg.domain);
    const Matrix T = assemble_quadratic(centers, cfg.eta, quad_domain, cfg.center_cap);
    const Matrix K = gram(centers, centers, cfg.eta);
    Matrix S = Matrix::Zero(m, m);
    if (!kept.empty()) {
        Matrix Kx(m, kept.size());
        for (std::size_t c = 0; c < kept.size(); ++c) {
            for (Eigen::Index r = 0; r < m; ++r) {
                Kx(r, c) = kernel(centers.row(r).transpose(),
                                  samples.row(kept[c]).transpose(), cfg.eta);
            }
        }
        S = Kx * Kx.transpose() / double(kept.size());
    }

    const Objective obj{T, S, K, cfg.lambda};
    const SolverOptions& sol = cfg.solver;

    // start from the identity scaled to unit mass
    Matrix A = Matrix::Identity(m, m) / (double(m) * gaussian_volume(2.0 * cfg.eta));
    double fval = obj.value(A);
    report.objective.push_back(fval);

    int iters_used = 0;
    Matrix G = obj.gradient(A);
    Matrix A_prev, G_prev;
    for (int it = 0; it < sol.max_iters; ++it) {
        // spectral (Barzilai-Borwein) trial step, safeguarded by Armijo below
        double gamma = sol.step;
        if (it > 0) {
            const Matrix dA = A - A_prev;
            const Matrix dG = G - G_prev;
            const double curvature = dA.cwiseProduct(dG).sum();
            if (curvature > 0.0) {
                gamma = std::clamp(dA.squaredNorm() / curvature, 1e-12, 1e12);
            }
        }
        Matrix Anew;
        double fnew = fval;
        if (sol.backtracking) {
            bool accepted = false;
            while (gamma > 1e-18) {
                Anew = psd_project(A - gamma * G);
                fnew = obj.value(Anew);
                const double decrease = G.cwiseProduct(Anew - A).sum();
                if (fnew <= fval + sol.armijo * decrease) {
                    accepted = true;
                    break;
                }
                gamma *= sol.shrink;
            }
            if (!accepted) break; // no descent left at machine precision
        } else {
            gamma = sol.step;
            Anew = psd_project(A - gamma * G);
            fnew = obj.value(Anew);
        }
        const double move = (Anew - A).norm() / gamma;
        const double fprev = fval;
        A_prev = std::move(A);
        G_prev = std::move(G);
        A = std::move(Anew);
        fval = fnew;
        G = obj.gradient(A);
        report.objective.push_back(fval);
        iters_used = it + 1;
        if (move <= sol.tol_grad) {
            report.converged = true;
            break;
        }
        if (sol.tol_obj > 0.0 &&
            std::abs(fprev - fval) <= sol.tol_obj * std::max(1.0, std::abs(fprev))) {
            report.converged = true;
            break;
        }
    }
    report.iterations = iters_used;
    report.grad_norm = G.norm();

    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    report.min_eigenvalue = es.eigenvalues().minCoeff();

    GaussianPsdModel model(std::move(A), std::move(centers), cfg.eta);
    return FitResult{std::move(model), std::move(report)};
}

TheoremHyperparams theorem_hyperparams(long n, double beta, Eigen::Index d) {
    if (n < 2 || beta <= 0.0 || d < 1) {
        throw InvalidArgument("need n >= 2, beta > 0, d >= 1");
    }
    const double nn = double(n);
    const double denom = 2.0 * beta + double(d);
    const double eta_value = std::pow(nn, 2.0 / denom);
    const double lambda = std::pow(nn, -(2.0 * beta + 2.0 * double(d)) / denom);
    const double m_real = std::pow(nn, double(d) / denom) * std::pow(std::log(nn), double(d));
    const int m = std::max(1, int(std::ceil(m_real)));
    return TheoremHyperparams{Precision::constant(eta_value, d), lambda, m};
}

double l2_error(const GaussianPsdModel& model,
                const std::function<double(const Vector&)>& reference, const Hypercube& domain,
                double* standard_error) {
    auto sq_diff = [&](const Vector& x) {
        const double diff = model.eval(x) - reference(x);
        return diff * diff;
    };
    oracle::QuadratureSpec spec;
    if (domain.dim() <= 3) {
        spec.method = domain.dim() == 1 ? oracle::QuadratureSpec::Method::adaptive
                                        : oracle::QuadratureSpec::Method::tensor_grid;
        spec.abs_tol = 1e-14;
        spec.rel_tol = 1e-10;
    } else {
        spec.method = oracle::QuadratureSpec::Method::quasi_random;
        spec.count = 200000;
    }
    const auto res = oracle::integrate_numeric(sq_diff, domain, spec);
    if (standard_error) *standard_error = res.error_estimate;
    return std::sqrt(std::max(0.0, res.value));
}

} // namespace psdm
