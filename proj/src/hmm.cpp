#include "psdm/hmm.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace psdm {

namespace {

constexpr const char* kNext = "x_next";
constexpr const char* kState = "x";
constexpr const char* kObs = "y";

constexpr Eigen::Index kMaxStateSize = 2048;   // n*m posterior coefficients
constexpr Eigen::Index kMaxProductSide = 4096; // rows of the prediction-product matrix

Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        }
    }
    return out;
}

// Hadamard weights of integrating a squared expansion: pairwise Gram at
// eta/2 times the Gaussian masses at the midpoints.
Matrix pair_masses(const PointMatrix& X, const Precision& eta, const Domain& domain) {
    const Matrix K = gram(X, X, 0.5 * eta);
    const Precision eta2 = 2.0 * eta;
    Matrix W(X.rows(), X.rows());
    if (!domain) {
        W = gaussian_volume(eta2) * K;
        return W;
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = i; j < X.rows(); ++j) {
            const Vector mid = 0.5 * (X.row(i) + X.row(j)).transpose();
            W(i, j) = W(j, i) = K(i, j) * hypercube_gauss_integral(mid, eta2, *domain);
        }
    }
    return W;
}

GaussianPsdModel canonical_transition(const GaussianPsdModel& t) {
    if (t.split().size() != 2) {
        throw DimensionMismatch("transition must have two blocks (next state, current state)");
    }
    const auto& b = t.split().blocks();
    if (b[0].width != b[1].width) {
        throw DimensionMismatch("transition blocks must have equal widths");
    }
    return t.with_split(VariableSplit({{kNext, b[0].width}, {kState, b[1].width}}));
}

GaussianPsdModel canonical_observation(const GaussianPsdModel& o, Eigen::Index d) {
    if (o.split().size() != 2) {
        throw DimensionMismatch("observation must have two blocks (observation, state)");
    }
    const auto& b = o.split().blocks();
    if (b[1].width != d) {
        throw DimensionMismatch("observation state block width must match the transition");
    }
    return o.with_split(VariableSplit({{kObs, b[0].width}, {kState, b[1].width}}));
}

GaussianPsdModel canonical_initial(const GaussianPsdModel& p, Eigen::Index d) {
    if (p.split().size() != 1 || p.dim() != d) {
        throw DimensionMismatch("initial model must have a single state block of width " +
                                std::to_string(d));
    }
    return p.with_split(VariableSplit::single(d, kState));
}

struct GenericStep {
    GaussianPsdModel posterior;
    double evidence;
};

GenericStep generic_step(const HmmComponents& c, const GaussianPsdModel& prior, const Vector& y,
                         const Domain& domain) {
    const GaussianPsdModel observed = partial_eval(c.observation, kObs, y);
    GaussianPsdModel predicted = markov_transition(c.transition, prior, domain);
    predicted = predicted.with_split(predicted.split().renamed(kNext, kState));
    const GaussianPsdModel joint = multiply(observed, predicted);
    const double evidence = integrate(joint, domain);
    if (!(evidence > 1e-300)) {
        throw ZeroEvidence("observation is numerically incompatible with the prediction");
    }
    return GenericStep{GaussianPsdModel(joint.coeffs() / evidence, joint.points(),
                                        joint.precision(), joint.split()),
                       evidence};
}

StepDiagnostics make_diag(const GaussianPsdModel& model, double evidence, const Domain& domain) {
    return StepDiagnostics{evidence, std::abs(integrate(model, domain) - 1.0),
                           model.min_coeff_eigenvalue()};
}

} // namespace

FilterContext::FilterContext(HmmComponents components, Domain domain)
    : components_{canonical_transition(components.transition),
                  canonical_observation(components.observation,
                                        canonical_transition(components.transition)
                                            .split()
                                            .blocks()[0]
                                            .width),
                  canonical_initial(components.initial,
                                    canonical_transition(components.transition)
                                        .split()
                                        .blocks()[0]
                                        .width)},
      domain_(std::move(domain)),
      posterior_points_(0, 0),
      posterior_eta_(Vector::Ones(1)),
      tables_{} {
    const GaussianPsdModel& trans = components_.transition;
    const GaussianPsdModel& obs = components_.observation;
    const Eigen::Index d = trans.split().blocks()[0].width;
    const Eigen::Index d_obs = obs.split().blocks()[0].width;
    if (domain_ && domain_->dim() != d) {
        throw DimensionMismatch("filter domain must live on the state space");
    }

    const Eigen::Index n = trans.size();
    const Eigen::Index m = obs.size();
    if (n * m > kMaxStateSize) {
        throw CapExceeded("posterior would carry " + std::to_string(n * m) +
                          " base points (cap " + std::to_string(kMaxStateSize) + ")");
    }
    if (n * n * m > kMaxProductSide) {
        throw CapExceeded("prediction product would carry " + std::to_string(n * n * m) +
                          " rows (cap " + std::to_string(kMaxProductSide) + ")");
    }

    const PointMatrix X_plus = trans.points().leftCols(d);
    const PointMatrix X_cur = trans.points().rightCols(d);
    const Precision eta_plus = trans.precision().segment(0, d);
    const Precision eta_cur = trans.precision().segment(d, d);
    const PointMatrix X_prime = obs.points().rightCols(d);
    const Precision eta_prime = obs.precision().segment(d_obs, d);

    // conditioning slices must carry mass
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, n); ++i) {
        if (!(integrate(partial_eval(trans, kState, X_cur.row(i).transpose()), domain_) > 0.0)) {
            throw ZeroMass("transition slice carries no mass at a sampled state");
        }
    }
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, m); ++i) {
        if (!(integrate(partial_eval(obs, kState, X_prime.row(i).transpose())) > 0.0)) {
            throw ZeroMass("observation slice carries no mass at a sampled state");
        }
    }

    posterior_eta_ = eta_prime + eta_plus;

    // pairings of observation-state and transition-next points at the
    // precision-weighted midpoints; observation index major
    posterior_points_.resize(m * n, d);
    const auto ep = eta_prime.vec().array();
    const auto en = eta_plus.vec().array();
    for (Eigen::Index l = 0; l < m; ++l) {
        for (Eigen::Index i = 0; i < n; ++i) {
            posterior_points_.row(l * n + i) =
                ((ep * X_prime.row(l).transpose().array() + en * X_plus.row(i).transpose().array()) /
                 (ep + en))
                    .matrix()
                    .transpose();
        }
    }

    // prior-vs-transition coupling and the base points of their product
    const Precision eta_mix = coupling(eta_cur, posterior_eta_);
    tables_.cross_prior = gram(posterior_points_, X_cur, eta_mix);

    const Precision eta_sum = eta_cur + posterior_eta_;
    PointMatrix product_points(n * m * n, d);
    const auto ec = eta_cur.vec().array();
    const auto es = posterior_eta_.vec().array();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index s = 0; s < m * n; ++s) {
            product_points.row(i * (m * n) + s) =
                ((ec * X_cur.row(i).transpose().array() +
                  es * posterior_points_.row(s).transpose().array()) /
                 (ec + es))
                    .matrix()
                    .transpose();
        }
    }
    tables_.marg_weight = pair_masses(product_points, eta_sum, domain_);
    tables_.cross_obs = gram(X_plus, X_prime, coupling(eta_prime, eta_plus));
    tables_.norm_weight = pair_masses(posterior_points_, posterior_eta_, domain_);
    tables_.obs_points = X_prime;
    tables_.next_points = X_plus;
}

FilterState FilterContext::initial_state() const {
    const GaussianPsdModel p0 = normalize(components_.initial, domain_);
    return FilterState{0, p0, make_diag(p0, 1.0, domain_)};
}

FilterContext filter_init(HmmComponents components, const Domain& domain) {
    return FilterContext(std::move(components), domain);
}

GaussianPsdModel filter_step_generic(const HmmComponents& components,
                                     const GaussianPsdModel& prior, const Vector& y,
                                     const Domain& domain) {
    const GaussianPsdModel trans = canonical_transition(components.transition);
    const Eigen::Index d = trans.split().blocks()[0].width;
    const HmmComponents canon{trans, canonical_observation(components.observation, d),
                              canonical_initial(components.initial, d)};
    const GaussianPsdModel aligned =
        prior.with_split(VariableSplit::single(prior.dim(), kState));
    return generic_step(canon, aligned, y, domain).posterior;
}

FilterState filter_step(const FilterContext& ctx, const FilterState& state, const Vector& y) {
    const GaussianPsdModel& trans = ctx.components().transition;
    const GaussianPsdModel& obs = ctx.components().observation;
    const Eigen::Index d_obs = obs.split().blocks()[0].width;
    if (y.size() != d_obs) {
        throw DimensionMismatch("observation has the wrong dimension");
    }
    const Eigen::Index n = trans.size();
    const Eigen::Index m = obs.size();

    if (state.t == 0) {
        // the initial model has arbitrary size; the generic composition lands
        // on the fixed posterior base matrix, after which the recursion applies
        const GenericStep step = generic_step(ctx.components(), state.model, y, ctx.domain());
        return FilterState{1, step.posterior,
                           make_diag(step.posterior, step.evidence, ctx.domain())};
    }

    if (state.model.size() != m * n) {
        throw DimensionMismatch("filter state does not live on the posterior base matrix");
    }

    // observation slice at y
    Vector ky(m);
    const Precision eta_obs = obs.precision().segment(0, d_obs);
    for (Eigen::Index l = 0; l < m; ++l) {
        ky(l) = kernel(obs.points().row(l).head(d_obs).transpose(), y, eta_obs);
    }
    const Matrix Ct = obs.coeffs().array() * (ky * ky.transpose()).array();

    // product with the prior, using the precomputed coupling
    const Eigen::Index nm = m * n;
    const Eigen::Map<const Vector> v(ctx.tables().cross_prior.data(), nm * n);
    Matrix Bt = kron(trans.coeffs(), state.model.coeffs());
    Bt = v.asDiagonal() * Bt * v.asDiagonal();

    // integrate out the previous state, then collapse the repeated next-points
    Bt.array() *= ctx.tables().marg_weight.array();
    Matrix Dt(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Dt(i, j) = Bt.block(i * nm, j * nm, nm, nm).sum();
        }
    }

    // product with the observation slice and normalization
    const Eigen::Map<const Vector> w(ctx.tables().cross_obs.data(), n * m);
    Matrix Et = kron(Ct, Dt);
    Et = w.asDiagonal() * Et * w.asDiagonal();
    const double evidence = Et.cwiseProduct(ctx.tables().norm_weight).sum();
    if (!(evidence > 1e-300)) {
        throw ZeroEvidence("observation is numerically incompatible with the prediction");
    }
    Et /= evidence;

    GaussianPsdModel posterior(std::move(Et), ctx.posterior_points(), ctx.posterior_precision(),
                               VariableSplit::single(state.model.dim(), kState));
    return FilterState{state.t + 1, posterior, make_diag(posterior, evidence, ctx.domain())};
}

FilterRun filter_run(const FilterContext& ctx, const PointMatrix& observations) {
    FilterRun run;
    run.states.push_back(ctx.initial_state());
    for (Eigen::Index r = 0; r < observations.rows(); ++r) {
        try {
            run.states.push_back(
                filter_step(ctx, run.states.back(), observations.row(r).transpose()));
        } catch (const ZeroEvidence& e) {
            throw ZeroEvidence("step " + std::to_string(r + 1) + ": " + e.what());
        }
    }
    return run;
}

} // namespace psdm
