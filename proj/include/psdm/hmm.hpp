#pragma once

#include <vector>

#include "psdm/model.hpp"

namespace psdm {

/// Filter components. The transition has two equal-width blocks
/// (next state, current state), the observation two blocks
/// (observation, state), the initial model a single state block; blocks are
/// matched positionally and renamed internally to x_next/x and y/x.
struct HmmComponents {
    GaussianPsdModel transition;
    GaussianPsdModel observation;
    GaussianPsdModel initial;
};

struct StepDiagnostics {
    double evidence = 0.0;               ///< per-step normalization constant c_t
    double normalization_residual = 0.0; ///< |integrate(model) - 1|
    double min_eigenvalue = 0.0;         ///< of the state coefficients
};

struct FilterState {
    int t = 0;
    GaussianPsdModel model; ///< p(x_t | y_{1:t}); integrates to 1
    StepDiagnostics diag{};
};

/// Step-invariant data of the specialized recursion: the fixed posterior
/// base matrix (precision-weighted pairings of observation-state and
/// transition-next points), its precision, and every Gram matrix that does
/// not depend on the observations. Immutable and shareable across runs.
class FilterContext {
public:
    explicit FilterContext(HmmComponents components, Domain domain = full_space);

    const HmmComponents& components() const { return components_; }
    const Domain& domain() const { return domain_; }
    const PointMatrix& posterior_points() const { return posterior_points_; }
    const Precision& posterior_precision() const { return posterior_eta_; }

    /// State at t = 0: the normalized initial model.
    FilterState initial_state() const;

    // Specialized-recursion tables (sizes: n transition points, m observation
    // points, state size n*m).
    struct Tables {
        Matrix cross_prior;    ///< K_{X~, X, eta~}: prior-vs-transition coupling
        Matrix marg_weight;    ///< per-pair masses for integrating out the previous state
        Matrix cross_obs;      ///< K_{X+, X', eta~'}: prediction-vs-observation coupling
        Matrix norm_weight;    ///< per-pair masses of the posterior normalization
        Matrix obs_points;     ///< X': observation-state base points
        Matrix next_points;    ///< X+: transition next-state base points
    };
    const Tables& tables() const { return tables_; }

private:
    HmmComponents components_;
    Domain domain_;
    PointMatrix posterior_points_;
    Precision posterior_eta_;
    Tables tables_;
};

FilterContext filter_init(HmmComponents components, const Domain& domain = full_space);

/// One observation update. States produced by the recursion live on the
/// context's fixed base matrix; the t = 0 transient (initial model of
/// arbitrary size) is routed through the generic composition, which lands on
/// that same matrix. Throws ZeroEvidence when the observation is numerically
/// incompatible with the prediction.
FilterState filter_step(const FilterContext& ctx, const FilterState& state, const Vector& y);

/// The same update expressed through the model algebra: partial-evaluate the
/// observation at y, Chapman-Kolmogorov the prior through the transition,
/// multiply, normalize.
GaussianPsdModel filter_step_generic(const HmmComponents& components,
                                     const GaussianPsdModel& prior, const Vector& y,
                                     const Domain& domain = full_space);

struct FilterRun {
    std::vector<FilterState> states; ///< states[0] = initial, states[t] after y_t
};

/// Folds filter_step over the observation rows. Step errors are rethrown
/// with the step index attached.
FilterRun filter_run(const FilterContext& ctx, const PointMatrix& observations);

} // namespace psdm
