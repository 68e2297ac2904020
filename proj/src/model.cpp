#include "psdm/model.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace psdm {

namespace {

VariableSplit check_split(const std::optional<VariableSplit>& split, Eigen::Index dim) {
    if (!split) return VariableSplit::single(dim);
    if (split->total_width() != dim) {
        throw DimensionMismatch("split widths sum to " + std::to_string(split->total_width()) +
                                ", expected " + std::to_string(dim));
    }
    return *split;
}

Matrix midpoint_masses(const PointMatrix& X, const Precision& eta, const Domain& domain) {
    // pairwise integrals of k_{2 eta} centered at the midpoints (x_i+x_j)/2
    const Precision eta2 = 2.0 * eta;
    Matrix G(X.rows(), X.rows());
    if (!domain) {
        G.setConstant(gaussian_volume(eta2));
        return G;
    }
    if (domain->dim() != X.cols()) {
        throw DimensionMismatch("integration domain dimension does not match");
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = i; j < X.rows(); ++j) {
            const Vector mid = 0.5 * (X.row(i) + X.row(j)).transpose();
            G(i, j) = G(j, i) = hypercube_gauss_integral(mid, eta2, *domain);
        }
    }
    return G;
}

PointMatrix drop_columns(const PointMatrix& X, Eigen::Index offset, Eigen::Index width) {
    PointMatrix rest(X.rows(), X.cols() - width);
    rest.leftCols(offset) = X.leftCols(offset);
    rest.rightCols(X.cols() - offset - width) = X.rightCols(X.cols() - offset - width);
    return rest;
}

Vector drop_segment(const Vector& v, Eigen::Index offset, Eigen::Index width) {
    Vector rest(v.size() - width);
    rest.head(offset) = v.head(offset);
    rest.tail(v.size() - offset - width) = v.tail(v.size() - offset - width);
    return rest;
}

} // namespace

GaussianPsdModel::GaussianPsdModel(Matrix coeffs, PointMatrix points, Precision eta)
    : GaussianPsdModel(std::move(coeffs), std::move(points), std::move(eta),
                       VariableSplit{}) {}

GaussianPsdModel::GaussianPsdModel(Matrix coeffs, PointMatrix points, Precision eta,
                                   VariableSplit split)
    : coeffs_(std::move(coeffs)),
      points_(std::move(points)),
      eta_(std::move(eta)),
      split_(check_split(split.size() ? std::optional<VariableSplit>(split) : std::nullopt,
                         points_.cols())),
      min_eig_(0.0) {
    if (points_.rows() < 1 || points_.cols() < 1) {
        throw DimensionMismatch("base point matrix must be at least 1x1");
    }
    detail::require_finite(points_, "base points");
    detail::require_finite(coeffs_, "coefficients");
    if (coeffs_.rows() != points_.rows() || coeffs_.cols() != points_.rows()) {
        throw DimensionMismatch("coefficient matrix must be n x n for n base points");
    }
    if (eta_.dim() != points_.cols()) {
        throw DimensionMismatch("precision dimension does not match base points");
    }

    coeffs_ = 0.5 * (coeffs_ + coeffs_.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(coeffs_);
    if (es.info() != Eigen::Success) {
        throw NotPsd("coefficient eigendecomposition failed");
    }
    min_eig_ = es.eigenvalues().minCoeff();
    const double floor = 1e-10 * (std::abs(coeffs_.trace()) + 1.0);
    if (min_eig_ < -floor) {
        throw NotPsd("coefficient matrix is not positive semidefinite (min eigenvalue " +
                     std::to_string(min_eig_) + ", floor " + std::to_string(-floor) + ")");
    }
    if (min_eig_ < 0.0) {
        // roundoff sliver inside the floor: clip and rebuild
        const Vector clipped = es.eigenvalues().cwiseMax(0.0);
        coeffs_ = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
        coeffs_ = 0.5 * (coeffs_ + coeffs_.transpose()).eval();
    }
}

GaussianPsdModel GaussianPsdModel::from_mixture(const Vector& weights, const PointMatrix& points,
                                                const Precision& eta) {
    if (weights.size() != points.rows()) {
        throw DimensionMismatch("one weight per base point required");
    }
    if ((weights.array() < 0.0).any()) {
        throw InvalidArgument("mixture weights must be non-negative");
    }
    Matrix diag = weights.asDiagonal();
    return GaussianPsdModel(std::move(diag), points, 0.5 * eta);
}

GaussianPsdModel GaussianPsdModel::with_split(VariableSplit split) const {
    if (split.total_width() != dim()) {
        throw DimensionMismatch("split widths do not sum to the model dimension");
    }
    GaussianPsdModel copy = *this;
    copy.split_ = std::move(split);
    return copy;
}

double GaussianPsdModel::eval(const Vector& x) const {
    if (x.size() != dim()) {
        throw DimensionMismatch("evaluation point has wrong dimension");
    }
    const Vector& e = eta_.vec();
    Vector k(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
        double s = 0.0;
        for (Eigen::Index t = 0; t < x.size(); ++t) {
            const double diff = points_(i, t) - x(t);
            s += e(t) * diff * diff;
        }
        k(i) = std::exp(-s);
    }
    return k.dot(coeffs_ * k);
}

Vector GaussianPsdModel::eval_many(const PointMatrix& xs) const {
    Vector out(xs.rows());
    for (Eigen::Index r = 0; r < xs.rows(); ++r) {
        out(r) = eval(xs.row(r).transpose());
    }
    return out;
}

double integrate(const GaussianPsdModel& m, const Domain& domain) {
    const Matrix K = gram(m.points(), m.points(), 0.5 * m.precision());
    const Matrix G = midpoint_masses(m.points(), m.precision(), domain);
    return (m.coeffs().array() * K.array() * G.array()).sum();
}

GaussianPsdModel normalize(const GaussianPsdModel& m, const Domain& domain) {
    const double mass = integrate(m, domain);
    if (!(mass > 1e-300)) {
        throw ZeroMass("model mass is " + std::to_string(mass) + "; cannot normalize");
    }
    return GaussianPsdModel(m.coeffs() / mass, m.points(), m.precision(), m.split());
}

GaussianPsdModel partial_eval(const GaussianPsdModel& m, std::string_view block,
                              const Vector& value) {
    const VariableSplit& split = m.split();
    const Eigen::Index offset = split.offset_of(block);
    const Eigen::Index width = split.width_of(block);
    if (value.size() != width) {
        throw DimensionMismatch("value dimension does not match block width");
    }
    if (split.size() == 1) {
        throw InvalidArgument("partial evaluation of the only block; use eval");
    }
    const Precision eta_block = m.precision().segment(offset, width);
    const PointMatrix Y = m.points().middleCols(offset, width);

    Vector ky(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        ky(i) = kernel(Y.row(i).transpose(), value, eta_block);
    }
    Matrix B = m.coeffs().array() * (ky * ky.transpose()).array();
    return GaussianPsdModel(std::move(B), drop_columns(m.points(), offset, width),
                            Precision(drop_segment(m.precision().vec(), offset, width)),
                            split.without(block));
}

GaussianPsdModel marginalize(const GaussianPsdModel& m, std::string_view block,
                             const Domain& domain) {
    const VariableSplit& split = m.split();
    const Eigen::Index offset = split.offset_of(block);
    const Eigen::Index width = split.width_of(block);
    if (split.size() == 1) {
        throw InvalidArgument("marginalizing the only block; use integrate");
    }
    const Precision eta_block = m.precision().segment(offset, width);
    const PointMatrix Xb = m.points().middleCols(offset, width);

    const Matrix K = gram(Xb, Xb, 0.5 * eta_block);
    const Matrix G = midpoint_masses(Xb, eta_block, domain);
    Matrix B = m.coeffs().array() * K.array() * G.array();
    return GaussianPsdModel(std::move(B), drop_columns(m.points(), offset, width),
                            Precision(drop_segment(m.precision().vec(), offset, width)),
                            split.without(block));
}

GaussianPsdModel multiply(const GaussianPsdModel& a, const GaussianPsdModel& b) {
    // collect shared blocks in a's order, then a-only / b-only leftovers
    std::vector<VariableSplit::Block> shared, a_only, b_only;
    for (const auto& blk : a.split().blocks()) {
        if (b.split().has(blk.name)) {
            if (b.split().width_of(blk.name) != blk.width) {
                throw DimensionMismatch("shared block '" + blk.name + "' differs in width");
            }
            shared.push_back(blk);
        } else {
            a_only.push_back(blk);
        }
    }
    for (const auto& blk : b.split().blocks()) {
        if (!a.split().has(blk.name)) b_only.push_back(blk);
    }

    const Eigen::Index na = a.size(), nb = b.size();
    const Eigen::Index n_out = na * nb;
    if (n_out > kMaxBasePoints) {
        throw CapExceeded("product would have " + std::to_string(n_out) +
                          " base points (cap " + std::to_string(kMaxBasePoints) + ")");
    }

    Eigen::Index wa = 0, ws = 0, wb = 0;
    for (const auto& blk : a_only) wa += blk.width;
    for (const auto& blk : shared) ws += blk.width;
    for (const auto& blk : b_only) wb += blk.width;

    // gather column indices in result order
    std::vector<Eigen::Index> a_only_cols, a_shared_cols, b_shared_cols, b_only_cols;
    for (const auto& blk : a_only) {
        const Eigen::Index off = a.split().offset_of(blk.name);
        for (Eigen::Index t = 0; t < blk.width; ++t) a_only_cols.push_back(off + t);
    }
    for (const auto& blk : shared) {
        const Eigen::Index offa = a.split().offset_of(blk.name);
        const Eigen::Index offb = b.split().offset_of(blk.name);
        for (Eigen::Index t = 0; t < blk.width; ++t) {
            a_shared_cols.push_back(offa + t);
            b_shared_cols.push_back(offb + t);
        }
    }
    for (const auto& blk : b_only) {
        const Eigen::Index off = b.split().offset_of(blk.name);
        for (Eigen::Index t = 0; t < blk.width; ++t) b_only_cols.push_back(off + t);
    }

    const Vector& ea = a.precision().vec();
    const Vector& eb = b.precision().vec();

    Vector eta_out(wa + ws + wb);
    for (Eigen::Index t = 0; t < wa; ++t) eta_out(t) = ea(a_only_cols[t]);
    for (Eigen::Index t = 0; t < ws; ++t)
        eta_out(wa + t) = ea(a_shared_cols[t]) + eb(b_shared_cols[t]);
    for (Eigen::Index t = 0; t < wb; ++t) eta_out(wa + ws + t) = eb(b_only_cols[t]);

    // pairwise base points and the cross-coupling weights of the product identity
    PointMatrix W(n_out, wa + ws + wb);
    Vector cross(n_out);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index l = 0; l < nb; ++l) {
            const Eigen::Index s = i * nb + l;
            for (Eigen::Index t = 0; t < wa; ++t) W(s, t) = a.points()(i, a_only_cols[t]);
            double expo = 0.0;
            for (Eigen::Index t = 0; t < ws; ++t) {
                const double ya = a.points()(i, a_shared_cols[t]);
                const double yb = b.points()(l, b_shared_cols[t]);
                const double pa = ea(a_shared_cols[t]);
                const double pb = eb(b_shared_cols[t]);
                W(s, wa + t) = (pa * ya + pb * yb) / (pa + pb);
                const double diff = ya - yb;
                expo += pa * pb / (pa + pb) * diff * diff;
            }
            for (Eigen::Index t = 0; t < wb; ++t)
                W(s, wa + ws + t) = b.points()(l, b_only_cols[t]);
            cross(s) = std::exp(-expo);
        }
    }

    Matrix C(n_out, n_out);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index l = 0; l < nb; ++l) {
            const Eigen::Index s = i * nb + l;
            for (Eigen::Index j = 0; j < na; ++j) {
                for (Eigen::Index h = 0; h < nb; ++h) {
                    const Eigen::Index t = j * nb + h;
                    C(s, t) = a.coeffs()(i, j) * b.coeffs()(l, h) * cross(s) * cross(t);
                }
            }
        }
    }

    std::vector<VariableSplit::Block> blocks;
    blocks.reserve(a_only.size() + shared.size() + b_only.size());
    for (auto& blk : a_only) blocks.push_back(std::move(blk));
    for (auto& blk : shared) blocks.push_back(std::move(blk));
    for (auto& blk : b_only) blocks.push_back(std::move(blk));

    return GaussianPsdModel(std::move(C), std::move(W), Precision(std::move(eta_out)),
                            VariableSplit(std::move(blocks)));
}

GaussianPsdModel reduce(const GaussianPsdModel& m, Eigen::Index copies) {
    if (copies < 1 || m.size() % copies != 0) {
        throw PatternMismatch("base point count " + std::to_string(m.size()) +
                              " is not a multiple of " + std::to_string(copies));
    }
    if (copies == 1) return m;
    const Eigen::Index n_unique = m.size() / copies;
    const double tol = 1e-12 * (1.0 + m.points().cwiseAbs().maxCoeff());
    for (Eigen::Index u = 0; u < n_unique; ++u) {
        for (Eigen::Index r = 1; r < copies; ++r) {
            const double dev =
                (m.points().row(u * copies + r) - m.points().row(u * copies)).cwiseAbs().maxCoeff();
            if (dev > tol) {
                throw PatternMismatch("base points do not repeat in consecutive groups of " +
                                      std::to_string(copies));
            }
        }
    }
    PointMatrix X(n_unique, m.dim());
    Matrix B = Matrix::Zero(n_unique, n_unique);
    for (Eigen::Index u = 0; u < n_unique; ++u) {
        X.row(u) = m.points().row(u * copies);
        for (Eigen::Index v = 0; v < n_unique; ++v) {
            B(u, v) = m.coeffs().block(u * copies, v * copies, copies, copies).sum();
        }
    }
    return GaussianPsdModel(std::move(B), std::move(X), m.precision(), m.split());
}

GaussianPsdModel markov_transition(const GaussianPsdModel& transition,
                                   const GaussianPsdModel& state, const Domain& domain) {
    if (transition.split().size() != 2) {
        throw DimensionMismatch("transition must have exactly two blocks (next, current)");
    }
    if (state.split().size() != 1) {
        throw DimensionMismatch("state must have a single block");
    }
    const auto& tblocks = transition.split().blocks();
    if (tblocks[0].width != tblocks[1].width || state.dim() != tblocks[1].width) {
        throw DimensionMismatch("state width must match the transition blocks");
    }
    const GaussianPsdModel aligned =
        state.with_split(state.split().renamed(state.split().blocks()[0].name, tblocks[1].name));
    const GaussianPsdModel joint = multiply(transition, aligned);
    const GaussianPsdModel summed = marginalize(joint, tblocks[1].name, domain);
    return reduce(summed, state.size());
}

} // namespace psdm
