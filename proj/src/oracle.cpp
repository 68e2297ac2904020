#include "psdm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace psdm::oracle {

namespace {

void check_sample(double v) {
    if (!std::isfinite(v)) {
        throw InvalidArgument("non-finite integrand sample");
    }
}

struct Panel {
    double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

// Adaptive Simpson with Richardson extrapolation; accumulates the
// |S_half - S|/15 bound into err.
double adaptive_1d(const std::function<double(double)>& f, double a, double b, double abs_tol,
                   double rel_tol, double& err, long& evals) {
    const int kMaxDepth = 52;
    struct Frame {
        Panel p;
        double tol;
        int depth;
    };
    auto eval = [&](double x) {
        const double v = f(x);
        check_sample(v);
        ++evals;
        return v;
    };
    // seed the recursion with a uniform partition so narrow bumps between
    // the first sample points cannot be skipped wholesale
    const int kInitialPanels = 32;
    std::vector<Frame> stack;
    stack.reserve(kInitialPanels);
    const double h = (b - a) / kInitialPanels;
    for (int p = 0; p < kInitialPanels; ++p) {
        const double pa = a + p * h;
        const double pb = p + 1 == kInitialPanels ? b : pa + h;
        const double fa = eval(pa), fm = eval(0.5 * (pa + pb)), fb = eval(pb);
        stack.push_back(
            {Panel{pa, pb, fa, fm, fb, simpson(pa, pb, fa, fm, fb)}, abs_tol / kInitialPanels, 0});
    }
    double total = 0.0;
    err = 0.0;
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        const Panel& p = fr.p;
        const double m = 0.5 * (p.a + p.b);
        const double fl = eval(0.5 * (p.a + m));
        const double fr2 = eval(0.5 * (m + p.b));
        const double left = simpson(p.a, m, p.fa, fl, p.fm);
        const double right = simpson(m, p.b, p.fm, fr2, p.fb);
        const double delta = left + right - p.whole;
        const double local_tol = std::max(fr.tol, rel_tol * std::abs(left + right));
        if (fr.depth >= kMaxDepth || std::abs(delta) <= 15.0 * local_tol) {
            total += left + right + delta / 15.0;
            err += std::abs(delta) / 15.0;
            continue;
        }
        stack.push_back({Panel{p.a, m, p.fa, fl, p.fm, left}, 0.5 * fr.tol, fr.depth + 1});
        stack.push_back({Panel{m, p.b, p.fm, fr2, p.fb, right}, 0.5 * fr.tol, fr.depth + 1});
    }
    return total;
}

// Nest the adaptive 1-d rule across dimensions (outermost axis first).
double adaptive_nested(const std::function<double(const Vector&)>& f, const Hypercube& box,
                       Vector& point, Eigen::Index axis, double abs_tol, double rel_tol,
                       double& err, long& evals) {
    double inner_err_max = 0.0;
    auto line = [&](double x) {
        point(axis) = x;
        if (axis + 1 == box.dim()) {
            return f(point);
        }
        double inner_err = 0.0;
        const double v = adaptive_nested(f, box, point, axis + 1, abs_tol * 0.1, rel_tol * 0.1,
                                         inner_err, evals);
        inner_err_max = std::max(inner_err_max, inner_err);
        return v;
    };
    double outer_err = 0.0;
    const double v = adaptive_1d(line, box.lower()(axis), box.upper()(axis), abs_tol, rel_tol,
                                 outer_err, evals);
    err = outer_err + (box.upper()(axis) - box.lower()(axis)) * inner_err_max;
    return v;
}

QuadratureResult tensor_simpson(const std::function<double(const Vector&)>& f,
                                const Hypercube& box, int points_per_axis) {
    const Eigen::Index d = box.dim();
    long n = std::max(3, points_per_axis);
    if (n % 2 == 0) ++n;
    std::vector<double> w1(n);
    for (long i = 0; i < n; ++i) w1[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);

    Vector h(d);
    for (Eigen::Index t = 0; t < d; ++t) h(t) = (box.upper()(t) - box.lower()(t)) / double(n - 1);

    std::vector<long> idx(d, 0);
    Vector x(d);
    double fine = 0.0, coarse = 0.0;
    while (true) {
        double wf = 1.0, wc = 1.0;
        bool on_coarse = true;
        for (Eigen::Index t = 0; t < d; ++t) {
            x(t) = box.lower()(t) + h(t) * double(idx[t]);
            wf *= w1[idx[t]];
            if (idx[t] % 2) {
                on_coarse = false;
            } else {
                const long ic = idx[t] / 2;
                const long nc = (n - 1) / 2 + 1;
                wc *= (ic == 0 || ic == nc - 1) ? 1.0 : (ic % 2 ? 4.0 : 2.0);
            }
        }
        const double v = f(x);
        check_sample(v);
        fine += wf * v;
        if (on_coarse) coarse += wc * v;
        Eigen::Index t = 0;
        for (; t < d; ++t) {
            if (++idx[t] < n) break;
            idx[t] = 0;
        }
        if (t == d) break;
    }
    double scale_f = 1.0, scale_c = 1.0;
    for (Eigen::Index t = 0; t < d; ++t) {
        scale_f *= h(t) / 3.0;
        scale_c *= 2.0 * h(t) / 3.0;
    }
    const double vf = fine * scale_f;
    const double vc = coarse * scale_c;
    return QuadratureResult{vf, std::abs(vf - vc) / 15.0, true};
}

double radical_inverse(long index, long base) {
    double inv = 1.0 / double(base);
    double scale = inv;
    double value = 0.0;
    while (index > 0) {
        value += double(index % base) * scale;
        index /= base;
        scale *= inv;
    }
    return value;
}

constexpr long kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

} // namespace

QuadratureResult integrate_numeric(const std::function<double(const Vector&)>& f,
                                   const Hypercube& domain, const QuadratureSpec& spec) {
    using Method = QuadratureSpec::Method;
    if (spec.method != Method::quasi_random && domain.dim() > 3) {
        throw InvalidArgument("grid and adaptive quadrature support d <= 3 only");
    }
    switch (spec.method) {
        case Method::adaptive: {
            Vector point(domain.dim());
            double err = 0.0;
            long evals = 0;
            const double v =
                adaptive_nested(f, domain, point, 0, spec.abs_tol, spec.rel_tol, err, evals);
            return QuadratureResult{v, err, false};
        }
        case Method::tensor_grid:
            return tensor_simpson(f, domain, spec.points_per_axis);
        case Method::quasi_random: {
            const PointMatrix pts = halton_points(spec.count, domain);
            double sum = 0.0, sumsq = 0.0;
            for (Eigen::Index i = 0; i < pts.rows(); ++i) {
                const double v = f(pts.row(i).transpose());
                check_sample(v);
                sum += v;
                sumsq += v * v;
            }
            const double n = double(pts.rows());
            const double meanv = sum / n;
            const double var = std::max(0.0, sumsq / n - meanv * meanv);
            const double vol = domain.volume();
            return QuadratureResult{vol * meanv, vol * std::sqrt(var / n), true};
        }
    }
    throw InvalidArgument("unknown quadrature method");
}

GridBayesResult grid_bayes_filter(const std::function<double(double, double)>& transition,
                                  const std::function<double(const Vector&, double)>& observation,
                                  const std::function<double(double)>& initial,
                                  const std::vector<Vector>& observations, const Vector& axis) {
    const Eigen::Index g = axis.size();
    if (g < 2) {
        throw InvalidArgument("grid needs at least two points");
    }
    const double dx = axis(1) - axis(0);
    Vector p(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        p(i) = initial(axis(i));
        check_sample(p(i));
    }
    const double mass0 = p.sum() * dx;
    if (!(mass0 > 1e-300)) {
        throw ZeroEvidence("initial density is zero on the grid");
    }
    p /= mass0;

    GridBayesResult out;
    out.axis = axis;
    for (std::size_t t = 0; t < observations.size(); ++t) {
        Vector next(g);
        for (Eigen::Index i = 0; i < g; ++i) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < g; ++j) acc += transition(axis(i), axis(j)) * p(j);
            next(i) = acc * dx * observation(observations[t], axis(i));
            check_sample(next(i));
        }
        const double evidence = next.sum() * dx;
        if (!(evidence > 1e-300)) {
            throw ZeroEvidence("zero evidence on grid at step " + std::to_string(t + 1));
        }
        p = next / evidence;
        out.densities.push_back(p);
    }
    return out;
}

PointMatrix uniform_points(long count, const Hypercube& domain, std::uint64_t seed) {
    if (count < 1) {
        throw InvalidArgument("need at least one point");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PointMatrix pts(count, domain.dim());
    for (long i = 0; i < count; ++i) {
        for (Eigen::Index t = 0; t < domain.dim(); ++t) {
            pts(i, t) = domain.lower()(t) + (domain.upper()(t) - domain.lower()(t)) * unit(rng);
        }
    }
    return pts;
}

PointMatrix halton_points(long count, const Hypercube& domain) {
    if (count < 1) {
        throw InvalidArgument("need at least one point");
    }
    if (domain.dim() > Eigen::Index(sizeof(kPrimes) / sizeof(kPrimes[0]))) {
        throw InvalidArgument("halton sequence limited to 12 dimensions");
    }
    PointMatrix pts(count, domain.dim());
    for (long i = 0; i < count; ++i) {
        for (Eigen::Index t = 0; t < domain.dim(); ++t) {
            const double u = radical_inverse(i + 1, kPrimes[t]);
            pts(i, t) = domain.lower()(t) + (domain.upper()(t) - domain.lower()(t)) * u;
        }
    }
    return pts;
}

PointMatrix rejection_sample(const GaussianPsdModel& p, const Hypercube& domain, long count,
                             std::uint64_t seed) {
    if (domain.dim() != p.dim()) {
        throw DimensionMismatch("domain dimension does not match the model");
    }
    // flat envelope from a probe-grid maximum, inflated 1.2x
    const PointMatrix probes = domain.dim() <= 2
                                   ? halton_points(8192, domain)
                                   : halton_points(32768, domain);
    double peak = 0.0;
    for (Eigen::Index i = 0; i < probes.rows(); ++i) {
        peak = std::max(peak, p.eval(probes.row(i).transpose()));
    }
    if (!(peak > 0.0)) {
        throw EnvelopeFailure("model is numerically zero on the probe grid");
    }
    const double envelope = 1.2 * peak;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PointMatrix samples(count, domain.dim());
    Vector x(domain.dim());
    long accepted = 0;
    long attempts = 0;
    while (accepted < count) {
        for (Eigen::Index t = 0; t < domain.dim(); ++t) {
            x(t) = domain.lower()(t) + (domain.upper()(t) - domain.lower()(t)) * unit(rng);
        }
        const double u = unit(rng) * envelope;
        ++attempts;
        if (u <= p.eval(x)) {
            samples.row(accepted++) = x.transpose();
        }
        if (attempts >= 1000000 && double(accepted) / double(attempts) < 1e-6) {
            throw EnvelopeFailure("acceptance rate below 1e-6");
        }
    }
    return samples;
}

} // namespace psdm::oracle
