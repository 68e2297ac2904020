#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psdm/compression.hpp"
#include "psdm/hmm.hpp"
#include "psdm/io.hpp"
#include "psdm/learning.hpp"
#include "psdm/model.hpp"
#include "psdm/moments.hpp"
#include "psdm/oracle.hpp"

namespace py = pybind11;
using namespace psdm;

namespace {

using BoundsPair = std::pair<Vector, Vector>;

Domain to_domain(const std::optional<BoundsPair>& bounds) {
    if (!bounds) return full_space;
    return Domain(Hypercube(bounds->first, bounds->second));
}

VariableSplit to_split(const std::optional<std::vector<std::pair<std::string, Eigen::Index>>>& blocks,
                       Eigen::Index dim) {
    if (!blocks) return VariableSplit::single(dim);
    std::vector<VariableSplit::Block> bs;
    bs.reserve(blocks->size());
    for (const auto& [name, width] : *blocks) bs.push_back({name, width});
    return VariableSplit(std::move(bs));
}

std::vector<std::pair<std::string, Eigen::Index>> split_to_list(const VariableSplit& split) {
    std::vector<std::pair<std::string, Eigen::Index>> out;
    for (const auto& b : split.blocks()) out.emplace_back(b.name, b.width);
    return out;
}

py::dict report_to_dict(const FitReport& r) {
    py::dict d;
    d["objective"] = r.objective;
    d["grad_norm"] = r.grad_norm;
    d["iterations"] = r.iterations;
    d["min_eigenvalue"] = r.min_eigenvalue;
    d["dropped_samples"] = r.dropped_samples;
    d["converged"] = r.converged;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gaussian PSD probability models: closed-form sum/product rules, "
              "moments, density fitting, compression and HMM filtering";

    py::register_exception<NotPsd>(m, "NotPsdError");
    py::register_exception<ZeroMass>(m, "ZeroMassError");
    py::register_exception<ZeroEvidence>(m, "ZeroEvidenceError");

    py::class_<GaussianPsdModel>(m, "Model")
        .def(py::init([](const Matrix& coeffs, const PointMatrix& points, const Vector& eta,
                         std::optional<std::vector<std::pair<std::string, Eigen::Index>>> blocks) {
                 return GaussianPsdModel(coeffs, points, Precision(eta),
                                         to_split(blocks, points.cols()));
             }),
             py::arg("coeffs"), py::arg("points"), py::arg("eta"),
             py::arg("blocks") = std::nullopt)
        .def_property_readonly("coeffs", &GaussianPsdModel::coeffs)
        .def_property_readonly("points", &GaussianPsdModel::points)
        .def_property_readonly("eta",
                               [](const GaussianPsdModel& s) { return s.precision().vec(); })
        .def_property_readonly("blocks",
                               [](const GaussianPsdModel& s) { return split_to_list(s.split()); })
        .def_property_readonly("dim", &GaussianPsdModel::dim)
        .def_property_readonly("size", &GaussianPsdModel::size)
        .def("__call__",
             [](const GaussianPsdModel& s, const Vector& x) { return s.eval(x); })
        .def("eval_many", &GaussianPsdModel::eval_many)
        .def("with_blocks",
             [](const GaussianPsdModel& s,
                const std::vector<std::pair<std::string, Eigen::Index>>& blocks) {
                 return s.with_split(to_split(blocks, s.dim()));
             });

    m.def(
        "from_mixture",
        [](const Vector& weights, const PointMatrix& points, const Vector& eta) {
            return GaussianPsdModel::from_mixture(weights, points, Precision(eta));
        },
        py::arg("weights"), py::arg("points"), py::arg("eta"));

    m.def(
        "integrate",
        [](const GaussianPsdModel& p, std::optional<BoundsPair> domain) {
            return integrate(p, to_domain(domain));
        },
        py::arg("model"), py::arg("domain") = std::nullopt);
    m.def(
        "normalize",
        [](const GaussianPsdModel& p, std::optional<BoundsPair> domain) {
            return normalize(p, to_domain(domain));
        },
        py::arg("model"), py::arg("domain") = std::nullopt);
    m.def(
        "partial_eval",
        [](const GaussianPsdModel& p, const std::string& block, const Vector& value) {
            return partial_eval(p, block, value);
        },
        py::arg("model"), py::arg("block"), py::arg("value"));
    m.def(
        "marginalize",
        [](const GaussianPsdModel& p, const std::string& block, std::optional<BoundsPair> domain) {
            return marginalize(p, block, to_domain(domain));
        },
        py::arg("model"), py::arg("block"), py::arg("domain") = std::nullopt);
    m.def("multiply", &multiply, py::arg("a"), py::arg("b"));
    m.def("reduce", &reduce, py::arg("model"), py::arg("copies"));
    m.def(
        "markov_transition",
        [](const GaussianPsdModel& transition, const GaussianPsdModel& state,
           std::optional<BoundsPair> domain) {
            return markov_transition(transition, state, to_domain(domain));
        },
        py::arg("transition"), py::arg("state"), py::arg("domain") = std::nullopt);

    m.def(
        "condition",
        [](const GaussianPsdModel& joint, const std::string& block, const Vector& value,
           std::optional<BoundsPair> domain) {
            return condition(joint, block, value, to_domain(domain));
        },
        py::arg("joint"), py::arg("block"), py::arg("value"), py::arg("domain") = std::nullopt);
    m.def("mean", &mean, py::arg("model"));
    m.def("covariance", &covariance, py::arg("model"));
    m.def("characteristic_function", &characteristic_function, py::arg("model"), py::arg("omega"));
    m.def("is_normalized", &is_normalized, py::arg("model"), py::arg("tol") = 1e-10);

    m.def(
        "compress",
        [](const GaussianPsdModel& p, std::optional<PointMatrix> points,
           std::optional<long> num_targets, std::optional<BoundsPair> domain, std::uint64_t seed,
           double jitter) {
            CompressionPlan plan;
            plan.targets = std::move(points);
            plan.num_targets = num_targets.value_or(0);
            if (domain) plan.sample_domain = Hypercube(domain->first, domain->second);
            plan.seed = seed;
            plan.jitter = jitter;
            return compress(p, plan);
        },
        py::arg("model"), py::arg("points") = std::nullopt, py::arg("num_targets") = std::nullopt,
        py::arg("domain") = std::nullopt, py::arg("seed") = 0, py::arg("jitter") = 1e-10);
    m.def(
        "compression_error",
        [](const GaussianPsdModel& original, const GaussianPsdModel& compressed,
           const BoundsPair& domain, long probes) {
            const auto r = compression_error(original, compressed,
                                             Hypercube(domain.first, domain.second), probes);
            return py::make_tuple(r.max_abs, r.mixed_bound_epsilon);
        },
        py::arg("original"), py::arg("compressed"), py::arg("domain"), py::arg("probes") = 0);

    m.def(
        "fit",
        [](const PointMatrix& samples, double lambda_, const Vector& eta, const BoundsPair& domain,
           std::optional<PointMatrix> centers, int num_centers, std::uint64_t seed, int max_iters) {
            FitConfig cfg{lambda_, Precision(eta), Hypercube(domain.first, domain.second)};
            cfg.centers = std::move(centers);
            cfg.num_centers = num_centers;
            cfg.seed = seed;
            cfg.solver.max_iters = max_iters;
            auto result = fit(samples, cfg);
            return py::make_tuple(result.model, report_to_dict(result.report));
        },
        py::arg("samples"), py::arg("lambda_"), py::arg("eta"), py::arg("domain"),
        py::arg("centers") = std::nullopt, py::arg("num_centers") = 0, py::arg("seed") = 0,
        py::arg("max_iters") = 500);
    m.def(
        "theorem_hyperparams",
        [](long n, double beta, Eigen::Index d) {
            const auto hp = theorem_hyperparams(n, beta, d);
            py::dict out;
            out["eta"] = hp.eta.vec();
            out["lambda"] = hp.lambda;
            out["num_centers"] = hp.num_centers;
            return out;
        },
        py::arg("n"), py::arg("beta"), py::arg("d"));
    m.def(
        "l2_error",
        [](const GaussianPsdModel& model, const std::function<double(const Vector&)>& reference,
           const BoundsPair& domain) {
            return l2_error(model, reference, Hypercube(domain.first, domain.second));
        },
        py::arg("model"), py::arg("reference"), py::arg("domain"));

    m.def(
        "filter_run",
        [](const GaussianPsdModel& transition, const GaussianPsdModel& observation,
           const GaussianPsdModel& initial, const PointMatrix& observations,
           std::optional<BoundsPair> domain) {
            const FilterContext ctx =
                filter_init({transition, observation, initial}, to_domain(domain));
            const FilterRun run = filter_run(ctx, observations);
            py::list out;
            for (const auto& state : run.states) {
                py::dict d;
                d["t"] = state.t;
                d["model"] = state.model;
                d["evidence"] = state.diag.evidence;
                d["normalization_residual"] = state.diag.normalization_residual;
                d["min_eigenvalue"] = state.diag.min_eigenvalue;
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("transition"), py::arg("observation"), py::arg("initial"), py::arg("observations"),
        py::arg("domain") = std::nullopt);

    m.def(
        "rejection_sample",
        [](const GaussianPsdModel& p, const BoundsPair& domain, long count, std::uint64_t seed) {
            return oracle::rejection_sample(p, Hypercube(domain.first, domain.second), count, seed);
        },
        py::arg("model"), py::arg("domain"), py::arg("count"), py::arg("seed") = 0);
    m.def(
        "integrate_numeric",
        [](const std::function<double(const Vector&)>& f, const BoundsPair& domain) {
            const auto r = oracle::integrate_numeric(f, Hypercube(domain.first, domain.second));
            return py::make_tuple(r.value, r.error_estimate);
        },
        py::arg("f"), py::arg("domain"));

    m.def("serialize", &io::serialize, py::arg("model"),
          py::arg("metadata") = std::map<std::string, std::string>{});
    m.def("parse_model", &io::parse_model, py::arg("text"));
    m.def("save_model", &io::save_model, py::arg("path"), py::arg("model"),
          py::arg("metadata") = std::map<std::string, std::string>{});
    m.def("load_model", &io::load_model, py::arg("path"));
}
