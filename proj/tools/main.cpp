// Command-line front end: model algebra, density fitting, compression,
// filtering and oracle reproduction on serialized models.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "psdm/compression.hpp"
#include "psdm/hmm.hpp"
#include "psdm/io.hpp"
#include "psdm/learning.hpp"
#include "psdm/model.hpp"
#include "psdm/moments.hpp"
#include "psdm/oracle.hpp"

namespace {

using namespace psdm;
using nlohmann::json;

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12f", v);
    return buf;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Vector parse_vector(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            vals.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw InvalidArgument("cannot parse '" + cell + "' as a number");
        }
    }
    if (vals.empty()) {
        throw InvalidArgument("empty vector argument");
    }
    Vector v(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) v(Eigen::Index(i)) = vals[i];
    return v;
}

// "a1,b1;a2,b2;..." one lo,hi pair per axis
Hypercube parse_domain(const std::string& text) {
    std::vector<double> lo, hi;
    std::stringstream ss(text);
    std::string axis;
    while (std::getline(ss, axis, ';')) {
        const Vector pair = parse_vector(axis);
        if (pair.size() != 2) {
            throw InvalidArgument("each domain axis needs 'lo,hi'");
        }
        lo.push_back(pair(0));
        hi.push_back(pair(1));
    }
    Vector l(lo.size()), u(hi.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
        l(Eigen::Index(i)) = lo[i];
        u(Eigen::Index(i)) = hi[i];
    }
    return Hypercube(l, u);
}

Domain parse_optional_domain(const std::string& text) {
    if (text.empty()) return full_space;
    return Domain(parse_domain(text));
}

json vector_to_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    }
    return rows;
}

// --- oracle-check suites -------------------------------------------------

GaussianPsdModel random_model(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
    std::uniform_real_distribution<double> pos(0.4, 3.0);
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    PointMatrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index t = 0; t < d; ++t) X(i, t) = box(rng);
    }
    Vector eta(d);
    for (Eigen::Index t = 0; t < d; ++t) eta(t) = pos(rng);
    Matrix L(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) L(i, j) = gauss(rng);
    }
    Matrix A = L * L.transpose() / double(n);
    return GaussianPsdModel(std::move(A), std::move(X), Precision(std::move(eta)));
}

struct SuiteResult {
    int total = 0;
    int failed = 0;

    void record(const std::string& label, double closed, double reference, double tol) {
        ++total;
        const double rel = std::abs(closed - reference) / std::max(1.0, std::abs(reference));
        const bool ok = rel <= tol;
        if (!ok) ++failed;
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << label << " closed=" << fmt17(closed)
                  << " oracle=" << fmt17(reference) << " rel=" << fmt17(rel) << "\n";
    }
};

Hypercube bounding_box(const GaussianPsdModel& m, double pad) {
    Vector lo = m.points().colwise().minCoeff().transpose();
    Vector hi = m.points().colwise().maxCoeff().transpose();
    const double tail = pad / std::sqrt(m.precision().vec().minCoeff());
    return Hypercube(lo.array() - tail, hi.array() + tail);
}

int suite_integration(std::uint64_t seed, int cases) {
    std::mt19937_64 rng(seed);
    SuiteResult res;
    for (int c = 0; c < cases; ++c) {
        const Eigen::Index d = 1 + Eigen::Index(rng() % 2);
        const GaussianPsdModel m = random_model(rng, 2 + Eigen::Index(rng() % 3), d);
        const Hypercube box = bounding_box(m, 7.0);
        oracle::QuadratureSpec spec;
        spec.method = d == 1 ? oracle::QuadratureSpec::Method::adaptive
                             : oracle::QuadratureSpec::Method::tensor_grid;
        spec.points_per_axis = 301;
        const auto full = oracle::integrate_numeric(
            [&](const Vector& x) { return m.eval(x); }, box, spec);
        res.record("integrate d=" + std::to_string(d), integrate(m), full.value, 1e-8);

        const Hypercube small = Hypercube::symmetric(1.0, d);
        const auto part = oracle::integrate_numeric(
            [&](const Vector& x) { return m.eval(x); }, small, spec);
        res.record("integrate box d=" + std::to_string(d), integrate(m, Domain(small)),
                   part.value, 1e-8);
    }
    std::cout << res.total - res.failed << "/" << res.total << " checks passed\n";
    return res.failed == 0 ? 0 : 2;
}

int suite_moments(std::uint64_t seed, int cases) {
    std::mt19937_64 rng(seed);
    SuiteResult res;
    for (int c = 0; c < cases; ++c) {
        const GaussianPsdModel m =
            normalize(random_model(rng, 2 + Eigen::Index(rng() % 3), 1));
        const Hypercube box = bounding_box(m, 8.0);
        oracle::QuadratureSpec spec;
        const auto mass = oracle::integrate_numeric(
            [&](const Vector& x) { return m.eval(x); }, box, spec);
        const auto m1 = oracle::integrate_numeric(
            [&](const Vector& x) { return x(0) * m.eval(x); }, box, spec);
        const auto m2 = oracle::integrate_numeric(
            [&](const Vector& x) { return x(0) * x(0) * m.eval(x); }, box, spec);
        res.record("mass", integrate(m), mass.value, 1e-8);
        res.record("mean", mean(m)(0), m1.value / mass.value, 1e-7);
        const double var_oracle = m2.value / mass.value - std::pow(m1.value / mass.value, 2);
        res.record("variance", covariance(m)(0, 0), var_oracle, 1e-7);
    }
    std::cout << res.total - res.failed << "/" << res.total << " checks passed\n";
    return res.failed == 0 ? 0 : 2;
}

int suite_product(std::uint64_t seed, int cases) {
    std::mt19937_64 rng(seed);
    SuiteResult res;
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    for (int c = 0; c < cases; ++c) {
        const Eigen::Index d = 1 + Eigen::Index(rng() % 3);
        const GaussianPsdModel a = random_model(rng, 1 + Eigen::Index(rng() % 4), d);
        const GaussianPsdModel b = random_model(rng, 1 + Eigen::Index(rng() % 4), d);
        const GaussianPsdModel ab = multiply(a, b);
        double worst = 0.0;
        Vector x(d);
        for (int probe = 0; probe < 200; ++probe) {
            for (Eigen::Index t = 0; t < d; ++t) x(t) = box(rng);
            const double lhs = ab.eval(x);
            const double rhs = a.eval(x) * b.eval(x);
            worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
        }
        res.record("product pointwise d=" + std::to_string(d), worst, 0.0, 1e-12);
    }
    std::cout << res.total - res.failed << "/" << res.total << " checks passed\n";
    return res.failed == 0 ? 0 : 2;
}

int suite_compression(std::uint64_t seed, int cases) {
    std::mt19937_64 rng(seed);
    SuiteResult res;
    for (int c = 0; c < cases; ++c) {
        const GaussianPsdModel m = random_model(rng, 4, 1);
        CompressionPlan plan;
        plan.targets = m.points();
        const GaussianPsdModel same = compress(m, plan);
        const auto err = compression_error(m, same, Hypercube::symmetric(2.5, 1));
        res.record("idempotent compression", err.max_abs, 0.0, 1e-8);
    }
    std::cout << res.total - res.failed << "/" << res.total << " checks passed\n";
    return res.failed == 0 ? 0 : 2;
}

int suite_hmm(std::uint64_t seed, int cases) {
    std::mt19937_64 rng(seed);
    SuiteResult res;
    for (int c = 0; c < cases; ++c) {
        const Eigen::Index n = 1 + Eigen::Index(rng() % 3);
        const Eigen::Index m = 1 + Eigen::Index(rng() % 3);
        const Eigen::Index n0 = 1 + Eigen::Index(rng() % 3);
        GaussianPsdModel trans = random_model(rng, n, 2).with_split(
            VariableSplit({{"x_next", 1}, {"x", 1}}));
        GaussianPsdModel obs = random_model(rng, m, 2).with_split(
            VariableSplit({{"y", 1}, {"x", 1}}));
        GaussianPsdModel init = random_model(rng, n0, 1);
        const FilterContext ctx = filter_init({trans, obs, init});
        FilterState state = ctx.initial_state();
        GaussianPsdModel generic = state.model;
        std::normal_distribution<double> ygen(0.0, 1.0);
        double worst = 0.0;
        for (int t = 0; t < 3; ++t) {
            Vector y(1);
            y(0) = ygen(rng);
            state = filter_step(ctx, state, y);
            generic = filter_step_generic({trans, obs, init}, generic, y);
            std::uniform_real_distribution<double> box(-3.0, 3.0);
            for (int probe = 0; probe < 50; ++probe) {
                Vector x(1);
                x(0) = box(rng);
                worst = std::max(worst, std::abs(state.model.eval(x) - generic.eval(x)));
            }
        }
        res.record("recursion equals composition", worst, 0.0, 1e-10);
    }
    std::cout << res.total - res.failed << "/" << res.total << " checks passed\n";
    return res.failed == 0 ? 0 : 2;
}

// --------------------------------------------------------------------------

int dispatch(int argc, char** argv) {
    CLI::App app{"Gaussian PSD probability models: closed-form inference algebra, "
                 "density fitting, compression and HMM filtering"};
    app.require_subcommand(1);

    // shared option storage
    std::string model_path, model2_path, out_path, block, at_text, domain_text;
    std::string samples_path, eta_text, centers_path, components_path, obs_path, out_dir = ".";
    std::string omega_text, suite, report_path;
    double lambda = 0.0, beta = 0.0, jitter = 1e-10;
    std::uint64_t seed = 0;
    long grid_n = 201;
    int num_centers = 0, max_iters = 500, compress_m = 0, cases = 10;

    auto* c_eval = app.add_subcommand("eval", "Evaluate a model at a point");
    c_eval->add_option("--model", model_path)->required();
    c_eval->add_option("--at", at_text, "point, comma separated")->required();

    auto* c_int = app.add_subcommand("integrate", "Total mass over a domain");
    c_int->add_option("--model", model_path)->required();
    c_int->add_option("--domain", domain_text, "'lo,hi' per axis, ';' separated");

    auto* c_norm = app.add_subcommand("normalize", "Scale a model to unit mass");
    c_norm->add_option("--model", model_path)->required();
    c_norm->add_option("--out", out_path)->required();
    c_norm->add_option("--domain", domain_text);

    auto* c_marg = app.add_subcommand("marginalize", "Integrate out a named block");
    c_marg->add_option("--model", model_path)->required();
    c_marg->add_option("--block", block)->required();
    c_marg->add_option("--out", out_path)->required();
    c_marg->add_option("--domain", domain_text, "domain of the integrated block");

    auto* c_cond = app.add_subcommand("condition", "Condition a joint model on a block value");
    c_cond->add_option("--model", model_path)->required();
    c_cond->add_option("--block", block)->required();
    c_cond->add_option("--at", at_text)->required();
    c_cond->add_option("--out", out_path)->required();
    c_cond->add_option("--domain", domain_text, "normalization domain");

    auto* c_prod = app.add_subcommand("product", "Pointwise product of two models");
    c_prod->add_option("--model", model_path)->required();
    c_prod->add_option("--model2", model2_path)->required();
    c_prod->add_option("--out", out_path)->required();

    auto* c_comp = app.add_subcommand("compress", "Nystroem projection onto fewer base points");
    c_comp->add_option("--model", model_path)->required();
    c_comp->add_option("--out", out_path)->required();
    c_comp->add_option("--m", compress_m, "number of uniform-random target points");
    c_comp->add_option("--points", centers_path, "CSV of explicit target points");
    c_comp->add_option("--domain", domain_text, "sampling domain for random targets");
    c_comp->add_option("--seed", seed);
    c_comp->add_option("--jitter", jitter);

    auto* c_mom = app.add_subcommand("moments", "Mean, covariance and characteristic function");
    c_mom->add_option("--model", model_path)->required();
    c_mom->add_option("--omega", omega_text, "frequency for the characteristic function");

    auto* c_fit = app.add_subcommand("fit", "Fit a density to samples");
    c_fit->add_option("--samples", samples_path)->required();
    c_fit->add_option("--out", out_path)->required();
    c_fit->add_option("--domain", domain_text, "fit domain (default [-1,1]^d)");
    c_fit->add_option("--lambda", lambda, "regularization weight");
    c_fit->add_option("--eta", eta_text, "kernel precision, comma separated");
    c_fit->add_option("--beta", beta, "smoothness: derive eta/lambda/centers from it");
    c_fit->add_option("--centers", num_centers, "number of uniform-random centers");
    c_fit->add_option("--centers-file", centers_path, "CSV of explicit centers");
    c_fit->add_option("--seed", seed);
    c_fit->add_option("--max-iters", max_iters);
    c_fit->add_option("--report", report_path, "write the fit report JSON here");

    auto* c_hmm = app.add_subcommand("hmm-filter", "Run the filter over an observation file");
    c_hmm->add_option("--components", components_path)->required();
    c_hmm->add_option("--obs", obs_path)->required();
    c_hmm->add_option("--out-dir", out_dir);
    c_hmm->add_option("--domain", domain_text, "state-space domain");

    auto* c_oracle = app.add_subcommand("oracle-check", "Re-run a brute-force comparison suite");
    c_oracle->add_option("suite", suite, "integration|moments|product|compression|hmm")
        ->required();
    c_oracle->add_option("--seed", seed);
    c_oracle->add_option("--cases", cases);

    auto* c_curve = app.add_subcommand("density-curve", "Emit x,f(x) CSV for plotting (1-d)");
    c_curve->add_option("--model", model_path)->required();
    c_curve->add_option("--grid", grid_n, "number of grid points");
    c_curve->add_option("--domain", domain_text, "'lo,hi' (default: padded base-point range)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (c_eval->parsed()) {
        const GaussianPsdModel m = io::load_model(model_path);
        std::cout << fmt12(m.eval(parse_vector(at_text))) << "\n";
    } else if (c_int->parsed()) {
        const GaussianPsdModel m = io::load_model(model_path);
        std::cout << fmt12(integrate(m, parse_optional_domain(domain_text))) << "\n";
    } else if (c_norm->parsed()) {
        const GaussianPsdModel m = io::load_model(model_path);
        io::save_model(out_path, normalize(m, parse_optional_domain(domain_text)));
    } else if (c_marg->parsed()) {
        const GaussianPsdModel m = io::load_model(model_path);
        io::save_model(out_path, marginalize(m, block, parse_optional_domain(domain_text)));
    } else if (c_cond->parsed()) {
        const GaussianPsdModel m = io::load_model(model_path);
        io::save_model(out_path, condition(m, block, parse_vector(at_text),
                                           parse_optional_domain(domain_text)));
    } else if (c_prod->parsed()) {
        const GaussianPsdModel a = io::load_model(model_path);
        const GaussianPsdModel b = io::load_model(model2_path);
        io::save_model(out_path, multiply(a, b));
    } else if (c_comp->parsed()) {
        const GaussianPsdModel m = io::load_model(model_path);
        CompressionPlan plan;
        plan.jitter = jitter;
        plan.seed = seed;
        if (!centers_path.empty()) {
            plan.targets = io::load_samples_csv(centers_path);
        } else {
            if (compress_m < 1) {
                throw InvalidArgument("need --m or --points");
            }
            plan.num_targets = compress_m;
            plan.sample_domain = domain_text.empty()
                                     ? std::optional<Hypercube>(bounding_box(m, 2.0))
                                     : std::optional<Hypercube>(parse_domain(domain_text));
        }
        io::save_model(out_path, compress(m, plan));
    } else if (c_mom->parsed()) {
        const GaussianPsdModel m = io::load_model(model_path);
        json j;
        j["renormalized"] = !is_normalized(m);
        j["mean"] = vector_to_json(mean(m));
        j["covariance"] = matrix_to_json(covariance(m));
        if (!omega_text.empty()) {
            const Vector omega = parse_vector(omega_text);
            const auto cf = characteristic_function(m, omega);
            j["cf"] = {{"omega", vector_to_json(omega)}, {"re", cf.real()}, {"im", cf.imag()}};
        }
        std::cout << j.dump(2) << "\n";
    } else if (c_fit->parsed()) {
        const PointMatrix samples = io::load_samples_csv(samples_path);
        const Eigen::Index d = samples.cols();
        Hypercube domain = domain_text.empty() ? Hypercube::symmetric(1.0, d)
                                               : parse_domain(domain_text);
        double lam = lambda;
        std::optional<Precision> eta;
        int m_centers = num_centers;
        if (beta > 0.0) {
            const auto hp = theorem_hyperparams(samples.rows(), beta, d);
            lam = lambda > 0.0 ? lambda : hp.lambda;
            eta = hp.eta;
            if (m_centers == 0) m_centers = hp.num_centers;
        }
        if (!eta_text.empty()) {
            eta = Precision(parse_vector(eta_text));
        }
        if (!eta || !(lam > 0.0)) {
            throw InvalidArgument("need --beta or both --eta and --lambda");
        }
        FitConfig cfg{lam, *eta, domain};
        cfg.seed = seed;
        cfg.solver.max_iters = max_iters;
        if (!centers_path.empty()) {
            cfg.centers = io::load_samples_csv(centers_path);
        } else {
            cfg.num_centers = m_centers;
        }
        const FitResult result = fit(samples, cfg);
        io::save_model(out_path, result.model);
        json j;
        j["iterations"] = result.report.iterations;
        j["converged"] = result.report.converged;
        j["grad_norm"] = result.report.grad_norm;
        j["min_eigenvalue"] = result.report.min_eigenvalue;
        j["dropped_samples"] = result.report.dropped_samples;
        j["objective_initial"] = result.report.objective.front();
        j["objective_final"] = result.report.objective.back();
        const std::string report_text = j.dump(2) + "\n";
        if (report_path.empty()) {
            std::cout << report_text;
        } else {
            std::ofstream out(report_path);
            out << report_text;
        }
    } else if (c_hmm->parsed()) {
        const HmmComponents components = io::load_components(components_path);
        PointMatrix obs(0, 0);
        {
            std::ifstream in(obs_path);
            if (!in) {
                throw InvalidArgument("cannot open '" + obs_path + "' for reading");
            }
            std::string first;
            std::getline(in, first);
            in.seekg(0);
            if (in.peek() == std::char_traits<char>::eof() || first.empty()) {
                obs = PointMatrix(0, 1); // empty observation file: initial state only
            } else {
                in.clear();
                obs = io::parse_samples_csv(in);
            }
        }
        const FilterContext ctx = filter_init(components, parse_optional_domain(domain_text));
        const FilterRun run = filter_run(ctx, obs);
        std::filesystem::create_directories(out_dir);
        json diag;
        diag["steps"] = json::array();
        for (const auto& state : run.states) {
            char name[32];
            std::snprintf(name, sizeof(name), "step_%03d.json", state.t);
            io::save_model((std::filesystem::path(out_dir) / name).string(), state.model);
            diag["steps"].push_back({{"t", state.t},
                                     {"evidence", state.diag.evidence},
                                     {"normalization_residual", state.diag.normalization_residual},
                                     {"min_eigenvalue", state.diag.min_eigenvalue}});
        }
        std::ofstream out(std::filesystem::path(out_dir) / "diagnostics.json");
        out << diag.dump(2) << "\n";
        std::cout << "wrote " << run.states.size() << " state files to " << out_dir << "\n";
    } else if (c_oracle->parsed()) {
        if (suite == "integration") return suite_integration(seed, cases);
        if (suite == "moments") return suite_moments(seed, cases);
        if (suite == "product") return suite_product(seed, cases);
        if (suite == "compression") return suite_compression(seed, cases);
        if (suite == "hmm") return suite_hmm(seed, std::max(1, cases / 3));
        throw InvalidArgument("unknown suite '" + suite + "'");
    } else if (c_curve->parsed()) {
        const GaussianPsdModel m = io::load_model(model_path);
        if (m.dim() != 1) {
            throw InvalidArgument("density-curve supports 1-d models");
        }
        if (grid_n < 2) {
            throw InvalidArgument("--grid must be >= 2");
        }
        Hypercube box = domain_text.empty() ? bounding_box(m, 5.0) : parse_domain(domain_text);
        std::cout << "x,f\n";
        for (long i = 0; i < grid_n; ++i) {
            const double x =
                box.lower()(0) + (box.upper()(0) - box.lower()(0)) * double(i) / double(grid_n - 1);
            Vector xv(1);
            xv(0) = x;
            std::cout << fmt17(x) << "," << fmt17(m.eval(xv)) << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const psdm::Error& e) {
        nlohmann::json err;
        err["error"] = e.code();
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return e.numerical() ? 2 : 1;
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = "Internal";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
