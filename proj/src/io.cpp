#include "psdm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace psdm::io {

namespace {

using nlohmann::json;

const json& field(const json& j, const char* name) {
    const auto it = j.find(name);
    if (it == j.end()) {
        throw SchemaError(std::string("missing field '") + name + "'");
    }
    return *it;
}

json model_to_json(const GaussianPsdModel& m,
                   const std::map<std::string, std::string>& metadata) {
    if (m.size() > 4096) {
        std::cerr << "psdm: warning: serializing a model with " << m.size()
                  << " base points (" << m.size() * (m.size() + 1) / 2
                  << " packed coefficients)\n";
    }
    json j;
    j["schema_version"] = 1;
    j["dim"] = m.dim();
    json blocks = json::array();
    for (const auto& b : m.split().blocks()) {
        blocks.push_back(json::array({b.name, b.width}));
    }
    j["blocks"] = std::move(blocks);
    j["eta"] = std::vector<double>(m.precision().vec().data(),
                                   m.precision().vec().data() + m.dim());
    std::vector<double> points;
    points.reserve(m.size() * m.dim());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        for (Eigen::Index t = 0; t < m.dim(); ++t) points.push_back(m.points()(i, t));
    }
    j["points"] = std::move(points);
    std::vector<double> coeffs;
    coeffs.reserve(m.size() * (m.size() + 1) / 2);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        for (Eigen::Index k = 0; k <= i; ++k) coeffs.push_back(m.coeffs()(i, k));
    }
    j["coeffs"] = std::move(coeffs);
    j["metadata"] = metadata;
    return j;
}

GaussianPsdModel model_from_json(const json& j) {
    if (!j.is_object()) {
        throw SchemaError("model entry must be a JSON object");
    }
    if (field(j, "schema_version").get<int>() != 1) {
        throw SchemaError("unsupported schema_version");
    }
    const Eigen::Index d = field(j, "dim").get<Eigen::Index>();
    if (d < 1) {
        throw SchemaError("dim must be >= 1");
    }
    const auto eta_vals = field(j, "eta").get<std::vector<double>>();
    if (Eigen::Index(eta_vals.size()) != d) {
        throw SchemaError("eta length does not match dim");
    }
    const auto coeff_vals = field(j, "coeffs").get<std::vector<double>>();
    const auto n_real = (std::sqrt(8.0 * double(coeff_vals.size()) + 1.0) - 1.0) / 2.0;
    const Eigen::Index n = Eigen::Index(std::llround(n_real));
    if (n < 1 || std::size_t(n) * (n + 1) / 2 != coeff_vals.size()) {
        throw SchemaError("coeffs length is not a triangular number");
    }
    const auto point_vals = field(j, "points").get<std::vector<double>>();
    if (Eigen::Index(point_vals.size()) != n * d) {
        throw SchemaError("points length does not match n*dim");
    }

    std::vector<VariableSplit::Block> blocks;
    for (const auto& entry : field(j, "blocks")) {
        if (!entry.is_array() || entry.size() != 2) {
            throw SchemaError("each block must be a [name, width] pair");
        }
        blocks.push_back({entry[0].get<std::string>(), entry[1].get<Eigen::Index>()});
    }

    PointMatrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index t = 0; t < d; ++t) X(i, t) = point_vals[i * d + t];
    }
    Matrix A(n, n);
    std::size_t pos = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k <= i; ++k) {
            A(i, k) = A(k, i) = coeff_vals[pos++];
        }
    }
    Vector eta(d);
    for (Eigen::Index t = 0; t < d; ++t) eta(t) = eta_vals[t];

    return GaussianPsdModel(std::move(A), std::move(X), Precision(std::move(eta)),
                            VariableSplit(std::move(blocks)));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open '" + path + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidArgument("cannot open '" + path + "' for writing");
    }
    out << text;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(e.what());
    }
}

} // namespace

std::string serialize(const GaussianPsdModel& m,
                      const std::map<std::string, std::string>& metadata) {
    return model_to_json(m, metadata).dump(2) + "\n";
}

GaussianPsdModel parse_model(const std::string& text) {
    return model_from_json(parse_json(text));
}

void save_model(const std::string& path, const GaussianPsdModel& m,
                const std::map<std::string, std::string>& metadata) {
    write_file(path, serialize(m, metadata));
}

GaussianPsdModel load_model(const std::string& path) {
    return parse_model(read_file(path));
}

PointMatrix parse_samples_csv(std::istream& in, std::vector<std::string>* column_names) {
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("samples file is empty (expected a header row)");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> names;
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) names.push_back(cell);
    if (names.empty()) {
        throw SchemaError("header row names no columns");
    }
    const std::size_t d = names.size();
    if (column_names) *column_names = names;

    std::vector<double> values;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::size_t got = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw SchemaError("line " + std::to_string(row) + ": cannot parse '" + cell +
                                  "' as a number");
            }
            if (!std::isfinite(v)) {
                throw SchemaError("line " + std::to_string(row) + ": non-finite value");
            }
            values.push_back(v);
            ++got;
        }
        if (got != d) {
            throw SchemaError("line " + std::to_string(row) + ": expected " + std::to_string(d) +
                              " fields, found " + std::to_string(got));
        }
    }
    if (values.empty()) {
        throw SchemaError("samples file has no data rows");
    }
    const Eigen::Index rows = Eigen::Index(values.size() / d);
    PointMatrix points(rows, Eigen::Index(d));
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index t = 0; t < Eigen::Index(d); ++t) {
            points(i, t) = values[std::size_t(i) * d + std::size_t(t)];
        }
    }
    return points;
}

PointMatrix load_samples_csv(const std::string& path, std::vector<std::string>* column_names) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open '" + path + "' for reading");
    }
    return parse_samples_csv(in, column_names);
}

void write_samples_csv(std::ostream& out, const PointMatrix& points,
                       const std::vector<std::string>& column_names) {
    char buf[64];
    for (Eigen::Index t = 0; t < points.cols(); ++t) {
        if (t) out << ',';
        if (!column_names.empty()) {
            out << column_names.at(std::size_t(t));
        } else {
            out << "x" << t;
        }
    }
    out << '\n';
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index t = 0; t < points.cols(); ++t) {
            if (t) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", points(i, t));
            out << buf;
        }
        out << '\n';
    }
}

std::string serialize_components(const HmmComponents& c) {
    json j;
    j["transition"] = model_to_json(c.transition, {});
    j["observation"] = model_to_json(c.observation, {});
    j["initial"] = model_to_json(c.initial, {});
    return j.dump(2) + "\n";
}

HmmComponents parse_components(const std::string& text) {
    const json j = parse_json(text);
    return HmmComponents{model_from_json(field(j, "transition")),
                         model_from_json(field(j, "observation")),
                         model_from_json(field(j, "initial"))};
}

HmmComponents load_components(const std::string& path) {
    return parse_components(read_file(path));
}

} // namespace psdm::io
