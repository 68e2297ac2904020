#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "psdm/hmm.hpp"
#include "psdm/model.hpp"

namespace psdm::io {

/// Model file schema (version 1), JSON:
///   schema_version, dim, blocks [[name,width]...], eta (d), points
///   (n*d row-major), coeffs (lower triangle row-major, n(n+1)/2),
///   metadata (string map). Numbers round-trip exactly.
std::string serialize(const GaussianPsdModel& m,
                      const std::map<std::string, std::string>& metadata = {});
GaussianPsdModel parse_model(const std::string& text);

void save_model(const std::string& path, const GaussianPsdModel& m,
                const std::map<std::string, std::string>& metadata = {});
GaussianPsdModel load_model(const std::string& path);

/// Samples CSV: header row naming the d columns, one point per row.
PointMatrix parse_samples_csv(std::istream& in, std::vector<std::string>* column_names = nullptr);
PointMatrix load_samples_csv(const std::string& path,
                             std::vector<std::string>* column_names = nullptr);
void write_samples_csv(std::ostream& out, const PointMatrix& points,
                       const std::vector<std::string>& column_names = {});

/// Components file: JSON object with model entries "transition",
/// "observation", "initial".
std::string serialize_components(const HmmComponents& c);
HmmComponents parse_components(const std::string& text);
HmmComponents load_components(const std::string& path);

} // namespace psdm::io
