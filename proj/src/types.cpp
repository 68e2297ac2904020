#include "psdm/types.hpp"

#include <cmath>
#include <unordered_set>

namespace psdm {

namespace detail {

void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
    if (!m.allFinite()) {
        throw InvalidArgument(std::string(what) + " contains a non-finite entry");
    }
}

} // namespace detail

Precision::Precision(Vector eta) : eta_(std::move(eta)) {
    if (eta_.size() < 1) {
        throw InvalidArgument("precision must have dimension >= 1");
    }
    detail::require_finite(eta_, "precision");
    if ((eta_.array() <= 0.0).any()) {
        throw InvalidArgument("precision entries must be strictly positive");
    }
}

Precision Precision::constant(double value, Eigen::Index dim) {
    return Precision(Vector::Constant(dim, value));
}

Precision Precision::segment(Eigen::Index start, Eigen::Index len) const {
    if (start < 0 || len < 1 || start + len > eta_.size()) {
        throw DimensionMismatch("precision segment out of range");
    }
    return Precision(eta_.segment(start, len));
}

Precision Precision::concat(const Precision& other) const {
    Vector joined(eta_.size() + other.eta_.size());
    joined << eta_, other.eta_;
    return Precision(std::move(joined));
}

Precision operator+(const Precision& a, const Precision& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("precision dimensions differ");
    }
    return Precision(a.vec() + b.vec());
}

Precision operator*(double s, const Precision& p) {
    return Precision(s * p.vec());
}

Precision coupling(const Precision& a, const Precision& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("precision dimensions differ");
    }
    return Precision((a.vec().array() * b.vec().array() / (a.vec().array() + b.vec().array()))
                         .matrix());
}

Hypercube::Hypercube(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() < 1) {
        throw DimensionMismatch("hypercube bounds must share a dimension >= 1");
    }
    detail::require_finite(lower_, "hypercube lower bound");
    detail::require_finite(upper_, "hypercube upper bound");
    if ((lower_.array() >= upper_.array()).any()) {
        throw InvalidArgument("hypercube requires lower < upper on every axis");
    }
}

Hypercube Hypercube::symmetric(double half_width, Eigen::Index dim) {
    return Hypercube(Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width));
}

bool Hypercube::contains(const Vector& x) const {
    if (x.size() != dim()) {
        throw DimensionMismatch("point dimension does not match hypercube");
    }
    return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
}

double Hypercube::volume() const {
    return (upper_ - lower_).prod();
}

Hypercube Hypercube::segment(Eigen::Index start, Eigen::Index len) const {
    if (start < 0 || len < 1 || start + len > dim()) {
        throw DimensionMismatch("hypercube segment out of range");
    }
    return Hypercube(lower_.segment(start, len), upper_.segment(start, len));
}

VariableSplit::VariableSplit(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) {
        throw InvalidArgument("variable split needs at least one block");
    }
    std::unordered_set<std::string> seen;
    for (const auto& b : blocks_) {
        if (b.width < 1) {
            throw InvalidArgument("block '" + b.name + "' must have width >= 1");
        }
        if (!seen.insert(b.name).second) {
            throw InvalidArgument("duplicate block name '" + b.name + "'");
        }
    }
}

VariableSplit VariableSplit::single(Eigen::Index dim, std::string name) {
    return VariableSplit({Block{std::move(name), dim}});
}

Eigen::Index VariableSplit::total_width() const {
    Eigen::Index w = 0;
    for (const auto& b : blocks_) w += b.width;
    return w;
}

bool VariableSplit::has(std::string_view name) const {
    for (const auto& b : blocks_) {
        if (b.name == name) return true;
    }
    return false;
}

std::size_t VariableSplit::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i].name == name) return i;
    }
    throw UnknownBlock("no block named '" + std::string(name) + "'");
}

Eigen::Index VariableSplit::offset_of(std::string_view name) const {
    Eigen::Index off = 0;
    for (const auto& b : blocks_) {
        if (b.name == name) return off;
        off += b.width;
    }
    throw UnknownBlock("no block named '" + std::string(name) + "'");
}

Eigen::Index VariableSplit::width_of(std::string_view name) const {
    return blocks_[index_of(name)].width;
}

VariableSplit VariableSplit::without(std::string_view name) const {
    std::size_t idx = index_of(name);
    if (blocks_.size() == 1) {
        throw InvalidArgument("cannot remove the only block '" + std::string(name) + "'");
    }
    std::vector<Block> rest;
    rest.reserve(blocks_.size() - 1);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (i != idx) rest.push_back(blocks_[i]);
    }
    return VariableSplit(std::move(rest));
}

VariableSplit VariableSplit::renamed(std::string_view from, std::string to) const {
    std::size_t idx = index_of(from);
    std::vector<Block> blocks = blocks_;
    blocks[idx].name = std::move(to);
    return VariableSplit(std::move(blocks));
}

} // namespace psdm
