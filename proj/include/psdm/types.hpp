#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "psdm/errors.hpp"

namespace psdm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Point set: one point per row, one coordinate per column.
using PointMatrix = Eigen::MatrixXd;

/// Per-coordinate Gaussian kernel precision (inverse squared length scale).
/// Entries are strictly positive and finite.
class Precision {
public:
    explicit Precision(Vector eta);
    static Precision constant(double value, Eigen::Index dim);

    Eigen::Index dim() const { return eta_.size(); }
    const Vector& vec() const { return eta_; }
    double operator[](Eigen::Index t) const { return eta_(t); }
    double max_entry() const { return eta_.maxCoeff(); }

    Precision segment(Eigen::Index start, Eigen::Index len) const;
    Precision concat(const Precision& other) const;

private:
    Vector eta_;
};

Precision operator+(const Precision& a, const Precision& b);
Precision operator*(double s, const Precision& p);

/// Coupling precision ab/(a+b) of the Gaussian product identity, elementwise.
Precision coupling(const Precision& a, const Precision& b);

/// Axis-aligned box prod_t [lower_t, upper_t] with lower_t < upper_t.
class Hypercube {
public:
    Hypercube(Vector lower, Vector upper);
    static Hypercube symmetric(double half_width, Eigen::Index dim);

    Eigen::Index dim() const { return lower_.size(); }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }
    bool contains(const Vector& x) const;
    double volume() const;
    Hypercube segment(Eigen::Index start, Eigen::Index len) const;

private:
    Vector lower_;
    Vector upper_;
};

/// Integration domain: a hypercube, or the whole space when empty.
using Domain = std::optional<Hypercube>;
inline const Domain full_space{};

/// Named contiguous coordinate blocks partitioning a model's d coordinates,
/// so joint models can be marginalized/conditioned per block.
class VariableSplit {
public:
    struct Block {
        std::string name;
        Eigen::Index width;
    };

    VariableSplit() = default;
    explicit VariableSplit(std::vector<Block> blocks);
    static VariableSplit single(Eigen::Index dim, std::string name = "x");

    Eigen::Index total_width() const;
    std::size_t size() const { return blocks_.size(); }
    const std::vector<Block>& blocks() const { return blocks_; }

    bool has(std::string_view name) const;
    std::size_t index_of(std::string_view name) const; // throws UnknownBlock
    Eigen::Index offset_of(std::string_view name) const;
    Eigen::Index width_of(std::string_view name) const;

    VariableSplit without(std::string_view name) const;
    VariableSplit renamed(std::string_view from, std::string to) const;

private:
    std::vector<Block> blocks_;
};

namespace detail {
void require_finite(const Eigen::Ref<const Matrix>& m, const char* what);
} // namespace detail

} // namespace psdm
