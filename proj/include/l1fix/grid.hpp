#pragma once

/// Nonuniform grids on [0, t_max] and piecewise-linear grid functions.
///
/// A GridFunction represents an L1(R+) element by nodal values with linear
/// interpolation between nodes and identically zero beyond t_max.  The
/// truncation horizon is part of the representation: operations report exact
/// values for the represented function, and callers account for the tail of
/// whatever the function stands for.
///
/// Grids are immutable and shared; copying a GridFunction copies only the
/// nodal values.  refined() inserts cell midpoints, so refined grids nest
/// the original nodes exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "l1fix/errors.hpp"

namespace l1fix {

class Grid {
public:
    Grid() = default;

    static Grid from_nodes(std::vector<double> nodes) {
        validate(nodes);
        return Grid(std::make_shared<const std::vector<double>>(std::move(nodes)));
    }

    static Grid uniform(double t_max, std::size_t cells) {
        require(t_max > 0.0 && cells >= 1, "uniform grid needs t_max > 0 and cells >= 1");
        std::vector<double> n(cells + 1);
        for (std::size_t i = 0; i <= cells; ++i)
            n[i] = t_max * static_cast<double>(i) / static_cast<double>(cells);
        n.back() = t_max;
        return from_nodes(std::move(n));
    }

    /// Exponentially stretched nodes t_i = t_max * (e^{s u} - 1) / (e^s - 1),
    /// u = i/cells.  Cell widths grow ~e^{s u}, concentrating resolution near
    /// the origin where integrable functions carry their mass.
    static Grid stretched(double t_max, std::size_t cells, double strength = 4.0) {
        require(t_max > 0.0 && cells >= 1, "stretched grid needs t_max > 0 and cells >= 1");
        require(strength > 0.0, "stretched grid needs strength > 0");
        std::vector<double> n(cells + 1);
        const double denom = std::expm1(strength);
        for (std::size_t i = 0; i <= cells; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(cells);
            n[i] = t_max * std::expm1(strength * u) / denom;
        }
        n.front() = 0.0;
        n.back() = t_max;
        return from_nodes(std::move(n));
    }

    /// Midpoint-insertion refinement; the result contains this grid's nodes.
    Grid refined() const {
        const auto& n = *nodes_;
        std::vector<double> r;
        r.reserve(2 * n.size() - 1);
        for (std::size_t i = 0; i + 1 < n.size(); ++i) {
            r.push_back(n[i]);
            r.push_back(0.5 * (n[i] + n[i + 1]));
        }
        r.push_back(n.back());
        return from_nodes(std::move(r));
    }

    std::size_t cells() const { return nodes_->size() - 1; }
    std::size_t node_count() const { return nodes_->size(); }
    double node(std::size_t i) const { return (*nodes_)[i]; }
    double width(std::size_t cell) const { return (*nodes_)[cell + 1] - (*nodes_)[cell]; }
    double t_max() const { return nodes_->back(); }
    std::span<const double> nodes() const { return *nodes_; }

    /// Index of the cell containing t, clamped to [0, cells-1]; t outside
    /// [0, t_max] maps to the nearest boundary cell.
    std::size_t locate(double t) const {
        const auto& n = *nodes_;
        if (t <= n.front()) return 0;
        if (t >= n.back()) return n.size() - 2;
        auto it = std::upper_bound(n.begin(), n.end(), t);
        return static_cast<std::size_t>(it - n.begin()) - 1;
    }

    bool same_as(const Grid& o) const {
        return nodes_ == o.nodes_ || *nodes_ == *o.nodes_;
    }

    bool valid() const { return static_cast<bool>(nodes_); }

private:
    explicit Grid(std::shared_ptr<const std::vector<double>> n) : nodes_(std::move(n)) {}

    static void require(bool ok, const char* msg) {
        if (!ok) throw input_error(msg);
    }

    static void validate(const std::vector<double>& n) {
        require(n.size() >= 2, "grid needs at least two nodes");
        require(n.front() == 0.0, "grid must start at t = 0");
        for (std::size_t i = 0; i + 1 < n.size(); ++i)
            if (!(n[i] < n[i + 1]))
                throw input_error("grid nodes must be strictly increasing (node " +
                                  std::to_string(i + 1) + ")");
        if (!std::isfinite(n.back())) throw input_error("grid nodes must be finite");
    }

    std::shared_ptr<const std::vector<double>> nodes_;
};

class GridFunction {
public:
    GridFunction() = default;

    GridFunction(Grid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (!grid_.valid()) throw input_error("grid function needs a valid grid");
        if (values_.size() != grid_.node_count())
            throw input_error("grid function needs one value per node");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                throw input_error("grid function value at node " + std::to_string(i) +
                                  " is not finite");
    }

    static GridFunction zero(const Grid& grid) {
        return GridFunction(grid, std::vector<double>(grid.node_count(), 0.0));
    }

    template <class F>
    static GridFunction sample(const Grid& grid, F&& f) {
        std::vector<double> v(grid.node_count());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = f(grid.node(i));
            if (!std::isfinite(v[i]))
                throw eval_error("sampled function is not finite at t = " +
                                 std::to_string(grid.node(i)));
        }
        return GridFunction(std::move(grid), std::move(v));
    }

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double value(std::size_t i) const { return values_[i]; }
    std::size_t node_count() const { return values_.size(); }

    /// Pointwise evaluation: linear between nodes, zero beyond t_max and
    /// below 0.
    double operator()(double t) const {
        if (t < 0.0 || t > grid_.t_max()) return 0.0;
        const std::size_t c = grid_.locate(t);
        const double a = grid_.node(c), b = grid_.node(c + 1);
        const double w = (t - a) / (b - a);
        return (1.0 - w) * values_[c] + w * values_[c + 1];
    }

    /// Resample onto another grid (exact where target nodes coincide).
    GridFunction on_grid(const Grid& g) const {
        if (g.same_as(grid_)) return GridFunction(g, values_);
        std::vector<double> v(g.node_count());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = (*this)(g.node(i));
        return GridFunction(g, std::move(v));
    }

    GridFunction& operator+=(const GridFunction& o) { return zip(o, std::plus<>{}); }
    GridFunction& operator-=(const GridFunction& o) { return zip(o, std::minus<>{}); }
    GridFunction& operator*=(double s) {
        for (auto& v : values_) v *= s;
        return *this;
    }

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

    /// x + s*y on a shared grid.
    GridFunction& axpy(double s, const GridFunction& y) {
        check_same_grid(y);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * y.values_[i];
        return *this;
    }

    std::vector<double>& mutable_values() { return values_; }

private:
    template <class Op>
    GridFunction& zip(const GridFunction& o, Op op) {
        check_same_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i)
            values_[i] = op(values_[i], o.values_[i]);
        return *this;
    }

    void check_same_grid(const GridFunction& o) const {
        if (!grid_.same_as(o.grid_))
            throw input_error("grid function arithmetic requires a shared grid");
    }

    Grid grid_;
    std::vector<double> values_;
};

} // namespace l1fix
