#pragma once

/// Exact L1 operations on piecewise-linear grid functions.
///
/// integrate_abs splits each cell at its sign change, so |x| is integrated
/// exactly (no quadrature error).  distance merges the two node sets first;
/// the difference of two piecewise-linear functions is linear on every cell
/// of the merged grid.  worst_subset_mass computes
///
///     sup { integral_D |x| : meas(D) <= eps }
///
/// exactly by a descending level sweep: the supremum is attained on the
/// super-level set {|x| > lambda*} (plus a slice at level lambda*), and
/// equals the integral of the decreasing rearrangement of |x| over [0, eps].

#include <algorithm>
#include <cmath>
#include <vector>

#include "l1fix/grid.hpp"
#include "l1fix/subset.hpp"

namespace l1fix {

namespace detail {

/// Integral of |linear ramp| over a segment of width h with endpoint values
/// v0, v1 (signed).
inline double abs_ramp_integral(double h, double v0, double v1) {
    if (v0 * v1 >= 0.0) return 0.5 * h * std::abs(v0 + v1);
    // Sign change: split at the root; both triangles contribute.
    return 0.5 * h * (v0 * v0 + v1 * v1) / std::abs(v0 - v1);
}

} // namespace detail

/// Total L1 norm of the represented function: integral of |x| over
/// [0, t_max] (x is identically zero beyond).
inline double integrate_abs(const GridFunction& x) {
    const Grid& g = x.grid();
    double s = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c)
        s += detail::abs_ramp_integral(g.width(c), x.value(c), x.value(c + 1));
    return s;
}

/// Integral of |x| over a finite union of intervals (clipped to [0, t_max]).
inline double integrate_abs(const GridFunction& x, const MeasurableSubset& d) {
    const Grid& g = x.grid();
    double s = 0.0;
    for (const auto& [ia, ib] : d.intervals()) {
        const double a = std::max(ia, 0.0);
        const double b = std::min(ib, g.t_max());
        if (!(b > a)) continue;
        std::size_t c = g.locate(a);
        double lo = a, vlo = x(a);
        while (lo < b) {
            const double hi = std::min(b, g.node(c + 1));
            const double vhi = (hi == g.node(c + 1)) ? x.value(c + 1) : x(hi);
            s += detail::abs_ramp_integral(hi - lo, vlo, vhi);
            lo = hi;
            vlo = vhi;
            ++c;
        }
    }
    return s;
}

/// Union of the node sets of two grids (covering the longer horizon).
inline Grid merge_grids(const Grid& a, const Grid& b) {
    if (a.same_as(b)) return a;
    std::vector<double> n;
    n.reserve(a.node_count() + b.node_count());
    std::merge(a.nodes().begin(), a.nodes().end(), b.nodes().begin(), b.nodes().end(),
               std::back_inserter(n));
    n.erase(std::unique(n.begin(), n.end()), n.end());
    return Grid::from_nodes(std::move(n));
}

/// L1 distance.  Exact: both functions are linear on every cell of the
/// merged grid, including the stretch between the two horizons where the
/// shorter one is zero.
inline double distance(const GridFunction& x, const GridFunction& y) {
    if (x.grid().same_as(y.grid())) {
        const Grid& g = x.grid();
        double s = 0.0;
        for (std::size_t c = 0; c < g.cells(); ++c)
            s += detail::abs_ramp_integral(g.width(c), x.value(c) - y.value(c),
                                           x.value(c + 1) - y.value(c + 1));
        return s;
    }
    Grid m = merge_grids(x.grid(), y.grid());
    // At a horizon node the represented function jumps to zero; cells to the
    // right must start from the right limit, not the nodal value.
    const auto right = [](const GridFunction& f, double t) {
        return t >= f.grid().t_max() ? 0.0 : f(t);
    };
    double s = 0.0;
    for (std::size_t c = 0; c < m.cells(); ++c) {
        const double ta = m.node(c), tb = m.node(c + 1);
        s += detail::abs_ramp_integral(tb - ta, right(x, ta) - right(y, ta), x(tb) - y(tb));
    }
    return s;
}

/// Integral of |x| over [tau, infinity); zero for tau beyond the horizon.
inline double tail_mass(const GridFunction& x, double tau) {
    if (tau >= x.grid().t_max()) return 0.0;
    return integrate_abs(x, MeasurableSubset::interval(std::max(tau, 0.0), x.grid().t_max()));
}

namespace detail {

/// Monotone segment of |x|: constant-slope stretch of length `len` with
/// values running from `lo` up to `hi`.
struct AbsPiece {
    double len, lo, hi;
};

inline std::vector<AbsPiece> abs_pieces(const GridFunction& x) {
    const Grid& g = x.grid();
    std::vector<AbsPiece> p;
    p.reserve(g.cells() + 8);
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const double h = g.width(c), v0 = x.value(c), v1 = x.value(c + 1);
        if (v0 * v1 < 0.0) {
            const double th = h * v0 / (v0 - v1);  // distance to the zero crossing
            p.push_back({th, 0.0, std::abs(v0)});
            p.push_back({h - th, 0.0, std::abs(v1)});
        } else {
            const double a0 = std::abs(v0), a1 = std::abs(v1);
            p.push_back({h, std::min(a0, a1), std::max(a0, a1)});
        }
    }
    return p;
}

} // namespace detail

/// sup over measurable D with meas(D) <= eps of integral_D |x|.
///
/// Descending level sweep over the breakpoint values of |x|.  Within a strip
/// between consecutive breakpoints the distribution function
/// F(lambda) = meas{|x| > lambda} is linear, so the crossing F = eps and the
/// layer-cake value  eps*lambda* + integral_{lambda*}^inf F  are both exact.
inline double worst_subset_mass(const GridFunction& x, double eps) {
    if (!(eps >= 0.0)) throw input_error("worst_subset_mass needs eps >= 0");
    if (eps == 0.0) return 0.0;
    const auto pieces = detail::abs_pieces(x);

    double total = 0.0, support = 0.0;
    for (const auto& p : pieces) {
        total += 0.5 * p.len * (p.lo + p.hi);
        if (p.hi > 0.0) support += p.len;
    }
    if (eps >= support) return total;

    // Event levels: every distinct lo/hi.  Sweep from the top; maintain
    // F(lambda) = cA + cB*lambda on the current strip and T = integral of F
    // from the strip top to infinity.
    std::vector<double> levels;
    levels.reserve(2 * pieces.size() + 1);
    for (const auto& p : pieces) {
        if (p.hi > 0.0) levels.push_back(p.hi);
        if (p.lo > 0.0) levels.push_back(p.lo);
    }
    levels.push_back(0.0);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    // Pieces sorted by hi desc for entry, by lo desc for completion.
    std::vector<std::size_t> by_hi(pieces.size()), by_lo(pieces.size());
    for (std::size_t i = 0; i < pieces.size(); ++i) by_hi[i] = by_lo[i] = i;
    std::sort(by_hi.begin(), by_hi.end(),
              [&](std::size_t i, std::size_t j) { return pieces[i].hi > pieces[j].hi; });
    std::sort(by_lo.begin(), by_lo.end(),
              [&](std::size_t i, std::size_t j) { return pieces[i].lo > pieces[j].lo; });

    double cA = 0.0, cB = 0.0, T = 0.0;
    std::size_t ih = 0, il = 0;
    // The last level is 0.0 and is only ever a strip bottom, never a strip
    // top: eps < support guarantees the crossing is found at a positive
    // level (up to rounding at eps ~ support, where `total` is the limit).
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        const double v = levels[k];
        // F just below the previous strip (right-continuous value at v).
        const double f_before = cA + cB * v;
        // Activate pieces whose top is v; complete pieces whose bottom is v.
        for (; ih < by_hi.size() && pieces[by_hi[ih]].hi == v; ++ih) {
            const auto& p = pieces[by_hi[ih]];
            if (p.lo < p.hi) {
                cA += p.len * p.hi / (p.hi - p.lo);
                cB -= p.len / (p.hi - p.lo);
            } else {
                cA += p.len;  // flat piece: F jumps by its full length at v
            }
        }
        for (; il < by_lo.size() && pieces[by_lo[il]].lo == v; ++il) {
            const auto& p = pieces[by_lo[il]];
            if (p.lo < p.hi) {
                cA += p.len - p.len * p.hi / (p.hi - p.lo);
                cB += p.len / (p.hi - p.lo);
            }
        }
        const double f_after = cA + cB * v;  // F(v-) limit from below
        if (f_before <= eps && eps < f_after) {
            // The crossing is the jump at v itself: fill the remainder at
            // level v out of the flat mass sitting there.
            return eps * v + T;
        }
        const double v_next = levels[k + 1];
        const double f_bottom = cA + cB * v_next;
        if (eps < f_bottom) {
            // Crossing inside the strip: F is linear with slope cB < 0 here.
            const double lam = (eps - cA) / cB;
            return eps * lam + T + (v - lam) * (cA + 0.5 * cB * (v + lam));
        }
        T += (v - v_next) * (cA + 0.5 * cB * (v + v_next));
    }
    return total;  // rounding pushed eps past the swept support; limit value
}

} // namespace l1fix
