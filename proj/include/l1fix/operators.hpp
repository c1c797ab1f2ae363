#pragma once

/// Discretizations of the operators behind  x = Bx + Ax:
///
///     (Bx)(t) = g(t, (Tx)(t))
///     (Ax)(t) = f(t, integral_0^t k(t,s) u(t,s, (Qx)(s)) ds)
///
/// Volterra integrals use a two-point Gauss rule per grid cell; outputs are
/// evaluated at grid nodes, so the running upper limit always lands on a
/// cell boundary.  The inner quadrature values x(s_q) are interpolated from
/// the same piecewise-linear representation the norms integrate exactly,
/// keeping every operator a map grid -> same grid.
///
/// apply_A *is* the composition superpose(f, apply_kernel_nonlinear(k, u,
/// Q(x))); there is no second fused code path to drift away from it.

#include <cmath>
#include <string>
#include <vector>

#include "l1fix/errors.hpp"
#include "l1fix/fields.hpp"
#include "l1fix/grid.hpp"
#include "l1fix/norms.hpp"
#include "l1fix/quadrature.hpp"

namespace l1fix {

/// Nodal superposition  t -> field(t, x(t)).
inline GridFunction superpose(const ScalarField2& field, const GridFunction& x) {
    std::vector<double> v(x.node_count());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = field.eval(x.grid().node(i), x.value(i));
    return GridFunction(x.grid(), std::move(v));
}

namespace detail {

/// Two-point Gauss nodes and weights for every cell of a grid, plus the
/// interpolated values of x there.  The abscissae depend only on the grid,
/// so they are shared across all output nodes of a Volterra sweep.
struct CellQuadrature {
    std::vector<double> s;  // 2 per cell
    std::vector<double> w;
    std::vector<double> xv;

    CellQuadrature(const Grid& g, const GridFunction& x) {
        const std::size_t n = g.cells();
        s.resize(2 * n);
        w.resize(2 * n);
        xv.resize(2 * n);
        const double off = 0.5 / std::sqrt(3.0);
        for (std::size_t c = 0; c < n; ++c) {
            const double a = g.node(c), h = g.width(c);
            const double m = a + 0.5 * h;
            s[2 * c] = m - off * h;
            s[2 * c + 1] = m + off * h;
            w[2 * c] = w[2 * c + 1] = 0.5 * h;
            // Linear interpolation within cell c, written out to avoid a
            // node search per point.
            const double v0 = x.value(c), v1 = x.value(c + 1);
            xv[2 * c] = v0 + (v1 - v0) * (s[2 * c] - a) / h;
            xv[2 * c + 1] = v0 + (v1 - v0) * (s[2 * c + 1] - a) / h;
        }
    }
};

} // namespace detail

/// y(t_i) = integral_0^{t_i} |k(t_i, s)| x(s) ds at every grid node.
inline GridFunction apply_kernel_linear(const Kernel2& k, const GridFunction& x) {
    const Grid& g = x.grid();
    detail::CellQuadrature q(g, x);
    std::vector<double> out(g.node_count(), 0.0);
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double t = g.node(i);
        double acc = 0.0;
        for (std::size_t p = 0; p < 2 * i; ++p)
            acc += q.w[p] * std::abs(k.eval(t, q.s[p])) * q.xv[p];
        out[i] = acc;
    }
    return GridFunction(g, std::move(out));
}

/// y(t_i) = integral_0^{t_i} k(t_i, s) u(t_i, s, x(s)) ds at every node.
inline GridFunction apply_kernel_nonlinear(const Kernel2& k, const KernelField3& u,
                                           const GridFunction& x) {
    const Grid& g = x.grid();
    detail::CellQuadrature q(g, x);
    std::vector<double> out(g.node_count(), 0.0);
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double t = g.node(i);
        double acc = 0.0;
        for (std::size_t p = 0; p < 2 * i; ++p)
            acc += q.w[p] * k.eval(t, q.s[p]) * u.eval(t, q.s[p], q.xv[p]);
        if (!std::isfinite(acc))
            throw eval_error("Volterra integral is not finite at t = " + std::to_string(t));
        out[i] = acc;
    }
    return GridFunction(g, std::move(out));
}

struct KernelNormOptions {
    double t_max = 40.0;
    double rel_tol = 1e-6;    // stop when the sup changes less than this
    double growth_tol = 1e-8; // horizon-doubling growth treated as non-decay
    quad::Options quad{1e-9, 1e-13, 2000};
};

/// Operator norm of y -> integral_0^t |k(t,s)| y(s) ds on L1[0, inf):
///
///     ||K|| = sup_s integral_s^inf |k(t,s)| dt.
///
/// The column mass m(s) is integrated adaptively up to the horizon; the sup
/// is located by sampling s on a doubling grid until it stabilizes, then
/// polished by golden-section search around the best bracket.  A kernel
/// whose sup still grows when the horizon doubles cannot be certified by
/// truncation and raises truncation_error.
inline KernelNormInfo estimate_kernel_norm(const Kernel2& k, KernelNormOptions opt = {}) {
    if (!(opt.t_max > 0.0)) throw input_error("kernel norm horizon must be positive");

    auto column = [&](double s, double horizon) {
        return quad::integrate([&](double t) { return std::abs(k.eval(t, s)); }, s, horizon,
                               opt.quad).value;
    };

    auto grid_sup = [&](std::size_t cells, double horizon, double& arg) {
        double best = 0.0;
        arg = 0.0;
        for (std::size_t i = 0; i <= cells; ++i) {
            const double s = horizon * static_cast<double>(i) / static_cast<double>(cells);
            const double m = column(s, horizon);
            if (m > best) {
                best = m;
                arg = s;
            }
        }
        return best;
    };

    double arg = 0.0;
    std::size_t cells = 64;
    double sup = grid_sup(cells, opt.t_max, arg);
    for (int round = 0; round < 8; ++round) {
        cells *= 2;
        double a2;
        const double s2 = grid_sup(cells, opt.t_max, a2);
        const double change = std::abs(s2 - sup);
        sup = std::max(sup, s2);
        arg = (s2 >= sup) ? a2 : arg;
        if (change <= 1e-4 * (sup + 1e-300)) break;
    }

    // Golden-section polish on the bracket around the best sample.
    {
        const double h = opt.t_max / static_cast<double>(cells);
        double a = std::max(0.0, arg - h), b = std::min(opt.t_max, arg + h);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = column(x1, opt.t_max), f2 = column(x2, opt.t_max);
        for (int it = 0; it < 80 && (b - a) > 1e-12 * (1.0 + b); ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = column(x2, opt.t_max);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = column(x1, opt.t_max);
            }
        }
        sup = std::max({sup, f1, f2});
        arg = (f1 > f2) ? x1 : x2;
    }

    // Horizon honesty: the sup must not keep growing when the horizon
    // doubles, and the best column's tail must be negligible.
    {
        double arg2;
        const double sup2 = std::max(grid_sup(128, 2.0 * opt.t_max, arg2),
                                     column(arg, 2.0 * opt.t_max));
        if (sup2 > sup * (1.0 + std::max(opt.rel_tol, opt.growth_tol)))
            throw truncation_error(
                "kernel norm estimate grows with the horizon (" + std::to_string(sup) +
                " -> " + std::to_string(sup2) +
                "); the kernel does not decay fast enough to truncate at t_max = " +
                std::to_string(opt.t_max));
        sup = std::max(sup, sup2);
    }

    KernelNormInfo info;
    info.value = sup;
    info.source = KernelNormSource::estimated;
    info.slack = opt.rel_tol * sup;
    return info;
}

/// (Ax)(t) = f(t, integral_0^t k(t,s) u(t,s,(Qx)(s)) ds).
inline GridFunction apply_A(const ProblemSpec& spec, const GridFunction& x) {
    return superpose(spec.f, apply_kernel_nonlinear(spec.k, spec.u, spec.Q_op.apply(x)));
}

/// (Bx)(t) = g(t, (Tx)(t)).
inline GridFunction apply_B(const ProblemSpec& spec, const GridFunction& x) {
    return superpose(spec.g, spec.T_op.apply(x));
}

/// ||x - Ax - Bx|| in L1.
inline double residual(const ProblemSpec& spec, const GridFunction& x) {
    GridFunction image = apply_A(spec, x);
    image += apply_B(spec, x);
    return distance(x, image);
}

} // namespace l1fix
