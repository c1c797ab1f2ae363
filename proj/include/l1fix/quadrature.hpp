#pragma once

/// Adaptive Gauss-Kronrod quadrature on finite intervals and on half-lines.
///
/// The driver bisects the interval with the largest error estimate until the
/// accumulated error meets an absolute-or-relative target.  Half-line
/// integrals are folded onto (0,1) by t = a + u/(1-u); the Kronrod nodes are
/// interior, so the transformed integrand is never evaluated at u = 1.

#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "l1fix/errors.hpp"

namespace l1fix::quad {

/// G7-K15 nodes on [-1,1] (positive half; the rule is symmetric).
/// Even indices are Kronrod-only points, odd indices carry the embedded
/// 7-point Gauss rule.  Index 7 is the centre node.
inline constexpr double kron_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

inline constexpr double kron_weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

inline constexpr double gauss_weights[8] = {
    0.0,
    0.129484966168869693270611432679082,
    0.0,
    0.279705391489276667901467771423780,
    0.0,
    0.381830050505118944950369775488975,
    0.0,
    0.417959183673469387755102040816327,
};

struct Result {
    double value = 0.0;
    double error = 0.0;   // accumulated error estimate
    std::size_t evals = 0;
};

namespace detail {

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(const F& f, double a, double b, std::size_t& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double dx = h * kron_nodes[i];
        double fsum;
        if (i == 7) {
            fsum = f(c);
            ++evals;
        } else {
            fsum = f(c - dx) + f(c + dx);
            evals += 2;
        }
        if (!std::isfinite(fsum))
            throw eval_error("quadrature integrand is not finite near t = " +
                             std::to_string(c - dx));
        kron += kron_weights[i] * fsum;
        gauss += gauss_weights[i] * fsum;
    }
    kron *= h;
    gauss *= h;
    // |K15 - G7| is a conservative error estimate; it costs extra
    // subdivisions but never under-reports.
    return {a, b, kron, std::abs(kron - gauss)};
}

} // namespace detail

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    std::size_t max_segments = 4000;
};

/// Integrate f over [a,b].  Throws eval_error on non-finite integrand values.
template <class F>
Result integrate(const F& f, double a, double b, Options opt = {}) {
    if (!(b >= a)) throw input_error("integrate: interval endpoints out of order");
    Result res;
    if (b == a) return res;
    std::priority_queue<detail::Segment> segs;
    auto first = detail::gk15(f, a, b, res.evals);
    double total = first.value, toterr = first.error;
    segs.push(first);
    while (toterr > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) &&
           segs.size() < opt.max_segments) {
        auto worst = segs.top();
        segs.pop();
        total -= worst.value;
        toterr -= worst.error;
        const double m = 0.5 * (worst.a + worst.b);
        if (m <= worst.a || m >= worst.b) {  // interval exhausted at double precision
            total += worst.value;
            toterr += worst.error;
            break;
        }
        auto left = detail::gk15(f, worst.a, m, res.evals);
        auto right = detail::gk15(f, m, worst.b, res.evals);
        total += left.value + right.value;
        toterr += left.error + right.error;
        segs.push(left);
        segs.push(right);
    }
    res.value = total;
    res.error = toterr;
    return res;
}

/// Integrate f over [a, +inf) via the substitution t = a + u/(1-u).
/// The integrand must decay at least like 1/t^2 for the transform to stay
/// bounded; faster decay only helps.
template <class F>
Result integrate_halfline(const F& f, double a = 0.0, Options opt = {}) {
    auto g = [&](double u) {
        const double w = 1.0 - u;
        return f(a + u / w) / (w * w);
    };
    return integrate(g, 0.0, 1.0, opt);
}

} // namespace l1fix::quad
