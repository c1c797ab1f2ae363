#pragma once

/// Problem data for the fixed-point equation
///
///     x(t) = g(t, (Tx)(t)) + f(t, integral_0^t k(t,s) u(t,s, (Qx)(s)) ds)
///
/// on [0, +inf).  Each carrier bundles a callable with the admissibility
/// data the certificate needs:
///   - scalar fields g, f with growth envelopes |g(t,x)| <= a(t) + b|x|;
///   - the integrand family u with envelope alpha(s) + beta|x| and a
///     t-continuity modulus |u(t,s,x) - u(t',s,x)| <= h(|t-t'|)(c(s) + l|x|);
///   - inner operators T, Q with envelopes gamma(t) + rho|x(phi(t))| along
///     an increasing deviation phi whose slope stays above a known minimum.
///
/// Callables are trusted for evaluation; the envelope data is what the
/// certificate checks against samples, so a wrong envelope is caught rather
/// than silently believed.

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "l1fix/density.hpp"
#include "l1fix/errors.hpp"
#include "l1fix/grid.hpp"

namespace l1fix {

namespace detail {

inline double checked(double v, const std::string& what) {
    if (!std::isfinite(v)) throw eval_error(what);
    return v;
}

} // namespace detail

/// Scalar superposition field (t, x) -> value with envelope
/// |value| <= envelope_offset(t) + envelope_slope * |x|.
struct ScalarField2 {
    std::function<double(double, double)> fn;
    Density envelope_offset;
    double envelope_slope = 0.0;
    std::string label;

    double eval(double t, double x) const {
        const double v = fn(t, x);
        if (!std::isfinite(v))
            throw eval_error("field '" + label + "' is not finite at (t, x) = (" +
                             std::to_string(t) + ", " + std::to_string(x) + ")");
        return v;
    }
};

/// Signed Volterra kernel (t, s) -> k(t,s), s <= t.
struct Kernel2 {
    std::function<double(double, double)> fn;
    std::string label;

    double eval(double t, double s) const {
        const double v = fn(t, s);
        if (!std::isfinite(v))
            throw eval_error("kernel '" + label + "' is not finite at (t, s) = (" +
                             std::to_string(t) + ", " + std::to_string(s) + ")");
        return v;
    }
};

/// Integrand family (t, s, x) -> u(t,s,x) with growth envelope
/// |u| <= envelope_offset(s) + envelope_slope * |x| and continuity modulus
/// |u(t,s,x) - u(t',s,x)| <= modulus_gauge(|t-t'|) * (modulus_offset(s) +
/// modulus_slope * |x|).
struct KernelField3 {
    std::function<double(double, double, double)> fn;
    Density envelope_offset;
    double envelope_slope = 0.0;
    Density modulus_offset;
    double modulus_slope = 0.0;
    std::function<double(double)> modulus_gauge = [](double d) { return std::abs(d); };
    std::string label;

    double eval(double t, double s, double x) const {
        const double v = fn(t, s, x);
        if (!std::isfinite(v))
            throw eval_error("integrand '" + label + "' is not finite at (t, s, x) = (" +
                             std::to_string(t) + ", " + std::to_string(s) + ", " +
                             std::to_string(x) + ")");
        return v;
    }
};

/// Increasing time change with a certified slope floor: phi' >= slope_min > 0,
/// which is what turns |x(phi(t))| integrals back into plain norms.
struct Deviation {
    std::function<double(double)> fn = [](double t) { return t; };
    double slope_min = 1.0;

    double eval(double t) const {
        return detail::checked(fn(t), "deviation is not finite at t = " + std::to_string(t));
    }
};

/// Inner operator (T or Q) acting on grid functions, with the envelope
/// |(Sx)(t)| <= envelope_offset(t) + envelope_factor * |x(deviation(t))|.
struct InnerOperator {
    std::function<GridFunction(const GridFunction&)> apply_fn;
    Density envelope_offset;
    double envelope_factor = 0.0;
    Deviation deviation;
    std::string label;

    GridFunction apply(const GridFunction& x) const {
        if (!apply_fn) throw input_error("inner operator '" + label + "' has no action");
        return apply_fn(x);
    }
};

enum class KernelNormSource { declared, estimated };

/// Operator norm of y -> integral_0^t |k(t,s)| y(s) ds on L1, either taken
/// on trust from the problem file or measured numerically (see
/// estimate_kernel_norm).  `slack` is the claimed accuracy of the value.
struct KernelNormInfo {
    double value = 0.0;
    KernelNormSource source = KernelNormSource::declared;
    double slack = 0.0;
};

/// The full problem: outer fields g and f, Volterra data (k, u), inner
/// operators T and Q, and the kernel norm used by the contraction estimate.
struct ProblemSpec {
    std::string name;
    ScalarField2 g;
    ScalarField2 f;
    Kernel2 k;
    KernelField3 u;
    InnerOperator T_op;
    InnerOperator Q_op;
    KernelNormInfo kernel_norm;
};

} // namespace l1fix
