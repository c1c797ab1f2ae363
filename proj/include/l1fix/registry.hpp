#pragma once

/// Closed registry of parameterized primitives from which problem files are
/// assembled: decay profiles, outer nonlinearities, kernels, integrand
/// families, and inner operators.  Definitions stay declarative (kind +
/// numeric parameters); this header turns them into callables.
///
/// Registry kinds:
///   density    zero | exponential | rational_decay | inverse_poly
///   field      zero | affine | log_square | arctan_square | square
///   kernel     zero | sum_exp | product_exp | constant
///   integrand  zero | linear | forced_linear | drift_shear
///   inner      identity | scaled_composition | saturated_dilation_average
///              | saturated_memory
///   gauge      identity | power
///   deviation  linear | affine

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "l1fix/density.hpp"
#include "l1fix/errors.hpp"
#include "l1fix/fields.hpp"
#include "l1fix/grid.hpp"
#include "l1fix/operators.hpp"

namespace l1fix {

struct DensityDef {
    std::string kind = "zero";
    double amp = 1.0;
    double rate = 1.0;       // exponential
    double shift = 0.0;      // rational_decay / inverse_poly
    double den_const = 1.0;  // rational_decay / inverse_poly
    double power = 3.0;      // rational_decay / inverse_poly
};

/// exponential:     amp * e^{-rate t}
/// rational_decay:  amp * (shift + t) / (den_const + (shift + t)^power)
/// inverse_poly:    amp / (den_const + (shift + t)^power)
inline Density make_density(const DensityDef& d, const std::string& label) {
    if (d.kind == "zero") return Density::zero();
    if (d.kind == "exponential") {
        const double a = d.amp, r = d.rate;
        return Density([a, r](double t) { return a * std::exp(-r * t); }, label);
    }
    if (d.kind == "rational_decay") {
        const double a = d.amp, sh = d.shift, c = d.den_const, p = d.power;
        return Density(
            [a, sh, c, p](double t) { return a * (sh + t) / (c + std::pow(sh + t, p)); }, label);
    }
    if (d.kind == "inverse_poly") {
        const double a = d.amp, sh = d.shift, c = d.den_const, p = d.power;
        return Density([a, sh, c, p](double t) { return a / (c + std::pow(sh + t, p)); }, label);
    }
    throw input_error("unknown density kind '" + d.kind + "' for " + label);
}

struct EnvelopeDef {
    DensityDef offset;
    double slope = 0.0;
};

struct FieldDef {
    std::string kind = "zero";
    double slope = 0.0;  // affine
    double coeff = 0.0;  // log_square / arctan_square
    DensityDef source;   // affine / log_square
    EnvelopeDef envelope;
};

/// affine:        slope * x + source(t)
/// log_square:    source(t) + coeff * ln(1 + x^2)
/// arctan_square: coeff * arctan(x^2)
/// square:        x^2   (deliberately envelope-breaking test nonlinearity)
inline ScalarField2 make_field(const FieldDef& d, const std::string& label) {
    ScalarField2 out;
    out.label = label;
    out.envelope_offset = make_density(d.envelope.offset, label + " envelope offset");
    out.envelope_slope = d.envelope.slope;
    if (d.kind == "zero") {
        out.fn = [](double, double) { return 0.0; };
    } else if (d.kind == "affine") {
        Density src = make_density(d.source, label + " source");
        const double s = d.slope;
        out.fn = [src, s](double t, double x) { return s * x + src(t); };
    } else if (d.kind == "log_square") {
        Density src = make_density(d.source, label + " source");
        const double c = d.coeff;
        out.fn = [src, c](double t, double x) { return src(t) + c * std::log1p(x * x); };
    } else if (d.kind == "arctan_square") {
        const double c = d.coeff;
        out.fn = [c](double, double x) { return c * std::atan(x * x); };
    } else if (d.kind == "square") {
        out.fn = [](double, double x) { return x * x; };
    } else {
        throw input_error("unknown field kind '" + d.kind + "' for " + label);
    }
    return out;
}

struct KernelDef {
    std::string kind = "zero";
    double scale = 1.0;
    double rate = 1.0;    // decay rate in t
    double rate_s = 0.0;  // product_exp decay rate in s
    double value = 0.0;   // constant
};

/// sum_exp:     scale * (t + s) e^{-rate t}
/// product_exp: scale * e^{-rate t - rate_s s}
/// constant:    value  (non-decaying; usable only with a declared norm)
inline Kernel2 make_kernel(const KernelDef& d) {
    Kernel2 out;
    out.label = d.kind;
    if (d.kind == "zero") {
        out.fn = [](double, double) { return 0.0; };
    } else if (d.kind == "sum_exp") {
        const double a = d.scale, r = d.rate;
        out.fn = [a, r](double t, double s) { return a * (t + s) * std::exp(-r * t); };
    } else if (d.kind == "product_exp") {
        const double a = d.scale, r = d.rate, rs = d.rate_s;
        out.fn = [a, r, rs](double t, double s) { return a * std::exp(-r * t - rs * s); };
    } else if (d.kind == "constant") {
        const double v = d.value;
        out.fn = [v](double, double) { return v; };
    } else {
        throw input_error("unknown kernel kind '" + d.kind + "'");
    }
    return out;
}

struct GaugeDef {
    std::string kind = "identity";
    double power = 1.0;
};

inline std::function<double(double)> make_gauge(const GaugeDef& d) {
    if (d.kind == "identity") return [](double x) { return std::abs(x); };
    if (d.kind == "power") {
        const double p = d.power;
        return [p](double x) { return std::pow(std::abs(x), p); };
    }
    throw input_error("unknown gauge kind '" + d.kind + "'");
}

struct IntegrandDef {
    std::string kind = "zero";
    double slope = 0.0;  // linear / forced_linear
    DensityDef source;   // forced_linear
    EnvelopeDef envelope;
    EnvelopeDef modulus;
    GaugeDef gauge;
};

/// linear:        slope * x
/// forced_linear: source(s) + slope * x
/// drift_shear:   (1+t+s)/(2+(1+t+s)^3)
///                  + t s (t s + sqrt(3) sin x) x / (4 (s+1) (t^2 s^2 + 1))
/// drift_shear is a bounded rational drift in (t,s) plus a sinusoidally
/// modulated shear that saturates for large |ts|.
inline KernelField3 make_integrand(const IntegrandDef& d) {
    KernelField3 out;
    out.label = d.kind;
    out.envelope_offset = make_density(d.envelope.offset, "u envelope offset");
    out.envelope_slope = d.envelope.slope;
    out.modulus_offset = make_density(d.modulus.offset, "u modulus offset");
    out.modulus_slope = d.modulus.slope;
    out.modulus_gauge = make_gauge(d.gauge);
    if (d.kind == "zero") {
        out.fn = [](double, double, double) { return 0.0; };
    } else if (d.kind == "linear") {
        const double s = d.slope;
        out.fn = [s](double, double, double x) { return s * x; };
    } else if (d.kind == "forced_linear") {
        Density src = make_density(d.source, "u source");
        const double sl = d.slope;
        out.fn = [src, sl](double, double s, double x) { return src(s) + sl * x; };
    } else if (d.kind == "drift_shear") {
        const double rt3 = std::sqrt(3.0);
        out.fn = [rt3](double t, double s, double x) {
            const double w = 1.0 + t + s;
            const double drift = w / (2.0 + w * w * w);
            const double z = t * s;
            const double shear =
                z * (z + rt3 * std::sin(x)) * x / (4.0 * (s + 1.0) * (z * z + 1.0));
            return drift + shear;
        };
    } else {
        throw input_error("unknown integrand kind '" + d.kind + "'");
    }
    return out;
}

struct DeviationDef {
    std::string kind = "linear";
    double slope = 1.0;
    double offset = 0.0;  // affine only
};

inline Deviation make_deviation(const DeviationDef& d) {
    Deviation out;
    out.slope_min = d.slope;
    if (d.kind == "linear") {
        const double s = d.slope;
        out.fn = [s](double t) { return s * t; };
    } else if (d.kind == "affine") {
        const double s = d.slope, o = d.offset;
        out.fn = [s, o](double t) { return s * t + o; };
    } else {
        throw input_error("unknown deviation kind '" + d.kind + "'");
    }
    return out;
}

struct InnerDef {
    std::string kind = "identity";
    double factor = 1.0;    // scaled_composition
    double dilation = 1.0;  // scaled_composition / saturated_dilation_average
    EnvelopeDef envelope;
    DeviationDef deviation;
};

namespace detail {

/// integral_0^{t_max} e^{-tau} x(tau)/(1 + x(tau)^2) dtau by per-cell Gauss.
inline double saturated_exp_average(const GridFunction& x) {
    const Grid& g = x.grid();
    CellQuadrature q(g, x);
    double acc = 0.0;
    for (std::size_t p = 0; p < q.s.size(); ++p)
        acc += q.w[p] * std::exp(-q.s[p]) * q.xv[p] / (1.0 + q.xv[p] * q.xv[p]);
    return acc;
}

} // namespace detail

/// identity:                     x
/// scaled_composition:           factor * x(dilation t)
/// saturated_dilation_average:   x(dt)^3/(1+x(dt)^2) at dt = dilation*t, plus
///                               e^{-t} * integral_0^inf e^{-tau} x/(1+x^2)
/// saturated_memory:             x(t)^2/(1+|x(t)|) *
///                               integral_0^t e^{-(t+tau)} x/(1+x^2) dtau
inline InnerOperator make_inner(const InnerDef& d, const std::string& label) {
    InnerOperator out;
    out.label = label;
    out.envelope_offset = make_density(d.envelope.offset, label + " envelope offset");
    out.envelope_factor = d.envelope.slope;
    out.deviation = make_deviation(d.deviation);
    if (d.kind == "identity") {
        out.apply_fn = [](const GridFunction& x) { return x; };
    } else if (d.kind == "scaled_composition") {
        const double f = d.factor, dil = d.dilation;
        out.apply_fn = [f, dil](const GridFunction& x) {
            return GridFunction::sample(x.grid(), [&](double t) { return f * x(dil * t); });
        };
    } else if (d.kind == "saturated_dilation_average") {
        const double dil = d.dilation;
        out.apply_fn = [dil](const GridFunction& x) {
            const double avg = detail::saturated_exp_average(x);
            std::vector<double> v(x.node_count());
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double t = x.grid().node(i);
                const double y = x(dil * t);
                v[i] = y * y * y / (1.0 + y * y) + std::exp(-t) * avg;
            }
            return GridFunction(x.grid(), std::move(v));
        };
    } else if (d.kind == "saturated_memory") {
        out.apply_fn = [](const GridFunction& x) {
            const Grid& g = x.grid();
            detail::CellQuadrature q(g, x);
            std::vector<double> v(x.node_count());
            v[0] = 0.0;
            double prefix = 0.0;  // integral_0^{t_i} e^{-tau} x/(1+x^2)
            for (std::size_t i = 1; i < v.size(); ++i) {
                for (std::size_t p = 2 * (i - 1); p < 2 * i; ++p)
                    prefix += q.w[p] * std::exp(-q.s[p]) * q.xv[p] / (1.0 + q.xv[p] * q.xv[p]);
                const double xi = x.value(i);
                v[i] = xi * xi / (1.0 + std::abs(xi)) * std::exp(-g.node(i)) * prefix;
            }
            return GridFunction(g, std::move(v));
        };
    } else {
        throw input_error("unknown inner operator kind '" + d.kind + "' for " + label);
    }
    return out;
}

} // namespace l1fix
