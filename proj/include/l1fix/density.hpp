#pragma once

/// Nonnegative integrable functions on [0, +inf) kept in analytic form.
///
/// Envelope data (offsets like a(t), forcing profiles like alpha(s)) enters
/// certificates through half-line integrals whose tails are far larger than
/// the accuracy targets of the certificate constants.  Storing them as
/// truncated grid functions would burn the whole error budget, so they stay
/// as callables and are integrated adaptively; grids only enter when a
/// density is sampled into a test function.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "l1fix/grid.hpp"
#include "l1fix/norms.hpp"
#include "l1fix/quadrature.hpp"
#include "l1fix/subset.hpp"

namespace l1fix {

class Density {
public:
    Density() : fn_([](double) { return 0.0; }), trivially_zero_(true) {}

    explicit Density(std::function<double(double)> fn, std::string label = {})
        : fn_(std::move(fn)), label_(std::move(label)) {}

    static Density zero() { return Density(); }

    double operator()(double t) const {
        const double v = fn_(t);
        if (!std::isfinite(v) || v < -1e-12)
            throw eval_error("density '" + label_ + "' must be finite and nonnegative, got " +
                             std::to_string(v) + " at t = " + std::to_string(t));
        return std::max(v, 0.0);
    }

    bool trivially_zero() const { return trivially_zero_; }
    const std::string& label() const { return label_; }

    /// Integral over [0, +inf).
    double norm(quad::Options opt = {}) const {
        if (trivially_zero_) return 0.0;
        return quad::integrate_halfline([this](double t) { return (*this)(t); }, 0.0, opt).value;
    }

    /// Integral over [tau, +inf).
    double tail(double tau, quad::Options opt = {}) const {
        if (trivially_zero_) return 0.0;
        return quad::integrate_halfline([this](double t) { return (*this)(t); },
                                        std::max(tau, 0.0), opt).value;
    }

    /// Integral over a finite union of intervals.
    double mass(const MeasurableSubset& d, quad::Options opt = {}) const {
        if (trivially_zero_) return 0.0;
        double s = 0.0;
        for (const auto& [a, b] : d.intervals())
            s += quad::integrate([this](double t) { return (*this)(t); },
                                 std::max(a, 0.0), b, opt).value;
        return s;
    }

    /// sup over meas(D) <= eps of the mass on D, evaluated on a fine probe
    /// grid plus the analytic tail beyond its horizon.  The probe horizon
    /// grows until the tail is negligible against the total, so the value is
    /// a faithful upper estimate for decaying densities.
    double worst_subset(double eps, double t_hint = 40.0) const {
        if (trivially_zero_ || eps <= 0.0) return 0.0;
        double horizon = std::max(t_hint, 1.0);
        const double total = norm();
        double tl = tail(horizon);
        while (tl > 1e-10 * (total + 1e-300) && horizon < 1e7) {
            horizon *= 4.0;
            tl = tail(horizon);
        }
        Grid probe = Grid::stretched(horizon, 1 << 14, 6.0);
        GridFunction sampled = GridFunction::sample(probe, [this](double t) { return (*this)(t); });
        return std::min(worst_subset_mass(sampled, eps) + tl, total);
    }

    GridFunction sample(const Grid& g) const {
        return GridFunction::sample(g, [this](double t) { return (*this)(t); });
    }

private:
    std::function<double(double)> fn_;
    std::string label_;
    bool trivially_zero_ = false;
};

} // namespace l1fix
