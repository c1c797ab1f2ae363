#pragma once

/// Fixed-point iteration for x = Ax + Bx.
///
/// The underlying existence theorem is non-constructive: no iteration is
/// guaranteed to converge, so success is defined as a residual below
/// tolerance and non-convergence is a reportable status, never an exception.
/// Two schemes:
///
///   picard:  x_{k+1} = (1-d) x_k + d (A x_k + B x_k)
///   split:   inner contraction loop  z = B z + y  for frozen y = A x_k,
///            then x_{k+1} = (1-d) x_k + d z
///
/// Damping d starts at config.damping and halves automatically when the
/// residual increases (at most 6 halvings per run).  A converged report
/// always carries the residual of the final iterate interpolated onto a
/// twice-refined grid: a discrete fixed point is only trusted when the
/// residual survives refinement.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "l1fix/errors.hpp"
#include "l1fix/grid.hpp"
#include "l1fix/norms.hpp"
#include "l1fix/operators.hpp"

namespace l1fix {

enum class Scheme { picard, split };

enum class SolveStatus { converged, max_iters, diverged };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iters: return "max_iters";
        case SolveStatus::diverged: return "diverged";
    }
    return "?";
}

inline const char* to_string(Scheme s) {
    return s == Scheme::picard ? "picard" : "split";
}

struct SolveConfig {
    Scheme scheme = Scheme::picard;
    double tol = 1e-6;  // relative residual target
    std::size_t max_iters = 200;
    double damping = 1.0;  // in (0, 1]
    double inner_tol = 1e-8;
    std::size_t inner_max_iters = 200;
    std::optional<double> project_to_ball;

    void validate() const {
        if (!(tol > 0.0)) throw input_error("solver tol must be positive");
        if (max_iters < 1) throw input_error("solver max_iters must be >= 1");
        if (!(damping > 0.0 && damping <= 1.0)) throw input_error("damping must lie in (0, 1]");
        if (!(inner_tol > 0.0)) throw input_error("inner_tol must be positive");
        if (inner_max_iters < 1) throw input_error("inner_max_iters must be >= 1");
        if (project_to_ball && !(*project_to_ball > 0.0))
            throw input_error("projection radius must be positive");
    }
};

struct SolveReport {
    GridFunction final_iterate;
    std::vector<double> residual_history;  // residual of x_k for k = 0, 1, ...
    std::vector<double> norm_history;      // ||x_k||, aligned with residual_history
    SolveStatus status = SolveStatus::max_iters;
    std::optional<double> refinement_residual;  // residual on the 2x refined grid
    std::vector<std::size_t> inner_iterations;  // split scheme only
    double final_residual = 0.0;
    double final_norm = 0.0;
    double damping_final = 1.0;
    std::size_t halvings = 0;
    std::string diagnostics;
};

/// Radial projection onto the ball of radius r.
inline GridFunction project_ball(GridFunction x, double r) {
    if (!(r > 0.0)) throw input_error("project_ball needs r > 0");
    const double n = integrate_abs(x);
    if (n > r) x *= r / n;
    return x;
}

namespace detail {

struct IterationDriver {
    const ProblemSpec& spec;
    const SolveConfig& cfg;
    SolveReport rep;
    double damping;
    double divergence_bound;

    IterationDriver(const ProblemSpec& s, const SolveConfig& c) : spec(s), cfg(c) {
        cfg.validate();
        damping = cfg.damping;
        divergence_bound = 1e6 * (1.0 + cfg.project_to_ball.value_or(0.0));
    }

    /// Damped move toward a candidate image, with automatic halving while
    /// the residual would increase.  `image_of` maps an iterate to the
    /// candidate it should move toward (Gx for picard, z* for split);
    /// `residual_of` evaluates ||x - Ax - Bx|| for a fresh iterate.
    template <class ImageOf, class ResidualOf>
    void run(GridFunction x0, ImageOf&& image_of, ResidualOf&& residual_of) {
        GridFunction x = cfg.project_to_ball ? project_ball(std::move(x0), *cfg.project_to_ball)
                                             : std::move(x0);
        GridFunction target = image_of(x);
        double res = distance(x, residual_image_);
        rep.residual_history.push_back(res);
        rep.norm_history.push_back(integrate_abs(x));
        for (std::size_t k = 0; k < cfg.max_iters; ++k) {
            if (res <= cfg.tol * (1.0 + integrate_abs(x))) {
                rep.status = SolveStatus::converged;
                break;
            }
            if (integrate_abs(x) > divergence_bound) {
                rep.status = SolveStatus::diverged;
                rep.diagnostics = "iterate norm exceeded " + std::to_string(divergence_bound);
                break;
            }
            if (inner_failed_) {
                rep.status = SolveStatus::diverged;
                break;
            }
            while (true) {
                GridFunction xn = x;
                xn *= 1.0 - damping;
                xn.axpy(damping, target);
                if (cfg.project_to_ball) xn = project_ball(std::move(xn), *cfg.project_to_ball);
                GridFunction tn = image_of(xn);
                const double rn = distance(xn, residual_image_);
                if (rn > res && rep.halvings < 6) {
                    ++rep.halvings;
                    damping *= 0.5;
                    continue;
                }
                x = std::move(xn);
                target = std::move(tn);
                res = rn;
                break;
            }
            rep.residual_history.push_back(res);
            rep.norm_history.push_back(integrate_abs(x));
            if (res <= cfg.tol * (1.0 + integrate_abs(x))) {
                rep.status = SolveStatus::converged;
            }
        }
        if (rep.status != SolveStatus::converged && rep.status != SolveStatus::diverged)
            rep.status = SolveStatus::max_iters;
        rep.final_residual = res;
        rep.final_norm = integrate_abs(x);
        rep.damping_final = damping;
        if (rep.status == SolveStatus::converged) {
            GridFunction fine = x.on_grid(x.grid().refined());
            rep.refinement_residual = residual_of(fine);
        }
        rep.final_iterate = std::move(x);
    }

    GridFunction residual_image_;  // Ax + Bx of the iterate just imaged
    bool inner_failed_ = false;
};

} // namespace detail

/// Damped Picard iteration on the full map G = A + B.
inline SolveReport solve_picard(const ProblemSpec& spec, GridFunction x0, SolveConfig cfg = {}) {
    cfg.scheme = Scheme::picard;
    detail::IterationDriver drv(spec, cfg);
    auto image = [&](const GridFunction& x) {
        GridFunction g = apply_A(spec, x);
        g += apply_B(spec, x);
        drv.residual_image_ = g;
        return g;
    };
    drv.run(std::move(x0), image, [&](const GridFunction& x) { return residual(spec, x); });
    return std::move(drv.rep);
}

/// Outer loop on y = A x_k with an inner contraction solve of z = B z + y.
/// The inner loop leans on the separate-contraction property of B; if it
/// fails to settle within inner_max_iters the run is reported diverged.
inline SolveReport solve_split(const ProblemSpec& spec, GridFunction x0, SolveConfig cfg = {}) {
    cfg.scheme = Scheme::split;
    detail::IterationDriver drv(spec, cfg);
    auto image = [&](const GridFunction& x) {
        GridFunction y = apply_A(spec, x);
        {
            GridFunction bx = apply_B(spec, x);
            drv.residual_image_ = y;
            drv.residual_image_ += bx;
        }
        GridFunction z = x;
        std::size_t inner = 0;
        for (; inner < cfg.inner_max_iters; ++inner) {
            GridFunction zn = apply_B(spec, z);
            zn += y;
            const double step = distance(zn, z);
            z = std::move(zn);
            if (step <= cfg.inner_tol * (1.0 + integrate_abs(z))) break;
        }
        if (inner == cfg.inner_max_iters) {
            drv.inner_failed_ = true;
            drv.rep.diagnostics = "inner contraction loop did not settle within " +
                                  std::to_string(cfg.inner_max_iters) + " iterations";
        }
        drv.rep.inner_iterations.push_back(inner + 1);
        return z;
    };
    drv.run(std::move(x0), image, [&](const GridFunction& x) { return residual(spec, x); });
    return std::move(drv.rep);
}

inline SolveReport solve(const ProblemSpec& spec, GridFunction x0, const SolveConfig& cfg) {
    return cfg.scheme == Scheme::split ? solve_split(spec, x0, cfg)
                                       : solve_picard(spec, x0, cfg);
}

} // namespace l1fix
