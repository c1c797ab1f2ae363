#pragma once

/// Discretized measure of weak noncompactness on finite ensembles in L1:
///
///     mu(X) = c(X) + d(X)
///     c(X)  = lim_{eps->0} sup_x sup { integral_D |x| : meas(D) <= eps }
///     d(X)  = lim_{tau->inf} sup_x integral_tau^inf |x|
///
/// The limits are replaced by fixed schedules (eps decreasing, tau
/// increasing); estimates report the last schedule value plus a
/// stabilization flag, never a claimed limit.  For a finite ensemble of
/// integrable functions the true limit is 0 -- the value of the estimator
/// is its finite-resolution diagnostics and the contraction ratio
/// mu(image) <= gamma * mu(X) + slack checked at those schedules.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "l1fix/certify.hpp"
#include "l1fix/errors.hpp"
#include "l1fix/grid.hpp"
#include "l1fix/norms.hpp"
#include "l1fix/operators.hpp"
#include "l1fix/rng.hpp"

namespace l1fix {

struct Ensemble {
    std::vector<GridFunction> members;
    std::string label;

    void validate() const {
        if (members.empty()) throw input_error("ensemble must be nonempty");
        const double t = members.front().grid().t_max();
        for (const auto& m : members)
            if (m.grid().t_max() != t)
                throw input_error("ensemble members must share the truncation horizon");
    }

    double t_max() const { return members.front().grid().t_max(); }
};

struct Schedules {
    std::vector<double> eps;  // strictly decreasing, length >= 3
    std::vector<double> tau;  // strictly increasing, max <= horizon

    static Schedules defaults(double t_max = 40.0) {
        Schedules s;
        s.eps = {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
        s.tau = {t_max / 8.0, t_max / 4.0, t_max / 2.0, t_max};
        return s;
    }
};

namespace detail {

inline void check_eps_schedule(const std::vector<double>& eps) {
    if (eps.size() < 3) throw input_error("eps schedule needs at least 3 entries");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw input_error("eps schedule must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw input_error("eps schedule must be strictly decreasing");
    }
}

inline void check_tau_schedule(const std::vector<double>& tau, double t_max) {
    if (tau.empty()) throw input_error("tau schedule must be nonempty");
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (!(tau[i] > 0.0)) throw input_error("tau schedule must be positive");
        if (i > 0 && !(tau[i] > tau[i - 1]))
            throw input_error("tau schedule must be strictly increasing");
    }
    if (tau.back() > t_max * (1.0 + 1e-12))
        throw input_error("tau schedule exceeds the ensemble horizon");
}

inline bool stabilized(const std::vector<double>& v) {
    if (v.size() < 2) return false;
    const double last = v.back(), prev = v[v.size() - 2];
    return std::abs(last - prev) <= 1e-6 * std::max(std::abs(last), 1e-12);
}

} // namespace detail

struct MeasureEstimate {
    double c_hat = 0.0;
    double d_hat = 0.0;
    double mu_hat = 0.0;  // always c_hat + d_hat
    std::vector<double> eps_schedule, tau_schedule;
    std::vector<double> c_per_eps, d_per_tau;
    bool c_stabilized = false;
    bool d_stabilized = false;
};

/// sup over members of worst_subset_mass at each eps; the estimate is the
/// last (smallest-eps) value.
inline std::vector<double> c_profile(const Ensemble& x, const std::vector<double>& eps) {
    x.validate();
    detail::check_eps_schedule(eps);
    std::vector<double> out;
    out.reserve(eps.size());
    for (double e : eps) {
        double sup = 0.0;
        for (const auto& m : x.members) sup = std::max(sup, worst_subset_mass(m, e));
        out.push_back(sup);
    }
    return out;
}

inline double c_measure(const Ensemble& x, const std::vector<double>& eps) {
    return c_profile(x, eps).back();
}

/// sup over members of tail_mass at each tau; the estimate is the last
/// (largest-tau) value.
inline std::vector<double> d_profile(const Ensemble& x, const std::vector<double>& tau) {
    x.validate();
    detail::check_tau_schedule(tau, x.t_max());
    std::vector<double> out;
    out.reserve(tau.size());
    for (double t : tau) {
        double sup = 0.0;
        for (const auto& m : x.members) sup = std::max(sup, tail_mass(m, t));
        out.push_back(sup);
    }
    return out;
}

inline double d_measure(const Ensemble& x, const std::vector<double>& tau) {
    return d_profile(x, tau).back();
}

inline MeasureEstimate mu_measure(const Ensemble& x, const Schedules& sch) {
    MeasureEstimate est;
    est.eps_schedule = sch.eps;
    est.tau_schedule = sch.tau;
    est.c_per_eps = c_profile(x, sch.eps);
    est.d_per_tau = d_profile(x, sch.tau);
    est.c_hat = est.c_per_eps.back();
    est.d_hat = est.d_per_tau.back();
    est.mu_hat = est.c_hat + est.d_hat;
    est.c_stabilized = detail::stabilized(est.c_per_eps);
    est.d_stabilized = detail::stabilized(est.d_per_tau);
    return est;
}

/// Dieudonne-criterion diagnostics at one resolution: how much mass the
/// worst member still carries on small sets (condition (a)) and past tau
/// (condition (b)).
struct DieudonneReport {
    double eps = 0.0, tau = 0.0;
    double small_set_mass = 0.0;
    double tail_mass_max = 0.0;
};

inline DieudonneReport dieudonne_report(const Ensemble& x, double eps, double tau) {
    if (!(eps > 0.0) || !(tau > 0.0)) throw input_error("dieudonne_report needs eps, tau > 0");
    x.validate();
    DieudonneReport rep;
    rep.eps = eps;
    rep.tau = tau;
    for (const auto& m : x.members) {
        rep.small_set_mass = std::max(rep.small_set_mass, worst_subset_mass(m, eps));
        rep.tail_mass_max = std::max(rep.tail_mass_max, tail_mass(m, tau));
    }
    return rep;
}

struct MuContractionOptions {
    bool cross_pairs = false;  // image {Ax_i + Bx_j} over all pairs instead of the diagonal
    /// Quadrature grid for the images.  Ensemble members may live on very
    /// coarse grids (indicator boxes need four nodes), which is exact for
    /// measuring the inputs but useless for evaluating the Volterra term, so
    /// each member is resampled onto the union of its own nodes and this
    /// grid's before A and B are applied.  The union keeps box edges exact.
    std::optional<Grid> eval_grid;
    CertifyOptions cert{};
};

struct MuContractionReport {
    std::string label;
    double gamma = 0.0;
    double slack = 0.0;
    MeasureEstimate input, image;
    double lhs = 0.0;  // mu(image)
    double rhs = 0.0;  // gamma * mu(input) + slack
    bool pass = false;
    bool cross_pairs = false;
};

/// Finite-schedule slack for the mu-contraction inequality: the envelope
/// offsets contribute their own small-set and tail mass at the schedule
/// endpoints (those terms vanish only in the limit), the kernel norm its
/// estimation slack, and the Volterra discretization a sup-error term that
/// enters c_hat through a set of measure eps.
inline double mu_contraction_slack(const ProblemSpec& spec, const Schedules& sch,
                                   const Grid& grid, double max_member_norm,
                                   const CertifyOptions& opt = {}) {
    const double eps = sch.eps.back();
    const double tau = sch.tau.back();
    const double K = spec.kernel_norm.value;
    const double b = spec.g.envelope_slope, b1 = spec.f.envelope_slope;
    const double beta = spec.u.envelope_slope;
    const double th = grid.t_max();

    auto both = [&](const Density& dn, double coeff) {
        if (coeff == 0.0 || dn.trivially_zero()) return 0.0;
        return coeff * (dn.worst_subset(eps, th) + dn.tail(tau));
    };

    double s = 0.0;
    s += both(spec.f.envelope_offset, 1.0);
    s += both(spec.g.envelope_offset, 1.0);
    s += both(spec.u.envelope_offset, b1 * K);
    s += both(spec.Q_op.envelope_offset, b1 * K * beta);
    s += both(spec.T_op.envelope_offset, b);
    s += spec.kernel_norm.slack * (1.0 + max_member_norm);
    const double h = th / static_cast<double>(grid.cells());
    s += eps * opt.slack_coeff * h * (1.0 + K) * (1.0 + max_member_norm);
    s += opt.slack_abs;
    return s;
}

inline MuContractionReport check_mu_contraction(const ProblemSpec& spec, const Ensemble& x,
                                                const Schedules& sch,
                                                MuContractionOptions opt = {}) {
    x.validate();
    MuContractionReport rep;
    rep.label = x.label;
    rep.gamma = contraction_constant(spec);
    rep.cross_pairs = opt.cross_pairs;

    double max_norm = 0.0;
    std::vector<GridFunction> ax, bx;
    ax.reserve(x.members.size());
    bx.reserve(x.members.size());
    for (const auto& m : x.members) {
        max_norm = std::max(max_norm, integrate_abs(m));
        if (opt.eval_grid) {
            const GridFunction me = m.on_grid(merge_grids(m.grid(), *opt.eval_grid));
            ax.push_back(apply_A(spec, me));
            bx.push_back(apply_B(spec, me));
        } else {
            ax.push_back(apply_A(spec, m));
            bx.push_back(apply_B(spec, m));
        }
    }

    Ensemble image;
    image.label = x.label + (opt.cross_pairs ? " image (cross pairs)" : " image (diagonal)");
    if (opt.cross_pairs) {
        for (std::size_t i = 0; i < ax.size(); ++i)
            for (std::size_t j = 0; j < bx.size(); ++j) {
                GridFunction s = ax[i];
                s += bx[j].on_grid(s.grid());
                image.members.push_back(std::move(s));
            }
    } else {
        for (std::size_t i = 0; i < ax.size(); ++i) {
            GridFunction s = ax[i];
            s += bx[i];
            image.members.push_back(std::move(s));
        }
    }

    rep.input = mu_measure(x, sch);
    rep.image = mu_measure(image, sch);
    const Grid& sg = opt.eval_grid ? *opt.eval_grid : x.members.front().grid();
    rep.slack = mu_contraction_slack(spec, sch, sg, max_norm, opt.cert);
    rep.lhs = rep.image.mu_hat;
    rep.rhs = rep.gamma * rep.input.mu_hat + rep.slack;
    rep.pass = rep.lhs <= rep.rhs;
    return rep;
}

// --- ensemble generators ---------------------------------------------------

/// Mass concentrating toward 0:  x_n = n * 1_{[0, 1/n]}, n = 1..count.
/// Each member lives on its own four-node grid so the indicator is exact up
/// to a closing ramp whose mass is 5e-13 regardless of n, keeping the exact
/// combinatorial oracle max_n min(1, n*eps) valid to ~1e-12.
inline Ensemble concentrating_ensemble(std::size_t count, double t_max) {
    if (count < 1) throw input_error("ensemble size must be positive");
    if (!(t_max > 1.0 + 1e-6)) throw input_error("concentrating ensemble needs t_max > 1");
    Ensemble x;
    x.label = "concentrating";
    for (std::size_t n = 1; n <= count; ++n) {
        const double w = 1.0 / static_cast<double>(n);
        const double ramp = 1e-12 * w;
        Grid g = Grid::from_nodes({0.0, w, w + ramp, t_max});
        x.members.emplace_back(g, std::vector<double>{static_cast<double>(n),
                                                      static_cast<double>(n), 0.0, 0.0});
    }
    return x;
}

/// Mass escaping to the right:  x_n = 1_{[n, n+1]}, n = 1..count.
inline Ensemble escaping_ensemble(std::size_t count, double t_max) {
    if (count < 1) throw input_error("ensemble size must be positive");
    if (!(t_max >= static_cast<double>(count) + 1.0))
        throw input_error("escaping ensemble needs t_max >= count + 1");
    Ensemble x;
    x.label = "escaping";
    const double ramp = 1e-12;
    for (std::size_t n = 1; n <= count; ++n) {
        const double a = static_cast<double>(n), b = a + 1.0;
        std::vector<double> nodes{0.0, a - ramp, a, b};
        std::vector<double> vals{0.0, 0.0, 1.0, 1.0};
        if (b + ramp < t_max) {
            nodes.push_back(b + ramp);
            vals.push_back(0.0);
        }
        if (nodes.back() < t_max) {
            nodes.push_back(t_max);
            vals.push_back(0.0);
        }
        // b == t_max keeps value 1 at the horizon: the zero extension
        // beyond t_max closes the box without losing its mass.
        x.members.emplace_back(Grid::from_nodes(std::move(nodes)), std::move(vals));
    }
    return x;
}

/// Seeded random bumps with norms at most r.
inline Ensemble random_ball_ensemble(std::size_t count, double r, const Grid& grid,
                                     std::uint64_t seed) {
    if (count < 1) throw input_error("ensemble size must be positive");
    Ensemble x;
    x.label = "random-in-ball";
    Rng rng(seed);
    for (std::size_t n = 0; n < count; ++n) x.members.push_back(rng.bump_function(grid, r));
    return x;
}

/// Weakly oscillating family  x_n(t) = (1 + sin(n t)) e^{-t}.
inline Ensemble oscillating_ensemble(std::size_t count, const Grid& grid) {
    if (count < 1) throw input_error("ensemble size must be positive");
    Ensemble x;
    x.label = "oscillating";
    for (std::size_t n = 1; n <= count; ++n)
        x.members.push_back(GridFunction::sample(grid, [n](double t) {
            return (1.0 + std::sin(static_cast<double>(n) * t)) * std::exp(-t);
        }));
    return x;
}

/// Rescale every member onto the sphere of radius r (zero members stay zero).
inline Ensemble scale_to_norm(Ensemble x, double r) {
    if (!(r >= 0.0)) throw input_error("scale_to_norm needs r >= 0");
    for (auto& m : x.members) {
        const double n = integrate_abs(m);
        if (n > 0.0) m *= r / n;
    }
    return x;
}

/// Oscillation probe: apply A to a weakly oscillating family scaled into
/// B_r and report the pairwise L1 distances of inputs and images.  Purely
/// diagnostic -- no subsequence claim is made.
struct OscillationProbe {
    std::vector<double> input_distances;  // upper triangle, row major
    std::vector<double> image_distances;
    double image_min = 0.0, image_max = 0.0;
};

inline OscillationProbe ws_probe(const ProblemSpec& spec, std::size_t count, double r,
                                 const Grid& grid) {
    Ensemble x = scale_to_norm(oscillating_ensemble(count, grid), r);
    std::vector<GridFunction> images;
    images.reserve(count);
    for (const auto& m : x.members) images.push_back(apply_A(spec, m));
    OscillationProbe probe;
    bool first = true;
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j) {
            probe.input_distances.push_back(distance(x.members[i], x.members[j]));
            const double d = distance(images[i], images[j]);
            probe.image_distances.push_back(d);
            probe.image_min = first ? d : std::min(probe.image_min, d);
            probe.image_max = first ? d : std::max(probe.image_max, d);
            first = false;
        }
    return probe;
}

} // namespace l1fix
