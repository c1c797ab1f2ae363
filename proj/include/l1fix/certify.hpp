#pragma once

/// Certificate engine: the contraction constant, the invariant-ball radius,
/// and sampling-based verification or falsification of the admissibility
/// hypotheses A1-A7 a problem declares.
///
///   A1  growth envelopes of the outer fields g and f
///   A2  inner-operator envelopes and deviation slopes (T, Q, phi, psi)
///   A3  separate-contraction property of B (against a declared witness)
///   A4  Caratheodory regularity of u (not checkable numerically)
///   A5  growth envelope and t-continuity modulus of u
///   A6  the kernel norm (declared exactly or estimated numerically)
///   A7  gamma = b rho1 / m + b1 rho2 beta ||K|| / M  < 1
///
/// Sampling can falsify an envelope (with a concrete witness point) but can
/// only ever report "verified by sampling", never proof.  Violations inside
/// the numerical slack are inconclusive rather than falsified: an inequality
/// cannot be honestly rejected below the resolution of the quadrature.
///
/// Sampling law, pinned for reproducibility: t and s are log-uniform on
/// [t_lo, t_max]; scalar x is sign-flipped log-uniform on [x_lo, x_hi];
/// random elements of L1 are sign-flipped exponential bumps (Rng::bump_function).

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "l1fix/density.hpp"
#include "l1fix/fields.hpp"
#include "l1fix/grid.hpp"
#include "l1fix/norms.hpp"
#include "l1fix/operators.hpp"
#include "l1fix/rng.hpp"

namespace l1fix {

enum class CheckStatus { verified_by_sampling, falsified, declared_by_user, unverifiable, inconclusive };

inline const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::verified_by_sampling: return "verified-by-sampling";
        case CheckStatus::falsified: return "falsified";
        case CheckStatus::declared_by_user: return "declared-by-user";
        case CheckStatus::unverifiable: return "unverifiable";
        case CheckStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

/// A concrete point at which a claimed inequality failed, stored so the
/// violation can be re-evaluated from the report alone.
struct Witness {
    std::string inequality;
    std::vector<std::pair<std::string, double>> point;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};

struct AssumptionReport {
    std::string id;       // "A1".."A7"
    std::string subject;  // which inequality within the assumption
    CheckStatus status = CheckStatus::unverifiable;
    std::size_t samples = 0;
    std::optional<Witness> witness;
    double max_margin = 0.0;  // largest observed lhs - rhs (negative = room)
    std::string notes;
};

/// Separate-contraction data for B: either a strict constant kappa in (0,1)
/// or a comparison pair (phi_c, psi_c) with phi_c(rho) + psi_c(rho) <= rho.
struct ContractionWitness {
    std::optional<double> kappa;
    std::function<double(double)> phi_c;
    std::function<double(double)> psi_c;

    static ContractionWitness strict(double k) {
        if (!(k > 0.0 && k < 1.0))
            throw input_error("strict contraction constant must lie in (0,1)");
        ContractionWitness w;
        w.kappa = k;
        return w;
    }

    double phi(double rho) const { return kappa ? *kappa * rho : phi_c(rho); }
    double psi(double rho) const { return kappa ? (1.0 - *kappa) * rho : psi_c(rho); }
};

struct CertifyOptions {
    std::uint64_t seed = 1;
    std::size_t field_samples = 2000;  // pointwise envelope draws per inequality
    std::size_t function_samples = 50; // random grid functions for A2
    std::size_t pair_samples = 100;    // pairs for A3 and ball invariance
    double t_lo = 1e-3;
    double x_lo = 1e-3;
    double x_hi = 1e3;
    double slack_abs = 1e-9;
    double slack_rel = 1e-12;  // pointwise analytic inequalities
    double slack_coeff = 4.0;  // operator inequalities: coeff * h_bar^2 * scale
};

/// Discretization slack for inequalities involving grid-level operator
/// applications; h_bar = t_max / cells is the mean cell width.
inline double operator_slack(const Grid& g, double scale, const CertifyOptions& o) {
    const double h = g.t_max() / static_cast<double>(g.cells());
    return o.slack_abs + o.slack_coeff * h * h * std::abs(scale);
}

/// gamma = b rho1 / m + b1 rho2 beta ||K|| / M.
inline double contraction_constant(const ProblemSpec& spec) {
    const double b = spec.g.envelope_slope, b1 = spec.f.envelope_slope;
    const double rho1 = spec.T_op.envelope_factor, rho2 = spec.Q_op.envelope_factor;
    const double m = spec.T_op.deviation.slope_min, M = spec.Q_op.deviation.slope_min;
    const double beta = spec.u.envelope_slope, K = spec.kernel_norm.value;
    if (!(m > 0.0) || !(M > 0.0))
        throw input_error("deviation slope minima must be positive (A2 data)");
    if (b < 0.0 || b1 < 0.0 || rho1 < 0.0 || rho2 < 0.0 || beta < 0.0 || K < 0.0)
        throw input_error("envelope constants must be nonnegative");
    return b * rho1 / m + b1 * rho2 * beta * K / M;
}

struct BallRadius {
    double C = 0.0;
    double r = 0.0;
    double gamma = 0.0;
    bool ok = false;  // gamma < 1; r is meaningful only when set
};

/// C = ||a1|| + ||a|| + b1 ||K|| (||alpha|| + beta ||gamma2||) + b ||gamma1||
/// and r = C / (1 - gamma).  gamma >= 1 is a recorded failure, not an error.
inline BallRadius invariant_ball_radius(const ProblemSpec& spec) {
    BallRadius out;
    out.gamma = contraction_constant(spec);
    const double K = spec.kernel_norm.value;
    out.C = spec.f.envelope_offset.norm() + spec.g.envelope_offset.norm() +
            spec.f.envelope_slope * K *
                (spec.u.envelope_offset.norm() +
                 spec.u.envelope_slope * spec.Q_op.envelope_offset.norm()) +
            spec.g.envelope_slope * spec.T_op.envelope_offset.norm();
    if (out.gamma < 1.0) {
        out.r = out.C / (1.0 - out.gamma);
        out.ok = true;
    }
    return out;
}

namespace detail {

struct IneqTracker {
    const CertifyOptions& opt;
    AssumptionReport rep;

    IneqTracker(std::string id, std::string subject, const CertifyOptions& o) : opt(o) {
        rep.id = std::move(id);
        rep.subject = std::move(subject);
        rep.status = CheckStatus::verified_by_sampling;
    }

    /// Record one sampled inequality lhs <= rhs with the given slack.
    void observe(double lhs, double rhs, double slack, const Witness& maybe) {
        ++rep.samples;
        rep.max_margin = std::max(rep.max_margin, lhs - rhs);
        if (lhs > rhs + slack && rep.status != CheckStatus::falsified) {
            rep.status = CheckStatus::falsified;
            rep.witness = maybe;
            rep.witness->lhs = lhs;
            rep.witness->rhs = rhs;
            rep.witness->slack = slack;
        } else if (lhs > rhs && rep.status == CheckStatus::verified_by_sampling) {
            rep.status = CheckStatus::inconclusive;
            rep.notes = "violations observed within numerical slack";
        }
    }
};

inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 step; decouples per-sample streams from the master seed
    std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Sampling checks of A1, A2, A4, A5 for one problem.  Pointwise envelopes
/// use analytic slack only; the A2 operator envelopes act on random grid
/// functions and carry discretization slack.
inline std::vector<AssumptionReport> check_envelopes(const ProblemSpec& spec, const Grid& grid,
                                                     std::size_t sample_count, std::uint64_t seed,
                                                     const CertifyOptions& base = {}) {
    if (sample_count < 1) throw input_error("check_envelopes needs sample_count >= 1");
    CertifyOptions opt = base;
    opt.seed = seed;
    opt.field_samples = sample_count;
    const double t_max = grid.t_max();
    std::vector<AssumptionReport> out;

    auto point_slack = [&](double rhs) { return opt.slack_abs + opt.slack_rel * std::abs(rhs); };

    {  // A1: |g(t,x)| <= a(t) + b|x| and |f(t,x)| <= a1(t) + b1|x|
        const ScalarField2* fields[2] = {&spec.g, &spec.f};
        const char* names[2] = {"g growth envelope", "f growth envelope"};
        for (int fi = 0; fi < 2; ++fi) {
            const ScalarField2& F = *fields[fi];
            detail::IneqTracker trk("A1", names[fi], opt);
            Rng rng(detail::child_seed(seed, 11 + fi));
            for (std::size_t i = 0; i < opt.field_samples; ++i) {
                const double t = rng.log_uniform(opt.t_lo, t_max);
                const double x = rng.signed_log_uniform(opt.x_lo, opt.x_hi);
                const double lhs = std::abs(F.eval(t, x));
                const double rhs = F.envelope_offset(t) + F.envelope_slope * std::abs(x);
                trk.observe(lhs, rhs, point_slack(rhs),
                            {"|field(t,x)| <= offset(t) + slope*|x|", {{"t", t}, {"x", x}}});
            }
            out.push_back(std::move(trk.rep));
        }
    }

    {  // A5: |u(t,s,x)| <= alpha(s) + beta|x|
        detail::IneqTracker trk("A5", "u growth envelope", opt);
        Rng rng(detail::child_seed(seed, 21));
        for (std::size_t i = 0; i < opt.field_samples; ++i) {
            const double t = rng.log_uniform(opt.t_lo, t_max);
            const double s = rng.log_uniform(opt.t_lo, t_max);
            const double x = rng.signed_log_uniform(opt.x_lo, opt.x_hi);
            const double lhs = std::abs(spec.u.eval(t, s, x));
            const double rhs = spec.u.envelope_offset(s) + spec.u.envelope_slope * std::abs(x);
            trk.observe(lhs, rhs, point_slack(rhs),
                        {"|u(t,s,x)| <= alpha(s) + beta*|x|", {{"t", t}, {"s", s}, {"x", x}}});
        }
        out.push_back(std::move(trk.rep));
    }

    {  // A5: |u(t,s,x) - u(t',s,x)| <= h(|t-t'|) (c(s) + l|x|)
        detail::IneqTracker trk("A5", "u continuity modulus in t", opt);
        Rng rng(detail::child_seed(seed, 22));
        for (std::size_t i = 0; i < opt.field_samples; ++i) {
            const double t = rng.log_uniform(opt.t_lo, t_max);
            double d = rng.log_uniform(1e-4, 1.0);
            if (rng.chance(0.5) && t - d >= 0.0) d = -d;
            const double s = rng.log_uniform(opt.t_lo, t_max);
            const double x = rng.signed_log_uniform(opt.x_lo, opt.x_hi);
            const double lhs = std::abs(spec.u.eval(t, s, x) - spec.u.eval(t + d, s, x));
            const double rhs = spec.u.modulus_gauge(std::abs(d)) *
                               (spec.u.modulus_offset(s) + spec.u.modulus_slope * std::abs(x));
            trk.observe(lhs, rhs, point_slack(rhs),
                        {"|u(t,s,x)-u(t+d,s,x)| <= h(|d|)(c(s) + l*|x|)",
                         {{"t", t}, {"s", s}, {"x", x}, {"d", d}}});
        }
        out.push_back(std::move(trk.rep));
    }

    {  // A2: inner-operator envelopes on random grid functions
        const InnerOperator* ops[2] = {&spec.T_op, &spec.Q_op};
        const char* names[2] = {"T envelope", "Q envelope"};
        for (int oi = 0; oi < 2; ++oi) {
            const InnerOperator& S = *ops[oi];
            detail::IneqTracker trk("A2", names[oi], opt);
            Rng rng(detail::child_seed(seed, 31 + oi));
            const std::size_t funcs = std::max<std::size_t>(1, opt.function_samples);
            for (std::size_t i = 0; i < funcs; ++i) {
                GridFunction x = rng.bump_function(grid, 10.0);
                GridFunction Sx = S.apply(x);
                const double xnorm = integrate_abs(x);
                for (std::size_t probe = 0; probe < 20; ++probe) {
                    const std::size_t j = rng.index(grid.node_count());
                    const double t = grid.node(j);
                    const double lhs = std::abs(Sx.value(j));
                    const double rhs =
                        S.envelope_offset(t) + S.envelope_factor * std::abs(x(S.deviation.eval(t)));
                    trk.observe(lhs, rhs, operator_slack(grid, rhs + xnorm, opt),
                                {"|(Sx)(t)| <= offset(t) + factor*|x(phi(t))|",
                                 {{"t", t}, {"sample", static_cast<double>(i)}}});
                }
            }
            out.push_back(std::move(trk.rep));
        }
    }

    {  // A2: deviations are increasing with slope >= slope_min
        const InnerOperator* ops[2] = {&spec.T_op, &spec.Q_op};
        const char* names[2] = {"T deviation slope", "Q deviation slope"};
        for (int oi = 0; oi < 2; ++oi) {
            const Deviation& dev = ops[oi]->deviation;
            detail::IneqTracker trk("A2", names[oi], opt);
            Rng rng(detail::child_seed(seed, 41 + oi));
            for (std::size_t i = 0; i < opt.field_samples; ++i) {
                const double t = rng.log_uniform(opt.t_lo, t_max);
                const double d = rng.log_uniform(1e-6, 1e-1) * (1.0 + t);
                const double fd = (dev.eval(t + d) - dev.eval(t)) / d;
                // lhs/rhs flipped: the slope must stay ABOVE the floor
                trk.observe(dev.slope_min * (1.0 - 1e-9), fd,
                            point_slack(dev.slope_min),
                            {"(phi(t+d)-phi(t))/d >= slope_min", {{"t", t}, {"d", d}}});
            }
            out.push_back(std::move(trk.rep));
        }
    }

    {  // A4: regularity of u cannot be decided by sampling; probe continuity
        AssumptionReport rep;
        rep.id = "A4";
        rep.subject = "u regularity in (s, x)";
        rep.status = CheckStatus::unverifiable;
        Rng rng(detail::child_seed(seed, 51));
        double worst = 0.0;
        const std::size_t n = std::min<std::size_t>(opt.field_samples, 500);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = rng.log_uniform(opt.t_lo, t_max);
            const double s = rng.log_uniform(opt.t_lo, t_max);
            const double x = rng.signed_log_uniform(opt.x_lo, opt.x_hi);
            const double ds = 1e-7 * (1.0 + s), dx = 1e-7 * (1.0 + std::abs(x));
            worst = std::max(worst, std::abs(spec.u.eval(t, s + ds, x) - spec.u.eval(t, s, x)));
            worst = std::max(worst, std::abs(spec.u.eval(t, s, x + dx) - spec.u.eval(t, s, x)));
        }
        rep.samples = n;
        rep.max_margin = worst;
        rep.notes = "measurability is not a samplable property; continuity probes only "
                    "(largest jump under 1e-7 perturbations recorded as margin)";
        out.push_back(std::move(rep));
    }

    return out;
}

/// A3: d(Bx, By) <= phi_c(d(x, y)) + slack over random pairs in the ball of
/// radius r, plus admissibility of the comparison pair on a log-spaced grid.
inline AssumptionReport check_separate_contraction(const ProblemSpec& spec, const Grid& grid,
                                                   const ContractionWitness& witness,
                                                   std::size_t pair_count, double r,
                                                   std::uint64_t seed,
                                                   const CertifyOptions& base = {}) {
    if (pair_count < 1) throw input_error("check_separate_contraction needs pair_count >= 1");
    if (!(r > 0.0)) throw input_error("check_separate_contraction needs r > 0");
    CertifyOptions opt = base;
    detail::IneqTracker trk("A3", "B separate contraction", opt);

    // Comparison-pair admissibility: psi_c(rho) + phi_c(rho) <= rho.
    for (int i = 0; i <= 36; ++i) {
        const double rho = std::pow(10.0, -6.0 + 0.25 * i);
        const double lhs = witness.phi(rho) + witness.psi(rho);
        trk.observe(lhs, rho, opt.slack_abs + opt.slack_rel * rho,
                    {"phi_c(rho) + psi_c(rho) <= rho", {{"rho", rho}}});
    }

    for (std::size_t i = 0; i < pair_count; ++i) {
        const std::uint64_t ps = detail::child_seed(seed, 100 + i);
        Rng rng(ps);
        GridFunction x = rng.bump_function(grid, r);
        GridFunction y = rng.bump_function(grid, r);
        const double dxy = distance(x, y);
        const double dB = distance(apply_B(spec, x), apply_B(spec, y));
        trk.observe(dB, witness.phi(dxy),
                    operator_slack(grid, integrate_abs(x) + integrate_abs(y), opt),
                    {"d(Bx,By) <= phi_c(d(x,y))",
                     {{"pair_seed", static_cast<double>(ps)}, {"d_xy", dxy}}});
    }
    trk.rep.notes += trk.rep.notes.empty() ? "" : "; ";
    trk.rep.notes += "checked on the ball of radius r only; the unrestricted claim "
                     "is not samplable";
    return trk.rep;
}

/// Step-1 containment: ||Ax + By|| <= r + slack for x, y in the ball B_r.
/// Every fourth pair is rescaled onto the boundary ||x|| = ||y|| = r.
inline AssumptionReport check_ball_invariance(const ProblemSpec& spec, const Grid& grid, double r,
                                              std::size_t sample_count, std::uint64_t seed,
                                              const CertifyOptions& base = {}) {
    if (sample_count < 1) throw input_error("check_ball_invariance needs sample_count >= 1");
    if (!(r >= 0.0)) throw input_error("check_ball_invariance needs r >= 0");
    CertifyOptions opt = base;
    detail::IneqTracker trk("ball", "A(B_r) + B(B_r) inside B_r", opt);
    double max_norm = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
        const std::uint64_t ps = detail::child_seed(seed, 500 + i);
        Rng rng(ps);
        GridFunction x = rng.bump_function(grid, r);
        GridFunction y = rng.bump_function(grid, r);
        if (r > 0.0 && i % 4 == 0) {
            const double nx = integrate_abs(x), ny = integrate_abs(y);
            if (nx > 0.0) x *= r / nx;
            if (ny > 0.0) y *= r / ny;
        }
        GridFunction image = apply_A(spec, x);
        image += apply_B(spec, y);
        const double n = integrate_abs(image);
        max_norm = std::max(max_norm, n);
        trk.observe(n, r,
                    operator_slack(grid, (1.0 + spec.kernel_norm.value) * (r + 1.0), opt) +
                        spec.kernel_norm.slack * (1.0 + r),
                    {"||Ax + By|| <= r", {{"pair_seed", static_cast<double>(ps)}}});
    }
    trk.rep.notes = "max observed norm " + std::to_string(max_norm) + " vs r = " +
                    std::to_string(r);
    return trk.rep;
}

/// Full certificate: constants, radius, and every assumption check in one
/// deterministic pass.
struct Certificate {
    std::string problem;
    double kernel_norm = 0.0;
    KernelNormSource kernel_norm_source = KernelNormSource::declared;
    double gamma = 0.0;
    double C = 0.0;
    double r = 0.0;
    bool gamma_ok = false;
    bool certified = false;  // gamma_ok and no falsified assumption
    std::vector<AssumptionReport> assumptions;
    std::vector<std::pair<std::string, double>> slacks;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
};

inline Certificate certify(const ProblemSpec& spec, const Grid& grid,
                           const std::optional<ContractionWitness>& witness,
                           CertifyOptions opt = {}) {
    Certificate cert;
    cert.problem = spec.name;
    cert.seed = opt.seed;
    cert.samples = opt.field_samples;
    cert.kernel_norm = spec.kernel_norm.value;
    cert.kernel_norm_source = spec.kernel_norm.source;

    const BallRadius ball = invariant_ball_radius(spec);
    cert.gamma = ball.gamma;
    cert.C = ball.C;
    cert.r = ball.r;
    cert.gamma_ok = ball.ok;

    cert.assumptions = check_envelopes(spec, grid, opt.field_samples, opt.seed, opt);

    if (witness) {
        cert.assumptions.push_back(check_separate_contraction(
            spec, grid, *witness, opt.pair_samples,
            ball.ok && ball.r > 0.0 ? ball.r : 1.0, opt.seed, opt));
    } else {
        AssumptionReport rep;
        rep.id = "A3";
        rep.subject = "B separate contraction";
        rep.status = CheckStatus::unverifiable;
        rep.notes = "no contraction witness declared";
        cert.assumptions.push_back(std::move(rep));
    }

    {
        AssumptionReport rep;
        rep.id = "A6";
        rep.subject = "kernel operator norm";
        rep.status = spec.kernel_norm.source == KernelNormSource::declared
                         ? CheckStatus::declared_by_user
                         : CheckStatus::verified_by_sampling;
        rep.notes = "||K|| = " + std::to_string(spec.kernel_norm.value);
        cert.assumptions.push_back(std::move(rep));
    }

    {
        AssumptionReport rep;
        rep.id = "A7";
        rep.subject = "contraction constant below one";
        rep.samples = 0;
        if (ball.ok) {
            rep.status = CheckStatus::verified_by_sampling;
            rep.notes = "arithmetic on declared constants; gamma = " + std::to_string(ball.gamma);
        } else {
            rep.status = CheckStatus::falsified;
            rep.witness = Witness{"gamma < 1", {{"gamma", ball.gamma}}, ball.gamma, 1.0, 0.0};
            rep.notes = "gamma >= 1: no invariant ball radius exists";
        }
        cert.assumptions.push_back(std::move(rep));
    }

    if (ball.ok)
        cert.assumptions.push_back(
            check_ball_invariance(spec, grid, ball.r, opt.pair_samples, opt.seed, opt));

    cert.certified = ball.ok;
    for (const auto& a : cert.assumptions)
        if (a.status == CheckStatus::falsified) cert.certified = false;

    const double h = grid.t_max() / static_cast<double>(grid.cells());
    cert.slacks = {
        {"pointwise_abs", opt.slack_abs},
        {"pointwise_rel", opt.slack_rel},
        {"operator_h_bar_sq", opt.slack_coeff * h * h},
        {"kernel_norm", spec.kernel_norm.slack},
    };
    return cert;
}

} // namespace l1fix
