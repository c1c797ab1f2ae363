#pragma once

/// End-to-end runs behind the CLI subcommands: certify, solve, measure.
/// Each takes a problem definition plus run options and returns a Report.
/// All numeric work happens in the library; this layer only composes it and
/// shapes the JSON.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <utility>

#include "l1fix/problem.hpp"
#include "l1fix/report.hpp"
#include "l1fix/solver.hpp"
#include "l1fix/wkmeasure.hpp"

namespace l1fix {

namespace detail {

inline std::string config_digest(const ProblemDefinition& def, const std::string& kind,
                                 const std::string& params) {
    return fnv1a_hex(emit(def).dump() + "|" + kind + "|" + params);
}

} // namespace detail

/// Certify a problem: envelope sampling, contraction witness check, kernel
/// norm, gamma, and the invariant-ball radius.  When the file declares the
/// kernel norm the numeric estimate is still run and reported side by side;
/// an estimator failure (kernel without enough decay) is recorded as text
/// rather than aborting, since the declared value is what the certificate
/// rests on.
inline Report run_certify(const ProblemDefinition& def, std::uint64_t seed,
                          std::size_t samples) {
    BuiltProblem built = build_problem(def);

    CertifyOptions opt;
    opt.seed = seed;
    opt.field_samples = samples;
    Certificate cert = certify(built.spec, built.grid, built.witness, opt);

    Report rep;
    rep.kind = "certificate";
    rep.provenance.seed = seed;
    rep.provenance.config_hash = detail::config_digest(
        def, "certify", std::to_string(seed) + "," + std::to_string(samples));
    rep.payload = certificate_json(cert);

    if (def.kernel_norm.mode == "declared") {
        ordered_json cmp;
        cmp["declared"] = def.kernel_norm.value;
        try {
            KernelNormOptions kopt;
            kopt.t_max = def.numerics.t_max;
            const KernelNormInfo est = estimate_kernel_norm(built.spec.k, kopt);
            cmp["estimated"] = est.value;
            cmp["difference"] = est.value - def.kernel_norm.value;
            cmp["estimate_slack"] = est.slack;
        } catch (const truncation_error& e) {
            cmp["estimate_error"] = e.what();
        }
        rep.payload["kernel_norm"]["declared_vs_estimated"] = cmp;
    }
    return rep;
}

struct SolveRunOptions {
    Scheme scheme = Scheme::picard;
    std::optional<double> tol;  // default: numerics.solve_tol from the problem
    std::size_t max_iters = 200;
    double damping = 1.0;
    std::string table_path;  // when nonempty, write "t <TAB> x" rows
};

/// Solve a problem from the zero iterate and report the run trace together
/// with the certificate-level constants (gamma, C, r).  gamma >= 1 downgrades
/// the run to "no guarantee" but the iteration still executes; failure to
/// converge is data, not an error.
inline Report run_solve(const ProblemDefinition& def, const SolveRunOptions& ropt) {
    BuiltProblem built = build_problem(def);
    const BallRadius ball = invariant_ball_radius(built.spec);

    SolveConfig cfg;
    cfg.scheme = ropt.scheme;
    cfg.tol = ropt.tol.value_or(def.numerics.solve_tol);
    cfg.max_iters = ropt.max_iters;
    cfg.damping = ropt.damping;

    SolveReport sol = solve(built.spec, GridFunction::zero(built.grid), cfg);

    Report rep;
    rep.kind = "solve";
    rep.provenance.seed = 0;
    rep.provenance.config_hash = detail::config_digest(
        def, "solve",
        std::string(to_string(ropt.scheme)) + "," + std::to_string(cfg.tol) + "," +
            std::to_string(cfg.max_iters) + "," + std::to_string(cfg.damping));

    ordered_json& p = rep.payload;
    p["problem"] = def.name;
    p["scheme"] = to_string(ropt.scheme);
    p["tol"] = cfg.tol;
    p["max_iters"] = cfg.max_iters;
    p["status"] = to_string(sol.status);
    p["iterations"] = sol.residual_history.empty() ? 0 : sol.residual_history.size() - 1;
    p["final_residual"] = sol.final_residual;
    p["final_norm"] = sol.final_norm;
    if (sol.refinement_residual) p["refinement_residual"] = *sol.refinement_residual;
    p["residual_history"] = sol.residual_history;
    if (!sol.inner_iterations.empty()) p["inner_iterations"] = sol.inner_iterations;
    p["damping_final"] = sol.damping_final;
    p["halvings"] = sol.halvings;
    if (!sol.diagnostics.empty()) p["diagnostics"] = sol.diagnostics;
    ordered_json bj;
    bj["gamma"] = ball.gamma;
    bj["C"] = ball.C;
    bj["r"] = ball.r;
    bj["gamma_ok"] = ball.ok;
    p["ball"] = bj;
    if (!ball.ok)
        p["warning"] =
            "gamma >= 1: no contraction guarantee; the iteration ran anyway and its status is "
            "reported as observed";

    if (!ropt.table_path.empty()) {
        std::ofstream out(ropt.table_path);
        if (!out) throw input_error("cannot open table file '" + ropt.table_path + "'");
        out.precision(17);
        const GridFunction& x = sol.final_iterate;
        for (std::size_t i = 0; i < x.node_count(); ++i)
            out << x.grid().node(i) << "\t" << x.value(i) << "\n";
        p["table_path"] = ropt.table_path;
    }
    return rep;
}

namespace detail {

inline ordered_json measure_json(const MeasureEstimate& m) {
    ordered_json j;
    j["c_hat"] = m.c_hat;
    j["d_hat"] = m.d_hat;
    j["mu_hat"] = m.mu_hat;
    j["c_per_eps"] = m.c_per_eps;
    j["d_per_tau"] = m.d_per_tau;
    j["c_stabilized"] = m.c_stabilized;
    j["d_stabilized"] = m.d_stabilized;
    return j;
}

} // namespace detail

/// Build a named test ensemble, estimate its noncompactness measure, push it
/// through x -> Ax + Bx, and check the mu-contraction inequality with the
/// finite-schedule slack.  Kinds: concentrating | escaping | random-in-ball.
inline Report run_measure(const ProblemDefinition& def, const std::string& kind,
                          std::size_t size, std::uint64_t seed,
                          const std::optional<Schedules>& schedules = std::nullopt) {
    BuiltProblem built = build_problem(def);
    const BallRadius ball = invariant_ball_radius(built.spec);
    const double radius = ball.ok && ball.r > 0.0 ? ball.r : 1.0;
    const double t_max = built.grid.t_max();

    Ensemble ens;
    if (kind == "concentrating") {
        ens = scale_to_norm(concentrating_ensemble(size, t_max), radius);
    } else if (kind == "escaping") {
        ens = scale_to_norm(escaping_ensemble(size, t_max), radius);
    } else if (kind == "random-in-ball") {
        ens = random_ball_ensemble(size, radius, built.grid, seed);
    } else {
        throw input_error("unknown ensemble kind '" + kind +
                          "' (expected concentrating, escaping, or random-in-ball)");
    }

    const Schedules sch = schedules.value_or(Schedules::defaults(t_max));
    MuContractionOptions mopt;
    mopt.eval_grid = built.grid;
    mopt.cert.seed = seed;
    MuContractionReport mu = check_mu_contraction(built.spec, ens, sch, mopt);

    Report rep;
    rep.kind = "measure";
    rep.provenance.seed = seed;
    rep.provenance.config_hash =
        detail::config_digest(def, "measure", kind + "," + std::to_string(size));

    ordered_json& p = rep.payload;
    p["problem"] = def.name;
    p["ensemble"] = kind;
    p["size"] = size;
    p["radius"] = radius;
    p["eps_schedule"] = sch.eps;
    p["tau_schedule"] = sch.tau;
    p["input"] = detail::measure_json(mu.input);
    p["image"] = detail::measure_json(mu.image);
    p["gamma"] = mu.gamma;
    p["slack"] = mu.slack;
    p["lhs"] = mu.lhs;
    p["rhs"] = mu.rhs;
    p["pass"] = mu.pass;
    if (mu.input.mu_hat > 0.0) p["ratio"] = mu.image.mu_hat / mu.input.mu_hat;
    return rep;
}

} // namespace l1fix
