#pragma once

/// Problem files: a JSON schema over the registry kinds, a strict loader that
/// aggregates every complaint (unknown keys, missing keys, type mismatches,
/// range violations) into one error, an emitter whose output reloads to the
/// same definition, and the bundled example problems.
///
/// Schema (all blocks are objects; [opt] marks optional blocks with defaults):
///
///   name         string, nonempty
///   g, f         field: kind + kind-specific params + envelope[opt]
///   kernel       kernel: kind + params
///   kernel_norm  [opt] {mode: "estimate"} or {mode: "declared", value: V}
///   u            integrand: kind + params + envelope/modulus/gauge [opt]
///   T, Q         inner: kind + params + envelope[opt] + deviation[opt]
///   contraction  [opt] {kind:"strict", kappa} or
///                      {kind:"linear_pair", phi_slope, psi_slope}
///   numerics     [opt] {t_max, cells, grid, stretch, solve_tol, quad_rel}
///
/// envelope  = {offset: density[opt], slope: number[opt]}
/// density   = {kind, ...params}; deviation = {kind, slope, offset[opt]}
/// gauge     = {kind:"identity"} or {kind:"power", power}
///
/// Range violations cite the hypothesis they would break, e.g. a deviation
/// slope of 0 is rejected with "(A2)" because the change of variables that
/// folds |x(phi(t))| back into the norm divides by that slope.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "l1fix/certify.hpp"
#include "l1fix/errors.hpp"
#include "l1fix/fields.hpp"
#include "l1fix/grid.hpp"
#include "l1fix/operators.hpp"
#include "l1fix/registry.hpp"

namespace l1fix {

using ordered_json = nlohmann::ordered_json;

struct KernelNormDef {
    std::string mode = "estimate";  // estimate | declared
    double value = 0.0;             // declared only
};

struct ContractionDef {
    std::string kind = "strict";  // strict | linear_pair
    double kappa = 0.5;
    double phi_slope = 0.0;
    double psi_slope = 0.0;
};

struct NumericsDef {
    double t_max = 40.0;
    std::size_t cells = 4096;
    std::string grid = "stretched";  // stretched | uniform
    double stretch = 4.0;
    double solve_tol = 1e-6;
    double quad_rel = 1e-8;
};

struct ProblemDefinition {
    std::string name;
    FieldDef g, f;
    KernelDef kernel;
    KernelNormDef kernel_norm;
    IntegrandDef u;
    InnerDef T_def, Q_def;
    std::optional<ContractionDef> contraction;
    NumericsDef numerics;
};

namespace detail {

struct Issues {
    std::vector<std::string> items;

    void add(const std::string& path, const std::string& msg) {
        items.push_back(path + ": " + msg);
    }

    void raise_if_any(const std::string& origin) const {
        if (items.empty()) return;
        std::ostringstream os;
        os << "invalid problem definition (" << origin << "):";
        for (const auto& s : items) os << "\n  - " << s;
        throw input_error(os.str());
    }
};

/// Strict object access: every key must be consumed exactly once; finish()
/// reports the leftovers as unknown keys.
class ObjectReader {
  public:
    ObjectReader(const ordered_json* j, std::string path, Issues& issues)
        : j_(j), path_(std::move(path)), issues_(&issues) {
        if (j_ && !j_->is_object()) {
            issues_->add(path_, "expected an object");
            j_ = nullptr;
        }
    }

    bool present() const { return j_ != nullptr; }
    const std::string& path() const { return path_; }

    const ordered_json* child(const std::string& key, bool required = false) {
        if (!j_) return nullptr;
        seen_.insert(key);
        auto it = j_->find(key);
        if (it == j_->end()) {
            if (required) issues_->add(path_ + "." + key, "missing required key");
            return nullptr;
        }
        return &*it;
    }

    std::string str(const std::string& key, const std::string& fallback, bool required = false) {
        const ordered_json* c = child(key, required);
        if (!c) return fallback;
        if (!c->is_string()) {
            issues_->add(path_ + "." + key, "expected a string");
            return fallback;
        }
        return c->get<std::string>();
    }

    double num(const std::string& key, double fallback, bool required = false) {
        const ordered_json* c = child(key, required);
        if (!c) return fallback;
        if (!c->is_number()) {
            issues_->add(path_ + "." + key, "expected a number");
            return fallback;
        }
        return c->get<double>();
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        const ordered_json* c = child(key);
        if (!c) return fallback;
        if (!c->is_number_unsigned()) {
            issues_->add(path_ + "." + key, "expected a nonnegative integer");
            return fallback;
        }
        return c->get<std::size_t>();
    }

    void finish() {
        if (!j_) return;
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!seen_.count(it.key())) issues_->add(path_ + "." + it.key(), "unknown key");
    }

  private:
    const ordered_json* j_;
    std::string path_;
    Issues* issues_;
    std::set<std::string> seen_;
};

inline DensityDef parse_density(const ordered_json* j, const std::string& path, Issues& issues) {
    DensityDef d;
    ObjectReader r(j, path, issues);
    if (!r.present()) return d;
    d.kind = r.str("kind", d.kind, true);
    if (d.kind == "zero") {
        ;  // no parameters
    } else if (d.kind == "exponential") {
        d.amp = r.num("amp", d.amp, true);
        d.rate = r.num("rate", d.rate, true);
    } else if (d.kind == "rational_decay" || d.kind == "inverse_poly") {
        d.amp = r.num("amp", d.amp, true);
        d.shift = r.num("shift", d.shift);
        d.den_const = r.num("den_const", d.den_const, true);
        d.power = r.num("power", d.power, true);
    } else {
        issues.add(path + ".kind", "unknown density kind '" + d.kind + "'");
    }
    r.finish();
    return d;
}

inline EnvelopeDef parse_envelope(const ordered_json* j, const std::string& path, Issues& issues) {
    EnvelopeDef e;
    ObjectReader r(j, path, issues);
    if (!r.present()) return e;
    e.offset = parse_density(r.child("offset"), path + ".offset", issues);
    e.slope = r.num("slope", e.slope);
    r.finish();
    return e;
}

inline FieldDef parse_field(const ordered_json* j, const std::string& path, Issues& issues) {
    FieldDef d;
    ObjectReader r(j, path, issues);
    if (!r.present()) {
        issues.add(path, "missing required block");
        return d;
    }
    d.kind = r.str("kind", d.kind, true);
    if (d.kind == "zero" || d.kind == "square") {
        ;
    } else if (d.kind == "affine") {
        d.slope = r.num("slope", d.slope, true);
        d.source = parse_density(r.child("source", true), path + ".source", issues);
    } else if (d.kind == "log_square") {
        d.coeff = r.num("coeff", d.coeff, true);
        d.source = parse_density(r.child("source", true), path + ".source", issues);
    } else if (d.kind == "arctan_square") {
        d.coeff = r.num("coeff", d.coeff, true);
    } else {
        issues.add(path + ".kind", "unknown field kind '" + d.kind + "'");
    }
    d.envelope = parse_envelope(r.child("envelope"), path + ".envelope", issues);
    r.finish();
    return d;
}

inline KernelDef parse_kernel(const ordered_json* j, const std::string& path, Issues& issues) {
    KernelDef d;
    ObjectReader r(j, path, issues);
    if (!r.present()) {
        issues.add(path, "missing required block");
        return d;
    }
    d.kind = r.str("kind", d.kind, true);
    if (d.kind == "zero") {
        ;
    } else if (d.kind == "sum_exp") {
        d.scale = r.num("scale", d.scale, true);
        d.rate = r.num("rate", d.rate, true);
    } else if (d.kind == "product_exp") {
        d.scale = r.num("scale", d.scale, true);
        d.rate = r.num("rate", d.rate, true);
        d.rate_s = r.num("rate_s", d.rate_s);
    } else if (d.kind == "constant") {
        d.value = r.num("value", d.value, true);
    } else {
        issues.add(path + ".kind", "unknown kernel kind '" + d.kind + "'");
    }
    r.finish();
    return d;
}

inline GaugeDef parse_gauge(const ordered_json* j, const std::string& path, Issues& issues) {
    GaugeDef d;
    ObjectReader r(j, path, issues);
    if (!r.present()) return d;
    d.kind = r.str("kind", d.kind, true);
    if (d.kind == "identity") {
        ;
    } else if (d.kind == "power") {
        d.power = r.num("power", d.power, true);
    } else {
        issues.add(path + ".kind", "unknown gauge kind '" + d.kind + "'");
    }
    r.finish();
    return d;
}

inline IntegrandDef parse_integrand(const ordered_json* j, const std::string& path,
                                    Issues& issues) {
    IntegrandDef d;
    ObjectReader r(j, path, issues);
    if (!r.present()) {
        issues.add(path, "missing required block");
        return d;
    }
    d.kind = r.str("kind", d.kind, true);
    if (d.kind == "zero" || d.kind == "drift_shear") {
        ;
    } else if (d.kind == "linear") {
        d.slope = r.num("slope", d.slope, true);
    } else if (d.kind == "forced_linear") {
        d.slope = r.num("slope", d.slope, true);
        d.source = parse_density(r.child("source", true), path + ".source", issues);
    } else {
        issues.add(path + ".kind", "unknown integrand kind '" + d.kind + "'");
    }
    d.envelope = parse_envelope(r.child("envelope"), path + ".envelope", issues);
    d.modulus = parse_envelope(r.child("modulus"), path + ".modulus", issues);
    d.gauge = parse_gauge(r.child("gauge"), path + ".gauge", issues);
    r.finish();
    return d;
}

inline DeviationDef parse_deviation(const ordered_json* j, const std::string& path,
                                    Issues& issues) {
    DeviationDef d;
    ObjectReader r(j, path, issues);
    if (!r.present()) return d;
    d.kind = r.str("kind", d.kind, true);
    if (d.kind == "linear") {
        d.slope = r.num("slope", d.slope, true);
    } else if (d.kind == "affine") {
        d.slope = r.num("slope", d.slope, true);
        d.offset = r.num("offset", d.offset);
    } else {
        issues.add(path + ".kind", "unknown deviation kind '" + d.kind + "'");
    }
    r.finish();
    return d;
}

inline InnerDef parse_inner(const ordered_json* j, const std::string& path, Issues& issues) {
    InnerDef d;
    ObjectReader r(j, path, issues);
    if (!r.present()) {
        issues.add(path, "missing required block");
        return d;
    }
    d.kind = r.str("kind", d.kind, true);
    if (d.kind == "identity" || d.kind == "saturated_memory") {
        ;
    } else if (d.kind == "scaled_composition") {
        d.factor = r.num("factor", d.factor, true);
        d.dilation = r.num("dilation", d.dilation, true);
    } else if (d.kind == "saturated_dilation_average") {
        d.dilation = r.num("dilation", d.dilation, true);
    } else {
        issues.add(path + ".kind", "unknown inner operator kind '" + d.kind + "'");
    }
    d.envelope = parse_envelope(r.child("envelope"), path + ".envelope", issues);
    d.deviation = parse_deviation(r.child("deviation"), path + ".deviation", issues);
    r.finish();
    return d;
}

inline KernelNormDef parse_kernel_norm(const ordered_json* j, const std::string& path,
                                       Issues& issues) {
    KernelNormDef d;
    ObjectReader r(j, path, issues);
    if (!r.present()) return d;
    d.mode = r.str("mode", d.mode, true);
    if (d.mode == "declared") {
        d.value = r.num("value", d.value, true);
    } else if (d.mode != "estimate") {
        issues.add(path + ".mode", "must be 'estimate' or 'declared'");
    }
    r.finish();
    return d;
}

inline std::optional<ContractionDef> parse_contraction(const ordered_json* j,
                                                       const std::string& path, Issues& issues) {
    if (!j) return std::nullopt;
    ContractionDef d;
    ObjectReader r(j, path, issues);
    d.kind = r.str("kind", d.kind, true);
    if (d.kind == "strict") {
        d.kappa = r.num("kappa", d.kappa, true);
    } else if (d.kind == "linear_pair") {
        d.phi_slope = r.num("phi_slope", d.phi_slope, true);
        d.psi_slope = r.num("psi_slope", d.psi_slope, true);
    } else {
        issues.add(path + ".kind", "unknown contraction kind '" + d.kind + "'");
    }
    r.finish();
    return d;
}

inline NumericsDef parse_numerics(const ordered_json* j, const std::string& path, Issues& issues) {
    NumericsDef d;
    ObjectReader r(j, path, issues);
    if (!r.present()) return d;
    d.t_max = r.num("t_max", d.t_max);
    d.cells = r.count("cells", d.cells);
    d.grid = r.str("grid", d.grid);
    d.stretch = r.num("stretch", d.stretch);
    d.solve_tol = r.num("solve_tol", d.solve_tol);
    d.quad_rel = r.num("quad_rel", d.quad_rel);
    r.finish();
    return d;
}

// ---- range validation (shared by the loader and programmatic definitions) --

inline void validate_density(const DensityDef& d, const std::string& path, Issues& issues) {
    static const std::set<std::string> kinds = {"zero", "exponential", "rational_decay",
                                                "inverse_poly"};
    if (!kinds.count(d.kind)) {
        issues.add(path + ".kind", "unknown density kind '" + d.kind + "'");
        return;
    }
    if (d.kind == "zero") return;
    if (!(d.amp >= 0.0)) issues.add(path + ".amp", "must be nonnegative (decay profiles model nonnegative envelopes)");
    if (d.kind == "exponential") {
        if (!(d.rate > 0.0))
            issues.add(path + ".rate", "must be positive so the profile is integrable on [0, inf)");
        return;
    }
    if (!(d.shift >= 0.0)) issues.add(path + ".shift", "must be nonnegative");
    if (!(d.den_const > 0.0)) issues.add(path + ".den_const", "must be positive");
    const double min_power = d.kind == "rational_decay" ? 2.0 : 1.0;
    if (!(d.power > min_power))
        issues.add(path + ".power", "must exceed " + std::to_string(min_power) +
                                        " so the profile is integrable on [0, inf)");
}

inline void validate_envelope(const EnvelopeDef& e, const std::string& path,
                              const std::string& hypothesis, Issues& issues) {
    validate_density(e.offset, path + ".offset", issues);
    if (!(e.slope >= 0.0)) issues.add(path + ".slope", "must be nonnegative " + hypothesis);
}

inline void validate_definition(const ProblemDefinition& def, Issues& issues) {
    if (def.name.empty()) issues.add("name", "must be a nonempty string");

    static const std::set<std::string> field_kinds = {"zero", "affine", "log_square",
                                                      "arctan_square", "square"};
    static const std::set<std::string> kernel_kinds = {"zero", "sum_exp", "product_exp",
                                                       "constant"};
    static const std::set<std::string> integrand_kinds = {"zero", "linear", "forced_linear",
                                                          "drift_shear"};
    static const std::set<std::string> inner_kinds = {"identity", "scaled_composition",
                                                      "saturated_dilation_average",
                                                      "saturated_memory"};
    static const std::set<std::string> deviation_kinds = {"linear", "affine"};
    static const std::set<std::string> gauge_kinds = {"identity", "power"};

    const auto check_field = [&](const FieldDef& f, const std::string& path) {
        if (!field_kinds.count(f.kind)) issues.add(path + ".kind", "unknown field kind");
        if (f.kind == "affine" || f.kind == "log_square")
            validate_density(f.source, path + ".source", issues);
        validate_envelope(f.envelope, path + ".envelope", "(A1)", issues);
    };
    check_field(def.g, "g");
    check_field(def.f, "f");

    if (!kernel_kinds.count(def.kernel.kind)) issues.add("kernel.kind", "unknown kernel kind");

    if (def.kernel_norm.mode != "estimate" && def.kernel_norm.mode != "declared")
        issues.add("kernel_norm.mode", "must be 'estimate' or 'declared'");
    else if (def.kernel_norm.mode == "declared" && !(def.kernel_norm.value >= 0.0))
        issues.add("kernel_norm.value", "must be nonnegative (A6)");

    if (!integrand_kinds.count(def.u.kind)) issues.add("u.kind", "unknown integrand kind");
    if (def.u.kind == "forced_linear") validate_density(def.u.source, "u.source", issues);
    validate_envelope(def.u.envelope, "u.envelope", "(A5)", issues);
    validate_envelope(def.u.modulus, "u.modulus", "(A5)", issues);
    if (!gauge_kinds.count(def.u.gauge.kind)) issues.add("u.gauge.kind", "unknown gauge kind");
    if (def.u.gauge.kind == "power" && !(def.u.gauge.power > 0.0))
        issues.add("u.gauge.power", "must be positive (A5)");

    const auto check_inner = [&](const InnerDef& s, const std::string& path) {
        if (!inner_kinds.count(s.kind)) issues.add(path + ".kind", "unknown inner operator kind");
        if ((s.kind == "scaled_composition" || s.kind == "saturated_dilation_average") &&
            !(s.dilation > 0.0))
            issues.add(path + ".dilation", "must be positive (A2)");
        validate_envelope(s.envelope, path + ".envelope", "(A2)", issues);
        if (!deviation_kinds.count(s.deviation.kind))
            issues.add(path + ".deviation.kind", "unknown deviation kind");
        if (!(s.deviation.slope > 0.0))
            issues.add(path + ".deviation.slope", "must be strictly positive (A2)");
        if (s.deviation.kind == "affine" && !(s.deviation.offset >= 0.0))
            issues.add(path + ".deviation.offset",
                       "must be nonnegative so the time change maps [0, inf) into itself (A2)");
    };
    check_inner(def.T_def, "T");
    check_inner(def.Q_def, "Q");

    if (def.contraction) {
        const ContractionDef& c = *def.contraction;
        if (c.kind == "strict") {
            if (!(c.kappa > 0.0 && c.kappa < 1.0))
                issues.add("contraction.kappa", "must lie in (0, 1) (A3)");
        } else if (c.kind == "linear_pair") {
            if (!(c.phi_slope >= 0.0))
                issues.add("contraction.phi_slope", "must be nonnegative (A3)");
            if (!(c.psi_slope >= 0.0))
                issues.add("contraction.psi_slope", "must be nonnegative (A3)");
            if (c.phi_slope + c.psi_slope > 1.0)
                issues.add("contraction",
                           "phi_slope + psi_slope must not exceed 1 (A3)");
        } else {
            issues.add("contraction.kind", "unknown contraction kind");
        }
    }

    const NumericsDef& n = def.numerics;
    if (!(n.t_max > 0.0)) issues.add("numerics.t_max", "must be positive");
    if (n.cells < 2 || n.cells > (1u << 20))
        issues.add("numerics.cells", "must lie between 2 and 1048576");
    if (n.grid != "stretched" && n.grid != "uniform")
        issues.add("numerics.grid", "must be 'stretched' or 'uniform'");
    if (!(n.stretch > 0.0)) issues.add("numerics.stretch", "must be positive");
    if (!(n.solve_tol > 0.0)) issues.add("numerics.solve_tol", "must be positive");
    if (!(n.quad_rel > 0.0)) issues.add("numerics.quad_rel", "must be positive");
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace detail

/// Parse and validate a problem definition from JSON text.  `origin` labels
/// error messages (typically the file path).  Structural complaints are
/// aggregated; malformed JSON raises parse_error with line/column.
inline ProblemDefinition parse_problem_text(const std::string& text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw parse_error(origin + ": malformed JSON at line " + std::to_string(line) +
                          ", column " + std::to_string(col) + ": " + e.what());
    }

    detail::Issues issues;
    ProblemDefinition def;
    detail::ObjectReader r(&j, "$", issues);
    def.name = r.str("name", "", true);
    def.g = detail::parse_field(r.child("g", true), "$.g", issues);
    def.f = detail::parse_field(r.child("f", true), "$.f", issues);
    def.kernel = detail::parse_kernel(r.child("kernel", true), "$.kernel", issues);
    def.kernel_norm = detail::parse_kernel_norm(r.child("kernel_norm"), "$.kernel_norm", issues);
    def.u = detail::parse_integrand(r.child("u", true), "$.u", issues);
    def.T_def = detail::parse_inner(r.child("T", true), "$.T", issues);
    def.Q_def = detail::parse_inner(r.child("Q", true), "$.Q", issues);
    def.contraction = detail::parse_contraction(r.child("contraction"), "$.contraction", issues);
    def.numerics = detail::parse_numerics(r.child("numerics"), "$.numerics", issues);
    r.finish();

    if (issues.items.empty()) detail::validate_definition(def, issues);
    issues.raise_if_any(origin);
    return def;
}

/// Load a problem definition from a JSON file.
inline ProblemDefinition load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open problem file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem_text(buf.str(), path);
}

namespace detail {

inline ordered_json emit_density(const DensityDef& d) {
    ordered_json j;
    j["kind"] = d.kind;
    if (d.kind == "exponential") {
        j["amp"] = d.amp;
        j["rate"] = d.rate;
    } else if (d.kind == "rational_decay" || d.kind == "inverse_poly") {
        j["amp"] = d.amp;
        j["shift"] = d.shift;
        j["den_const"] = d.den_const;
        j["power"] = d.power;
    }
    return j;
}

inline ordered_json emit_envelope(const EnvelopeDef& e) {
    ordered_json j;
    j["offset"] = emit_density(e.offset);
    j["slope"] = e.slope;
    return j;
}

inline ordered_json emit_field(const FieldDef& d) {
    ordered_json j;
    j["kind"] = d.kind;
    if (d.kind == "affine") {
        j["slope"] = d.slope;
        j["source"] = emit_density(d.source);
    } else if (d.kind == "log_square") {
        j["coeff"] = d.coeff;
        j["source"] = emit_density(d.source);
    } else if (d.kind == "arctan_square") {
        j["coeff"] = d.coeff;
    }
    j["envelope"] = emit_envelope(d.envelope);
    return j;
}

inline ordered_json emit_kernel(const KernelDef& d) {
    ordered_json j;
    j["kind"] = d.kind;
    if (d.kind == "sum_exp") {
        j["scale"] = d.scale;
        j["rate"] = d.rate;
    } else if (d.kind == "product_exp") {
        j["scale"] = d.scale;
        j["rate"] = d.rate;
        j["rate_s"] = d.rate_s;
    } else if (d.kind == "constant") {
        j["value"] = d.value;
    }
    return j;
}

inline ordered_json emit_integrand(const IntegrandDef& d) {
    ordered_json j;
    j["kind"] = d.kind;
    if (d.kind == "linear") {
        j["slope"] = d.slope;
    } else if (d.kind == "forced_linear") {
        j["slope"] = d.slope;
        j["source"] = emit_density(d.source);
    }
    j["envelope"] = emit_envelope(d.envelope);
    j["modulus"] = emit_envelope(d.modulus);
    ordered_json gauge;
    gauge["kind"] = d.gauge.kind;
    if (d.gauge.kind == "power") gauge["power"] = d.gauge.power;
    j["gauge"] = gauge;
    return j;
}

inline ordered_json emit_inner(const InnerDef& d) {
    ordered_json j;
    j["kind"] = d.kind;
    if (d.kind == "scaled_composition") {
        j["factor"] = d.factor;
        j["dilation"] = d.dilation;
    } else if (d.kind == "saturated_dilation_average") {
        j["dilation"] = d.dilation;
    }
    j["envelope"] = emit_envelope(d.envelope);
    ordered_json dev;
    dev["kind"] = d.deviation.kind;
    dev["slope"] = d.deviation.slope;
    if (d.deviation.kind == "affine") dev["offset"] = d.deviation.offset;
    j["deviation"] = dev;
    return j;
}

} // namespace detail

/// Serialize a definition so that parse_problem_text(emit(def).dump())
/// reproduces it field for field.
inline ordered_json emit(const ProblemDefinition& def) {
    ordered_json j;
    j["name"] = def.name;
    j["g"] = detail::emit_field(def.g);
    j["f"] = detail::emit_field(def.f);
    j["kernel"] = detail::emit_kernel(def.kernel);
    ordered_json kn;
    kn["mode"] = def.kernel_norm.mode;
    if (def.kernel_norm.mode == "declared") kn["value"] = def.kernel_norm.value;
    j["kernel_norm"] = kn;
    j["u"] = detail::emit_integrand(def.u);
    j["T"] = detail::emit_inner(def.T_def);
    j["Q"] = detail::emit_inner(def.Q_def);
    if (def.contraction) {
        ordered_json c;
        c["kind"] = def.contraction->kind;
        if (def.contraction->kind == "strict") {
            c["kappa"] = def.contraction->kappa;
        } else {
            c["phi_slope"] = def.contraction->phi_slope;
            c["psi_slope"] = def.contraction->psi_slope;
        }
        j["contraction"] = c;
    }
    ordered_json n;
    n["t_max"] = def.numerics.t_max;
    n["cells"] = def.numerics.cells;
    n["grid"] = def.numerics.grid;
    n["stretch"] = def.numerics.stretch;
    n["solve_tol"] = def.numerics.solve_tol;
    n["quad_rel"] = def.numerics.quad_rel;
    j["numerics"] = n;
    return j;
}

/// A definition instantiated into callables plus its working grid.
struct BuiltProblem {
    ProblemSpec spec;
    Grid grid;
    std::optional<ContractionWitness> witness;
    NumericsDef numerics;
};

/// Instantiate a validated definition.  When the kernel norm is left to be
/// estimated this runs the numeric estimator (and therefore can raise
/// truncation_error for kernels without enough decay).
inline BuiltProblem build_problem(const ProblemDefinition& def) {
    detail::Issues issues;
    detail::validate_definition(def, issues);
    issues.raise_if_any(def.name.empty() ? "<unnamed>" : def.name);

    const NumericsDef& n = def.numerics;
    Grid grid = n.grid == "stretched" ? Grid::stretched(n.t_max, n.cells, n.stretch)
                                      : Grid::uniform(n.t_max, n.cells);

    ProblemSpec spec;
    spec.name = def.name;
    spec.g = make_field(def.g, "g");
    spec.f = make_field(def.f, "f");
    spec.k = make_kernel(def.kernel);
    spec.u = make_integrand(def.u);
    spec.T_op = make_inner(def.T_def, "T");
    spec.Q_op = make_inner(def.Q_def, "Q");

    if (def.kernel_norm.mode == "declared") {
        spec.kernel_norm = KernelNormInfo{def.kernel_norm.value, KernelNormSource::declared, 0.0};
    } else {
        KernelNormOptions opt;
        opt.t_max = n.t_max;
        spec.kernel_norm = estimate_kernel_norm(spec.k, opt);
    }

    std::optional<ContractionWitness> witness;
    if (def.contraction) {
        if (def.contraction->kind == "strict") {
            witness = ContractionWitness::strict(def.contraction->kappa);
        } else {
            ContractionWitness w;
            const double p = def.contraction->phi_slope, q = def.contraction->psi_slope;
            w.phi_c = [p](double rho) { return p * rho; };
            w.psi_c = [q](double rho) { return q * rho; };
            witness = w;
        }
    }
    return BuiltProblem{std::move(spec), std::move(grid), std::move(witness), n};
}

// ---- bundled problems -------------------------------------------------------

namespace detail {

inline DensityDef density_zero() { return DensityDef{"zero"}; }

inline DensityDef density_exp(double amp, double rate) {
    DensityDef d;
    d.kind = "exponential";
    d.amp = amp;
    d.rate = rate;
    return d;
}

inline DensityDef density_rational(double amp, double shift, double den_const, double power) {
    DensityDef d;
    d.kind = "rational_decay";
    d.amp = amp;
    d.shift = shift;
    d.den_const = den_const;
    d.power = power;
    return d;
}

inline DensityDef density_inverse(double amp, double shift, double den_const, double power) {
    DensityDef d;
    d.kind = "inverse_poly";
    d.amp = amp;
    d.shift = shift;
    d.den_const = den_const;
    d.power = power;
    return d;
}

inline InnerDef inner_identity() {
    InnerDef d;
    d.kind = "identity";
    d.envelope = EnvelopeDef{density_zero(), 1.0};
    d.deviation = DeviationDef{"linear", 1.0, 0.0};
    return d;
}

} // namespace detail

/// Kitchen-sink example: logarithmic outer field with a dilated saturating
/// inner operator, arctan outer field over a Volterra term with the
/// drift_shear integrand, kernel (t+s)e^{-t} with declared norm 2/sqrt(e),
/// and a strict 1/2 contraction witness for the g-part.
inline ProblemDefinition taoudi_example_definition() {
    ProblemDefinition def;
    def.name = "taoudi_example";

    def.g.kind = "log_square";
    def.g.coeff = 0.25;
    def.g.source = detail::density_rational(1.0, 0.0, 1.0, 3.0);
    def.g.envelope = EnvelopeDef{detail::density_rational(1.0, 0.0, 1.0, 3.0), 0.25};

    def.f.kind = "arctan_square";
    def.f.coeff = 0.5;
    def.f.envelope = EnvelopeDef{detail::density_zero(), 1.0};

    def.kernel.kind = "sum_exp";
    def.kernel.scale = 1.0;
    def.kernel.rate = 1.0;
    def.kernel_norm.mode = "declared";
    def.kernel_norm.value = 2.0 / std::sqrt(std::exp(1.0));

    def.u.kind = "drift_shear";
    def.u.envelope = EnvelopeDef{detail::density_rational(1.0, 1.0, 2.0, 3.0), 0.375};
    def.u.modulus =
        EnvelopeDef{detail::density_inverse(2.0, 1.0, 2.0, 3.0), (1.0 + std::sqrt(3.0)) / 4.0};
    def.u.gauge.kind = "identity";

    def.T_def.kind = "saturated_dilation_average";
    def.T_def.dilation = 2.0;
    def.T_def.envelope = EnvelopeDef{detail::density_exp(1.0, 1.0), 1.0};
    def.T_def.deviation = DeviationDef{"linear", 2.0, 0.0};

    def.Q_def.kind = "saturated_memory";
    def.Q_def.envelope = EnvelopeDef{detail::density_zero(), 1.0};
    def.Q_def.deviation = DeviationDef{"linear", 1.0, 0.0};

    def.contraction = ContractionDef{"strict", 0.5, 0.0, 0.0};
    return def;
}

/// x = e^{-t}: the right-hand side ignores x entirely, so the solver must
/// land on the forcing term in a single step.
inline ProblemDefinition forced_fixed_point_definition() {
    ProblemDefinition def;
    def.name = "forced_fixed_point";
    def.g.kind = "affine";
    def.g.slope = 0.0;
    def.g.source = detail::density_exp(1.0, 1.0);
    def.g.envelope = EnvelopeDef{detail::density_exp(1.0, 1.0), 0.0};
    def.f.kind = "zero";
    def.kernel.kind = "zero";
    def.kernel_norm.mode = "declared";
    def.kernel_norm.value = 0.0;
    def.u.kind = "zero";
    def.T_def = detail::inner_identity();
    def.Q_def = detail::inner_identity();
    def.contraction = ContractionDef{"strict", 0.5, 0.0, 0.0};
    return def;
}

/// x = x/2 + e^{-t}, fixed point 2 e^{-t}; pure B-iteration with exact
/// geometric rate 1/2, which makes convergence and rate assertions sharp.
inline ProblemDefinition linear_contraction_definition() {
    ProblemDefinition def = forced_fixed_point_definition();
    def.name = "linear_contraction";
    def.g.slope = 0.5;
    def.g.envelope.slope = 0.5;
    return def;
}

/// Everything identically zero; gamma = 0, C = 0, r = 0.
inline ProblemDefinition zero_problem_definition() {
    ProblemDefinition def;
    def.name = "zero_problem";
    def.g.kind = "zero";
    def.f.kind = "zero";
    def.kernel.kind = "zero";
    def.kernel_norm.mode = "declared";
    def.kernel_norm.value = 0.0;
    def.u.kind = "zero";
    def.T_def = detail::inner_identity();
    def.Q_def = detail::inner_identity();
    def.contraction = ContractionDef{"strict", 0.5, 0.0, 0.0};
    return def;
}

/// Deliberately broken declarations: f = x^2 against a claimed linear
/// envelope (falsifiable by sampling) and a kernel whose true norm pushes
/// gamma to 2.  Exercises the failure paths end to end.
inline ProblemDefinition overdeclared_example_definition() {
    ProblemDefinition def;
    def.name = "overdeclared_example";
    def.g.kind = "zero";
    def.f.kind = "square";
    def.f.envelope = EnvelopeDef{detail::density_zero(), 1.0};
    def.kernel.kind = "product_exp";
    def.kernel.scale = 2.0;
    def.kernel.rate = 1.0;
    def.kernel.rate_s = 1.0;
    def.kernel_norm.mode = "estimate";
    def.u.kind = "linear";
    def.u.slope = 1.0;
    def.u.envelope = EnvelopeDef{detail::density_zero(), 1.0};
    def.T_def = detail::inner_identity();
    def.Q_def = detail::inner_identity();
    def.contraction = ContractionDef{"strict", 0.5, 0.0, 0.0};
    return def;
}

inline const std::vector<std::string>& builtin_problem_names() {
    static const std::vector<std::string> names = {
        "taoudi_example", "forced_fixed_point", "linear_contraction", "zero_problem",
        "overdeclared_example"};
    return names;
}

inline ProblemDefinition builtin_problem(const std::string& name) {
    if (name == "taoudi_example") return taoudi_example_definition();
    if (name == "forced_fixed_point") return forced_fixed_point_definition();
    if (name == "linear_contraction") return linear_contraction_definition();
    if (name == "zero_problem") return zero_problem_definition();
    if (name == "overdeclared_example") return overdeclared_example_definition();
    throw input_error("unknown builtin problem '" + name + "'");
}

/// CLI argument resolution: an exact builtin name wins, anything else is
/// treated as a file path.
inline ProblemDefinition resolve_problem(const std::string& arg) {
    for (const auto& n : builtin_problem_names())
        if (arg == n) return builtin_problem(arg);
    if (!std::filesystem::exists(arg))
        throw input_error("'" + arg + "' is neither a builtin problem (" +
                          [] {
                              std::string s;
                              for (const auto& n : builtin_problem_names()) {
                                  if (!s.empty()) s += ", ";
                                  s += n;
                              }
                              return s;
                          }() +
                          ") nor an existing file");
    return load_problem(arg);
}

} // namespace l1fix
