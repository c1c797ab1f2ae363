#pragma once

/// Report envelope shared by the CLI subcommands.  Every run produces
/// {kind, provenance, payload}; provenance pins the library version, the
/// seed, and a hash of the problem definition plus run configuration so two
/// reports are byte-identical iff they describe the same run.  Reports carry
/// no timestamps for exactly that reason.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "l1fix/certify.hpp"

namespace l1fix {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* library_version = "0.1.0";

/// FNV-1a, 64-bit, rendered as fixed-width hex.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

struct Provenance {
    std::string version = library_version;
    std::uint64_t seed = 0;
    std::string config_hash;

    ordered_json to_json() const {
        ordered_json j;
        j["version"] = version;
        j["seed"] = seed;
        j["config_hash"] = config_hash;
        return j;
    }
};

struct Report {
    std::string kind;
    Provenance provenance;
    ordered_json payload;

    ordered_json to_json() const {
        ordered_json j;
        j["kind"] = kind;
        j["provenance"] = provenance.to_json();
        j["payload"] = payload;
        return j;
    }

    std::string dump() const { return to_json().dump(2) + "\n"; }
};

namespace detail {

inline ordered_json witness_json(const Witness& w) {
    ordered_json j;
    j["inequality"] = w.inequality;
    ordered_json pt;
    for (const auto& [k, v] : w.point) pt[k] = v;
    j["point"] = pt;
    j["lhs"] = w.lhs;
    j["rhs"] = w.rhs;
    j["slack"] = w.slack;
    return j;
}

inline ordered_json assumption_json(const AssumptionReport& a) {
    ordered_json j;
    j["id"] = a.id;
    j["subject"] = a.subject;
    j["status"] = to_string(a.status);
    j["samples"] = a.samples;
    j["max_margin"] = a.max_margin;
    if (a.witness) j["witness"] = witness_json(*a.witness);
    if (!a.notes.empty()) j["notes"] = a.notes;
    return j;
}

} // namespace detail

/// Full certificate as JSON (used by the certify subcommand and by tests
/// asserting reproducibility).
inline ordered_json certificate_json(const Certificate& cert) {
    ordered_json j;
    j["problem"] = cert.problem;
    ordered_json kn;
    kn["value"] = cert.kernel_norm;
    kn["source"] = cert.kernel_norm_source == KernelNormSource::declared ? "declared" : "estimated";
    j["kernel_norm"] = kn;
    j["gamma"] = cert.gamma;
    j["C"] = cert.C;
    j["r"] = cert.r;
    j["gamma_ok"] = cert.gamma_ok;
    j["certified"] = cert.certified;
    ordered_json as = ordered_json::array();
    for (const auto& a : cert.assumptions) as.push_back(detail::assumption_json(a));
    j["assumptions"] = as;
    ordered_json sl;
    for (const auto& [k, v] : cert.slacks) sl[k] = v;
    j["slacks"] = sl;
    return j;
}

} // namespace l1fix
