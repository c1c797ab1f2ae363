#pragma once

/// Deterministic random sampling shared by the certificate checks and the
/// property tests.
///
/// std::uniform_real_distribution is not pinned across standard libraries,
/// so doubles are built directly from mt19937_64 output: identical seeds
/// give identical sample streams on every platform, which keeps reports
/// byte-for-byte reproducible.

#include <cmath>
#include <cstdint>
#include <random>

#include "l1fix/grid.hpp"
#include "l1fix/norms.hpp"

namespace l1fix {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Log-uniform on [lo, hi]; both bounds must be positive.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    /// Log-uniform magnitude with a fair random sign.
    double signed_log_uniform(double lo, double hi) {
        const double m = log_uniform(lo, hi);
        return chance(0.5) ? m : -m;
    }

    bool chance(double p) { return uniform() < p; }

    std::uint64_t bits() { return eng_(); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * n) % n; }

    /// Random element of L1: a sum of sign-flipped exponential bumps
    ///   sum_j  c_j * exp(-d_j * |t - t_j|)
    /// with random decay rates, sampled onto the grid and rescaled so the
    /// represented norm does not exceed `max_norm` (and is at least
    /// 0.05 * max_norm so the sample is never degenerate).
    GridFunction bump_function(const Grid& g, double max_norm) {
        const int bumps = 1 + static_cast<int>(index(4));
        struct Bump {
            double c, d, t0;
        };
        std::vector<Bump> bs;
        for (int j = 0; j < bumps; ++j)
            bs.push_back({signed_log_uniform(0.05, 1.0), log_uniform(0.2, 8.0),
                          uniform(0.0, 0.6 * g.t_max())});
        GridFunction x = GridFunction::sample(g, [&](double t) {
            double v = 0.0;
            for (const auto& b : bs) v += b.c * std::exp(-b.d * std::abs(t - b.t0));
            return v;
        });
        const double n = integrate_abs(x);
        if (n == 0.0) return x;
        const double target = max_norm * uniform(0.05, 1.0);
        x *= target / n;
        return x;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace l1fix
