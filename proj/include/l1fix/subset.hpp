#pragma once

/// Finite unions of closed intervals in [0, +inf), used as the measurable
/// sets D over which partial L1 masses are taken.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "l1fix/errors.hpp"

namespace l1fix {

class MeasurableSubset {
public:
    using Interval = std::pair<double, double>;

    MeasurableSubset() = default;

    /// Intervals must have positive length and pairwise-disjoint interiors;
    /// they are sorted on construction.  Touching endpoints are allowed
    /// (the overlap has measure zero).
    static MeasurableSubset from_intervals(std::vector<Interval> intervals) {
        for (auto& [a, b] : intervals) {
            if (!(a >= 0.0)) throw input_error("subset interval starts below 0");
            if (!(b > a)) throw input_error("subset interval needs positive length");
        }
        std::sort(intervals.begin(), intervals.end());
        for (std::size_t i = 0; i + 1 < intervals.size(); ++i)
            if (intervals[i].second > intervals[i + 1].first)
                throw input_error("subset intervals overlap near t = " +
                                  std::to_string(intervals[i + 1].first));
        MeasurableSubset s;
        s.intervals_ = std::move(intervals);
        return s;
    }

    static MeasurableSubset interval(double a, double b) {
        return from_intervals({{a, b}});
    }

    const std::vector<Interval>& intervals() const { return intervals_; }

    double measure() const {
        double m = 0.0;
        for (const auto& [a, b] : intervals_) m += b - a;
        return m;
    }

    bool empty() const { return intervals_.empty(); }

    /// Image under a strictly increasing map (monotone maps send interval
    /// unions to interval unions).
    template <class F>
    MeasurableSubset map_through(F&& phi) const {
        std::vector<Interval> out;
        out.reserve(intervals_.size());
        for (const auto& [a, b] : intervals_) out.emplace_back(phi(a), phi(b));
        return from_intervals(std::move(out));
    }

private:
    std::vector<Interval> intervals_;
};

} // namespace l1fix
