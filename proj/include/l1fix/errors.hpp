#pragma once

#include <stdexcept>
#include <string>

namespace l1fix {

/// Invalid arguments or malformed structural input (bad grids, overlapping
/// subsets, out-of-range constants).  Thrown before any computation starts.
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A user-supplied callable produced NaN/Inf during evaluation.  The message
/// carries the offending point so the failure is reproducible.
class eval_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A half-line quantity could not be certified at the requested accuracy
/// because the integrand does not decay fast enough past the horizon.
class truncation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem-file errors: unknown keys, missing fields, constants violating
/// the admissibility constraints.  All violations are aggregated into one
/// message before throwing.
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace l1fix
