#pragma once

/// Convenience umbrella: the whole library in one include.

#include "l1fix/certify.hpp"
#include "l1fix/density.hpp"
#include "l1fix/errors.hpp"
#include "l1fix/fields.hpp"
#include "l1fix/grid.hpp"
#include "l1fix/norms.hpp"
#include "l1fix/operators.hpp"
#include "l1fix/problem.hpp"
#include "l1fix/quadrature.hpp"
#include "l1fix/registry.hpp"
#include "l1fix/report.hpp"
#include "l1fix/rng.hpp"
#include "l1fix/runner.hpp"
#include "l1fix/solver.hpp"
#include "l1fix/subset.hpp"
#include "l1fix/wkmeasure.hpp"
