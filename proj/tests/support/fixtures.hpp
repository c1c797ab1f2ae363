#pragma once

// Shared problem fixtures for the test binaries.  Built once per binary via
// static locals; tests must not mutate them.

#include <l1fix/l1fix.hpp>

namespace fixtures {

// Bundled example at reduced resolution: cheap enough for sampling-heavy
// tests while keeping the operator slack far below the asserted bounds.
inline const l1fix::BuiltProblem& bundled_small() {
    static const l1fix::BuiltProblem built = [] {
        l1fix::ProblemDefinition def = l1fix::taoudi_example_definition();
        def.numerics.cells = 512;
        return l1fix::build_problem(def);
    }();
    return built;
}

inline const l1fix::BuiltProblem& bundled_full() {
    static const l1fix::BuiltProblem built =
        l1fix::build_problem(l1fix::taoudi_example_definition());
    return built;
}

inline const l1fix::BuiltProblem& linear_small() {
    static const l1fix::BuiltProblem built = [] {
        l1fix::ProblemDefinition def = l1fix::linear_contraction_definition();
        def.numerics.cells = 512;
        return l1fix::build_problem(def);
    }();
    return built;
}

} // namespace fixtures
