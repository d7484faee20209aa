#pragma once

// Iterative propagation preprocessing. Each sweep probes every unfixed ReLU
// in its easier phase under a short timeout; a refuted probe permanently
// fixes the ReLU to the opposite phase. Sweeps repeat until one fixes
// nothing. Probes within a sweep run against a snapshot of the working
// formula and may run concurrently; fixes are conjoined after the sweep.

#include "relusnc/formula.hpp"
#include "relusnc/reluplex.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace relusnc {

inline constexpr double kDefaultPerReluTimeout = 2.0;

// Solver used for probes. Must honour the deadline and return Timeout once
// it passes.
using ProbeSolver = std::function<QueryResult( const VnnFormula &, Clock::time_point deadline )>;

struct IterPropConfig
{
    double per_relu_timeout = kDefaultPerReluTimeout; // seconds
    std::size_t workers = 1;
    SolverConfig solver; // used by the default probe solver; deadline ignored
};

struct IterPropResult
{
    VnnFormula formula;
    std::size_t sweeps = 0;
    std::size_t probes = 0;
    std::size_t fixed = 0;
    std::vector<std::size_t> fixed_per_sweep;
    std::vector<std::size_t> unfixed_per_sweep; // before each sweep
};

// Inactive when polarity >= 0 (the narrower [a, 0] side), Active otherwise.
// Throws PreconditionError when polarity is undefined.
Phase polarity_constraint( const ReluConstraint &relu, const Bounds &bounds );

IterPropResult iterative_propagate( const VnnFormula &formula, const IterPropConfig &config, const ProbeSolver &solver );
IterPropResult iterative_propagate( const VnnFormula &formula, const IterPropConfig &config = {} );

} // namespace relusnc
