#pragma once

// Sequential complete solver: simplex over the linear part with lazy ReLU
// handling. A violated ReLU is first repaired by moving one of its two
// variables; once it has been seen violated threshold_t times the search
// case-splits, depth first, on the ReLU picked by the polarity branching
// heuristic.

#include "relusnc/formula.hpp"

#include <chrono>
#include <cstddef>
#include <optional>
#include <stop_token>

namespace relusnc {

using Clock = std::chrono::steady_clock;

enum class Direction
{
    PolarityBased,      // positive polarity explores/repairs toward the active phase
    AlwaysInactiveFirst
};

std::string_view to_string( Direction direction );

struct SolverConfig
{
    std::size_t threshold_t = 20;
    double branching_k_percent = 5.0;
    Direction direction = Direction::PolarityBased;
    std::optional<Clock::time_point> deadline;
    std::stop_token stop;

    void validate() const;
};

// threshold_t drops to 1 for low input dimension (<= 10 inputs).
SolverConfig default_solver_config( const VnnFormula &formula );

struct SolverStats
{
    std::size_t nodes = 0;
    std::size_t splits = 0;
    std::size_t repairs = 0;
    std::size_t pivots = 0;
    std::size_t max_depth = 0;

    bool operator==( const SolverStats & ) const = default;
};

struct SolveOutcome
{
    QueryResult result;
    SolverStats stats;
};

SolveOutcome solve_detailed( const VnnFormula &formula, const SolverConfig &config );
QueryResult solve( const VnnFormula &formula, const SolverConfig &config );

// Active for positive polarity, Inactive for negative, Active on a tie.
// Throws PreconditionError when polarity is undefined.
Phase direction_heuristic( const ReluConstraint &relu, const Bounds &bounds );

// Phase to prefer under the configured direction. Total: ReLUs without a
// finite polarity use its limiting sign.
Phase preferred_phase( const ReluConstraint &relu, const Bounds &bounds, Direction direction );

struct RepairAction
{
    Var var;
    double value;

    bool operator==( const RepairAction & ) const = default;
};

// Assignment update making a violated ReLU hold, oriented by the preferred
// phase. If the preferred variable cannot take the value within its bounds,
// the other variable is tried; nullopt when neither works.
std::optional<RepairAction> repair( const ReluConstraint &relu,
                                    const Assignment &assignment,
                                    const Bounds &bounds,
                                    Direction direction = Direction::PolarityBased );

// Index (into formula.relus) of the ReLU with polarity closest to zero among
// the first ceil(k% * count) unfixed ReLUs, ordered by (layer_rank, backward
// variable). ReLUs listed in `excluded` are skipped. Unfixed ReLUs whose
// bounds already decide the phase are only considered when nothing else is
// left. Throws PreconditionError when no candidate exists.
std::size_t select_branch_relu( const VnnFormula &formula,
                                double k_percent,
                                const std::vector<std::size_t> &excluded = {} );

} // namespace relusnc
