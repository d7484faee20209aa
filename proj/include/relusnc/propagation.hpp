#pragma once

#include "relusnc/formula.hpp"

#include <cstddef>

namespace relusnc {

inline constexpr std::size_t kDefaultPropagationRounds = 10;

struct PropagationResult
{
    bool infeasible = false;
    VnnFormula formula; // tightened copy; unspecified when infeasible
    std::size_t rounds = 0;
    bool cap_hit = false;
};

// Interval bound propagation. Each round tightens every variable through
// every linear row, pushes bounds across ReLUs in both directions and fixes
// the phase of any ReLU whose backward bounds exclude zero from one side.
// Rounds repeat until nothing moves or the cap is reached.
PropagationResult interval_propagate( const VnnFormula &formula,
                                      std::size_t max_rounds = kDefaultPropagationRounds );

} // namespace relusnc
