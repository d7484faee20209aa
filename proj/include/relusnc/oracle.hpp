#pragma once

#include "relusnc/formula.hpp"
#include "relusnc/simplex.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace relusnc {

using LpFunction = std::function<LpResult( const std::vector<LinearConstraint> &, const Bounds & )>;

inline constexpr std::size_t kOracleMaxRelus = 20;

// Ground-truth decision by exhaustive enumeration: every phase pattern of the
// unfixed ReLUs is fixed and handed to the LP function as a purely linear
// problem. Throws PreconditionError above kOracleMaxRelus unfixed ReLUs.
QueryResult enumerate_phases_oracle( const VnnFormula &formula, const LpFunction &lp = lp_feasible );

} // namespace relusnc
