#include "relusnc/oracle.hpp"

#include "relusnc/error.hpp"

#include <string>

namespace relusnc {

QueryResult enumerate_phases_oracle( const VnnFormula &formula, const LpFunction &lp )
{
    std::vector<std::size_t> unfixed = formula.unfixed_relus();
    if ( unfixed.size() > kOracleMaxRelus )
        throw PreconditionError( "phase enumeration capped at " + std::to_string( kOracleMaxRelus ) +
                                 " ReLUs, formula has " + std::to_string( unfixed.size() ) );

    std::size_t patterns = std::size_t{ 1 } << unfixed.size();
    for ( std::size_t mask = 0; mask < patterns; ++mask )
    {
        VnnFormula fixed = formula;
        for ( std::size_t bit = 0; bit < unfixed.size(); ++bit )
            apply_phase( fixed, unfixed[bit], ( mask >> bit ) & 1 ? Phase::Active : Phase::Inactive );
        if ( fixed.bounds.empty() )
            continue;

        LpResult answer = lp( fixed.linear, fixed.bounds );
        if ( answer.feasible() )
            return QueryResult::sat( std::move( answer.assignment ) );
    }
    return QueryResult::unsat();
}

} // namespace relusnc
