#include "relusnc/partition.hpp"

#include "relusnc/error.hpp"
#include "relusnc/propagation.hpp"
#include "relusnc/reluplex.hpp"

#include <cmath>
#include <string>

namespace relusnc {

bool is_power_of_two( std::size_t n )
{
    return n != 0 && ( n & ( n - 1 ) ) == 0;
}

std::size_t log2_exact( std::size_t n )
{
    if ( !is_power_of_two( n ) )
        throw PreconditionError( std::to_string( n ) + " is not a power of two" );
    std::size_t log = 0;
    while ( ( std::size_t{ 1 } << log ) < n )
        ++log;
    return log;
}

namespace {

void require_partition_size( std::size_t n )
{
    if ( n < 2 || !is_power_of_two( n ) )
        throw PreconditionError( "partition size must be a power of two >= 2, got " + std::to_string( n ) );
}

} // namespace

PartitionResult partition_input( const VnnFormula &formula, std::size_t n )
{
    require_partition_size( n );
    if ( formula.inputs.empty() )
        throw PreconditionError( "input partitioning needs at least one input variable" );
    for ( Var input : formula.inputs )
        if ( !std::isfinite( formula.bounds.lower( input ) ) || !std::isfinite( formula.bounds.upper( input ) ) )
            throw PreconditionError( "input partitioning needs finite input bounds" );

    PartitionResult result;
    result.degenerate = true;
    std::vector<VnnFormula> leaves{ formula };
    for ( std::size_t round = 0, rounds = log2_exact( n ); round < rounds; ++round )
    {
        std::vector<VnnFormula> next;
        next.reserve( leaves.size() * 2 );
        for ( auto &leaf : leaves )
        {
            Var widest = leaf.inputs.front();
            double widestRange = -1.0;
            for ( Var input : leaf.inputs )
            {
                double range = leaf.bounds.upper( input ) - leaf.bounds.lower( input );
                if ( range > widestRange )
                {
                    widestRange = range;
                    widest = input;
                }
            }

            if ( widestRange <= 0.0 )
            {
                next.push_back( leaf );
                next.push_back( std::move( leaf ) );
                continue;
            }
            result.degenerate = false;

            double lower = leaf.bounds.lower( widest );
            double upper = leaf.bounds.upper( widest );
            double mid = lower + 0.5 * ( upper - lower );

            VnnFormula left = leaf;
            left.bounds.set( widest, lower, mid );
            leaf.bounds.set( widest, mid, upper );
            next.push_back( std::move( left ) );
            next.push_back( std::move( leaf ) );
        }
        leaves = std::move( next );
    }
    result.children = std::move( leaves );
    return result;
}

PartitionResult partition_relu( const VnnFormula &formula, std::size_t n, double k_percent )
{
    require_partition_size( n );

    PartitionResult result;
    PropagationResult parent = interval_propagate( formula );
    if ( parent.infeasible )
    {
        VnnFormula refuted = formula;
        refuted.bounds.mark_empty();
        result.children.push_back( std::move( refuted ) );
        result.capped = true;
        return result;
    }

    std::size_t wanted = log2_exact( n );
    std::vector<std::size_t> chosen;
    while ( chosen.size() < wanted && chosen.size() < parent.formula.unfixed_count() )
        chosen.push_back( select_branch_relu( parent.formula, k_percent, chosen ) );

    if ( chosen.empty() )
    {
        result.children.push_back( formula );
        result.capped = true;
        return result;
    }
    result.capped = chosen.size() < wanted;

    std::size_t combinations = std::size_t{ 1 } << chosen.size();
    for ( std::size_t mask = 0; mask < combinations; ++mask )
    {
        VnnFormula child = parent.formula;
        for ( std::size_t bit = 0; bit < chosen.size(); ++bit )
            apply_phase( child, chosen[bit], ( mask >> bit ) & 1 ? Phase::Active : Phase::Inactive );

        PropagationResult tightened = interval_propagate( child );
        if ( tightened.infeasible )
        {
            child.bounds.mark_empty();
            result.children.push_back( std::move( child ) );
        }
        else
            result.children.push_back( std::move( tightened.formula ) );
    }
    return result;
}

} // namespace relusnc
