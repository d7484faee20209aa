#include "relusnc/iterprop.hpp"

#include "relusnc/error.hpp"
#include "relusnc/propagation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace relusnc {

Phase polarity_constraint( const ReluConstraint &relu, const Bounds &bounds )
{
    return polarity( relu, bounds ) >= 0.0 ? Phase::Inactive : Phase::Active;
}

namespace {

// Easier phase for any unfixed ReLU. When the bounds already decide the
// phase, the contradicted phase is the one probed, so the probe refutes it.
Phase easier_phase( const ReluConstraint &relu, const Bounds &bounds )
{
    double score = polarity_score( bounds.lower( relu.backward ), bounds.upper( relu.backward ) );
    return score >= 0.0 ? Phase::Inactive : Phase::Active;
}

template <typename Task>
void run_parallel( std::size_t tasks, std::size_t workers, Task &&task )
{
    workers = std::max<std::size_t>( 1, std::min( workers, tasks ) );
    if ( workers == 1 )
    {
        for ( std::size_t i = 0; i < tasks; ++i )
            task( i );
        return;
    }

    std::atomic<std::size_t> next{ 0 };
    std::exception_ptr failure;
    std::mutex failureMutex;
    {
        std::vector<std::jthread> pool;
        for ( std::size_t w = 0; w < workers; ++w )
            pool.emplace_back( [&] {
                for ( std::size_t i = next++; i < tasks; i = next++ )
                {
                    try
                    {
                        task( i );
                    }
                    catch ( ... )
                    {
                        std::lock_guard lock( failureMutex );
                        if ( !failure )
                            failure = std::current_exception();
                    }
                }
            } );
    }
    if ( failure )
        std::rethrow_exception( failure );
}

} // namespace

IterPropResult iterative_propagate( const VnnFormula &formula, const IterPropConfig &config, const ProbeSolver &solver )
{
    if ( !( config.per_relu_timeout > 0.0 ) )
        throw PreconditionError( "per-ReLU timeout must be positive" );

    IterPropResult result;
    result.formula = formula;
    auto timeout = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>( config.per_relu_timeout ) );

    while ( true )
    {
        std::vector<std::size_t> unfixed = result.formula.unfixed_relus();
        if ( unfixed.empty() )
            break;

        // Bounds for the heuristic only; the working formula stays as given
        // plus learned fixes.
        PropagationResult propagated = interval_propagate( result.formula );
        if ( propagated.infeasible )
            break;
        const VnnFormula &snapshot = result.formula;

        ++result.sweeps;
        result.unfixed_per_sweep.push_back( unfixed.size() );

        std::vector<Phase> probe( unfixed.size() );
        for ( std::size_t i = 0; i < unfixed.size(); ++i )
            probe[i] = easier_phase( propagated.formula.relus[unfixed[i]], propagated.formula.bounds );

        std::vector<char> refuted( unfixed.size(), 0 );
        run_parallel( unfixed.size(), config.workers, [&]( std::size_t i ) {
            VnnFormula strengthened = fix_relu( snapshot, unfixed[i], probe[i] );
            QueryResult answer = solver( strengthened, Clock::now() + timeout );
            refuted[i] = answer.is_unsat();
        } );
        result.probes += unfixed.size();

        std::size_t fixedThisSweep = 0;
        for ( std::size_t i = 0; i < unfixed.size(); ++i )
        {
            if ( !refuted[i] )
                continue;
            apply_phase( result.formula, unfixed[i], flipped( probe[i] ) );
            ++fixedThisSweep;
        }
        result.fixed += fixedThisSweep;
        result.fixed_per_sweep.push_back( fixedThisSweep );
        if ( fixedThisSweep == 0 )
            break;
    }
    return result;
}

IterPropResult iterative_propagate( const VnnFormula &formula, const IterPropConfig &config )
{
    SolverConfig base = config.solver;
    ProbeSolver solver = [base]( const VnnFormula &query, Clock::time_point deadline ) {
        SolverConfig probeConfig = base;
        probeConfig.deadline = deadline;
        return solve( query, probeConfig );
    };
    return iterative_propagate( formula, config, solver );
}

} // namespace relusnc
