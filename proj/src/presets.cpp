#include "relusnc/presets.hpp"

#include "relusnc/error.hpp"

namespace relusnc {

std::string_view to_string( Preset preset )
{
    switch ( preset )
    {
    case Preset::M:
        return "M";
    case Preset::I:
        return "I";
    case Preset::R:
        return "R";
    case Preset::S:
        return "S";
    case Preset::SD:
        return "S+D";
    case Preset::SP:
        return "S+P";
    case Preset::SDP:
        return "S+D+P";
    }
    return "?";
}

const std::vector<Preset> &all_presets()
{
    static const std::vector<Preset> presets{ Preset::M, Preset::I,  Preset::R,  Preset::S,
                                              Preset::SD, Preset::SP, Preset::SDP };
    return presets;
}

std::optional<Preset> parse_preset( std::string_view text )
{
    for ( Preset preset : all_presets() )
        if ( text == to_string( preset ) )
            return preset;
    return std::nullopt;
}

RunConfig default_run_config( const VnnFormula &formula, std::size_t workers )
{
    RunConfig config;
    config.snc = default_config( formula, workers );
    return config;
}

RunConfig preset_config( Preset preset, const VnnFormula &formula, std::size_t workers )
{
    RunConfig config = default_run_config( formula, workers );
    config.name = std::string( to_string( preset ) );

    bool polarityDirection = preset == Preset::SD || preset == Preset::SDP;
    config.snc.solver.direction = polarityDirection ? Direction::PolarityBased : Direction::AlwaysInactiveFirst;
    config.iterprop = preset == Preset::SP || preset == Preset::SDP;

    switch ( preset )
    {
    case Preset::M:
        config.sequential = true;
        config.snc.workers = 1;
        break;
    case Preset::I:
        config.snc.strategy = SplitStrategy::Input;
        break;
    case Preset::R:
        config.snc.strategy = SplitStrategy::Relu;
        break;
    default:
        config.snc.strategy = SplitStrategy::Hybrid;
        break;
    }
    return config;
}

namespace {

double seconds_between( Clock::time_point from, Clock::time_point to )
{
    return std::chrono::duration<double>( to - from ).count();
}

} // namespace

RunOutcome run_query( const VnnFormula &formula, const RunConfig &config, SubQueryExecutor *executor )
{
    config.snc.validate();
    if ( !( config.per_relu_timeout > 0.0 ) )
        throw PreconditionError( "per-ReLU timeout must be positive" );

    Clock::time_point start = Clock::now();
    std::optional<Clock::time_point> globalDeadline;
    if ( config.snc.global_timeout )
        globalDeadline = start + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>( *config.snc.global_timeout ) );

    RunOutcome outcome;
    VnnFormula query = formula;
    if ( config.iterprop )
    {
        IterPropConfig propagation;
        propagation.per_relu_timeout = config.per_relu_timeout;
        propagation.workers = config.snc.workers;
        SolverConfig base = config.snc.solver;
        ProbeSolver probe = [base, globalDeadline]( const VnnFormula &strengthened, Clock::time_point deadline ) {
            SolverConfig probeConfig = base;
            probeConfig.deadline = globalDeadline ? std::min( deadline, *globalDeadline ) : deadline;
            return solve( strengthened, probeConfig );
        };
        IterPropResult propagated = iterative_propagate( query, propagation, probe );
        query = std::move( propagated.formula );
        outcome.iterprop_fixed = propagated.fixed;
        outcome.iterprop_sweeps = propagated.sweeps;
    }

    if ( globalDeadline && Clock::now() >= *globalDeadline )
    {
        outcome.result = QueryResult::timeout();
        outcome.wall_seconds = seconds_between( start, Clock::now() );
        return outcome;
    }

    if ( config.sequential )
    {
        SolverConfig solver = config.snc.solver;
        solver.deadline = globalDeadline;
        Clock::time_point called = Clock::now();
        outcome.result = solve( query, solver );
        RunStats &stats = outcome.stats;
        stats.solve_calls = 1;
        stats.sat_calls = outcome.result.is_sat();
        stats.unsat_calls = outcome.result.is_unsat();
        stats.timeouts = outcome.result.is_timeout();
        stats.wall_time = seconds_between( called, Clock::now() );
        stats.calls.push_back( { "0", outcome.result.verdict, stats.wall_time, kInfinity, 0 } );
    }
    else
    {
        SncConfig snc = config.snc;
        if ( globalDeadline )
            snc.global_timeout = std::max( 1e-9, seconds_between( Clock::now(), *globalDeadline ) );
        InProcessExecutor local;
        SncResult result = split_and_conquer( query, snc, executor ? *executor : local );
        outcome.result = std::move( result.result );
        outcome.stats = std::move( result.stats );
    }
    outcome.wall_seconds = seconds_between( start, Clock::now() );
    return outcome;
}

} // namespace relusnc
