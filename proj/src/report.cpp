#include "relusnc/report.hpp"

#include <cmath>

namespace relusnc {

namespace {

// JSON has no infinity; an unlimited duration is written as null.
nlohmann::json seconds( double value )
{
    return std::isfinite( value ) ? nlohmann::json( value ) : nlohmann::json( nullptr );
}

nlohmann::json project( const Assignment &assignment, const std::vector<Var> &vars )
{
    nlohmann::json values = nlohmann::json::array();
    for ( Var var : vars )
        values.push_back( assignment[var] );
    return values;
}

} // namespace

nlohmann::json config_json( const RunConfig &config )
{
    const SncConfig &snc = config.snc;
    return {
        { "name", config.name },
        { "sequential", config.sequential },
        { "workers", snc.workers },
        { "initial_divides", snc.initial_divides },
        { "initial_timeout", seconds( snc.initial_timeout ) },
        { "online_divides", snc.online_divides },
        { "timeout_factor", snc.timeout_factor },
        { "split_strategy", std::string( to_string( snc.strategy ) ) },
        { "global_timeout", snc.global_timeout ? seconds( *snc.global_timeout ) : nlohmann::json( nullptr ) },
        { "threshold_t", snc.solver.threshold_t },
        { "branching_k", snc.solver.branching_k_percent },
        { "direction", std::string( to_string( snc.solver.direction ) ) },
        { "iterprop", config.iterprop },
        { "per_relu_timeout", config.per_relu_timeout },
    };
}

nlohmann::json report_json( const RunOutcome &outcome, const RunConfig &config, const VnnFormula &formula )
{
    nlohmann::json report;
    report["result"] = std::string( to_string( outcome.result.verdict ) );
    if ( outcome.result.is_sat() )
        report["witness"] = {
            { "inputs", project( outcome.result.witness, formula.inputs ) },
            { "outputs", project( outcome.result.witness, formula.outputs ) },
        };
    report["wall_seconds"] = outcome.wall_seconds;
    report["config"] = config_json( config );
    report["stats"] = {
        { "solve_calls", outcome.stats.solve_calls },
        { "timeouts", outcome.stats.timeouts },
        { "sat_calls", outcome.stats.sat_calls },
        { "unsat_calls", outcome.stats.unsat_calls },
        { "max_depth", outcome.stats.max_depth },
        { "iterprop_fixed", outcome.iterprop_fixed },
    };
    return report;
}

} // namespace relusnc
