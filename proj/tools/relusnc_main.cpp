#include "relusnc/error.hpp"
#include "relusnc/iterprop.hpp"
#include "relusnc/nnet.hpp"
#include "relusnc/presets.hpp"
#include "relusnc/property.hpp"
#include "relusnc/report.hpp"
#include "relusnc/serialize.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

namespace {

using namespace relusnc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitEngine = 2;

struct QueryOptions
{
    std::string net;
    std::string property;
    std::string formula;
    bool robustness = false;
    std::string center;
    double delta = 0.0;
    std::size_t outIndex = 0;
    double baseline = 0.0;
    double epsilon = 0.0;
    std::string side = "upper";
    bool normalize = false;
};

struct TuningOptions
{
    std::optional<std::size_t> workers;
    std::optional<std::size_t> initialDivides;
    std::optional<double> initialTimeout;
    std::optional<std::size_t> onlineDivides;
    std::optional<double> timeoutFactor;
    std::optional<std::string> strategy;
    bool iterprop = false;
    std::optional<double> perReluTimeout;
    std::optional<std::size_t> thresholdT;
    std::optional<double> branchingK;
    std::optional<std::string> direction;
    std::optional<std::string> preset;
    std::optional<double> globalTimeout;
    std::string executor = "threads";
};

void add_query_options( CLI::App &cmd, QueryOptions &q, bool netRequired )
{
    auto *net = cmd.add_option( "--net", q.net, "Network in NNet format" );
    if ( netRequired )
        net->required();
    cmd.add_option( "--property", q.property, "Property file stating the region searched for a counterexample" );
    cmd.add_flag( "--robustness", q.robustness, "Local robustness query around --center" );
    cmd.add_option( "--center", q.center, "Input point, comma or whitespace separated" );
    cmd.add_option( "--delta", q.delta, "Input perturbation radius" )->check( CLI::NonNegativeNumber );
    cmd.add_option( "--out-index", q.outIndex, "Output index k" );
    cmd.add_option( "--baseline", q.baseline, "Baseline output value b_k" );
    cmd.add_option( "--epsilon", q.epsilon, "Required output deviation" );
    cmd.add_flag( "--normalize", q.normalize, "Apply the network file's input/output normalization" );
    cmd.add_option( "--side", q.side, "Deviation side searched" )->check( CLI::IsMember( { "upper", "lower" } ) );
}

void add_tuning_options( CLI::App &cmd, TuningOptions &t )
{
    cmd.add_option( "--workers", t.workers, "Worker count (falls back to RELU_SNC_WORKERS)" )
        ->check( CLI::PositiveNumber );
    cmd.add_option( "--initial-divides", t.initialDivides, "Initial partition size N0" );
    cmd.add_option( "--initial-timeout", t.initialTimeout, "Initial budget T0 in seconds (inf for a static split)" );
    cmd.add_option( "--online-divides", t.onlineDivides, "Partition size N after a timeout" );
    cmd.add_option( "--timeout-factor", t.timeoutFactor, "Budget growth factor F" );
    cmd.add_option( "--split-strategy", t.strategy, "Partitioning strategy" )
        ->check( CLI::IsMember( { "input", "relu", "hybrid" } ) );
    cmd.add_flag( "--iterprop", t.iterprop, "Run iterative propagation first" );
    cmd.add_option( "--per-relu-timeout", t.perReluTimeout, "Probe timeout for iterative propagation (default 2)" );
    cmd.add_option( "--threshold-t", t.thresholdT, "Violations of one ReLU before it is split" );
    cmd.add_option( "--branching-k", t.branchingK, "Branching window in percent (default 5)" );
    cmd.add_option( "--direction", t.direction, "Phase ordering" )
        ->check( CLI::IsMember( { "polarity", "inactive-first" } ) );
    cmd.add_option( "--config", t.preset, "Preset: M, I, R, S, S+D, S+P, S+D+P" )
        ->check( CLI::IsMember( { "M", "I", "R", "S", "S+D", "S+P", "S+D+P" } ) );
    cmd.add_option( "--global-timeout", t.globalTimeout, "Wall-clock limit for the run in seconds" );
    cmd.add_option( "--executor", t.executor, "Sub-query backend" )
        ->check( CLI::IsMember( { "threads", "processes" } ) );
}

std::vector<double> read_center( const std::string &path )
{
    std::ifstream in( path );
    if ( !in )
        throw PreconditionError( "cannot open center file " + path );
    std::vector<double> values;
    std::string line;
    for ( std::size_t number = 1; std::getline( in, line ); ++number )
    {
        for ( char &c : line )
            if ( c == ',' || c == ';' )
                c = ' ';
        std::istringstream fields( line );
        std::string field;
        while ( fields >> field )
        {
            double value = 0.0;
            auto [end, ec] = std::from_chars( field.data(), field.data() + field.size(), value );
            if ( ec != std::errc() || end != field.data() + field.size() )
                throw ParseError( path, number, "malformed number '" + field + "'" );
            values.push_back( value );
        }
    }
    return values;
}

std::size_t resolve_workers( const std::optional<std::size_t> &flag )
{
    if ( flag )
        return *flag;
    if ( const char *env = std::getenv( "RELU_SNC_WORKERS" ) )
    {
        std::size_t value = 0;
        std::string_view text( env );
        auto [end, ec] = std::from_chars( text.data(), text.data() + text.size(), value );
        if ( ec != std::errc() || end != text.data() + text.size() || value == 0 )
            throw PreconditionError( "RELU_SNC_WORKERS must be a positive integer, got '" + std::string( text ) + "'" );
        return value;
    }
    return std::max( 1u, std::thread::hardware_concurrency() );
}

VnnFormula load_query( const QueryOptions &q )
{
    if ( !q.formula.empty() )
    {
        if ( !q.net.empty() || !q.property.empty() || q.robustness )
            throw PreconditionError( "--formula cannot be combined with --net, --property or --robustness" );
        std::ifstream in( q.formula );
        if ( !in )
            throw PreconditionError( "cannot open formula file " + q.formula );
        return read_formula( in, q.formula );
    }
    if ( q.net.empty() )
        throw PreconditionError( "--net or --formula is required" );

    Network net = parse_nnet( q.net );
    if ( q.normalize )
        net = with_normalization_folded( net );
    if ( q.robustness == !q.property.empty() )
        throw PreconditionError( "exactly one of --property and --robustness is required" );
    if ( !q.robustness )
        return encode_property( net, parse_property( q.property ) );

    if ( q.center.empty() )
        throw PreconditionError( "--robustness needs --center" );
    OutputSide side = q.side == "lower" ? OutputSide::Lower : OutputSide::Upper;
    return encode_robustness_query( net, read_center( q.center ), q.delta, q.outIndex, q.baseline, q.epsilon, side );
}

RunConfig build_config( const VnnFormula &formula, const TuningOptions &t )
{
    std::size_t workers = resolve_workers( t.workers );
    RunConfig config = t.preset ? preset_config( *parse_preset( *t.preset ), formula, workers )
                                : default_run_config( formula, workers );
    SncConfig &snc = config.snc;
    if ( t.initialDivides )
        snc.initial_divides = *t.initialDivides;
    if ( t.initialTimeout )
        snc.initial_timeout = *t.initialTimeout;
    if ( t.onlineDivides )
        snc.online_divides = *t.onlineDivides;
    if ( t.timeoutFactor )
        snc.timeout_factor = *t.timeoutFactor;
    if ( t.strategy )
        snc.strategy = *parse_split_strategy( *t.strategy );
    if ( t.iterprop )
        config.iterprop = true;
    if ( t.perReluTimeout )
        config.per_relu_timeout = *t.perReluTimeout;
    if ( t.thresholdT )
        snc.solver.threshold_t = *t.thresholdT;
    if ( t.branchingK )
        snc.solver.branching_k_percent = *t.branchingK;
    if ( t.direction )
        snc.solver.direction = *t.direction == "polarity" ? Direction::PolarityBased : Direction::AlwaysInactiveFirst;
    if ( t.globalTimeout )
        snc.global_timeout = *t.globalTimeout;
    snc.validate();
    return config;
}

std::unique_ptr<SubQueryExecutor> make_executor( const TuningOptions &t )
{
    if ( t.executor == "processes" )
        return std::make_unique<ProcessExecutor>( std::filesystem::read_symlink( "/proc/self/exe" ) );
    return std::make_unique<InProcessExecutor>();
}

void write_json_file( const std::string &path, const nlohmann::json &json )
{
    std::ofstream out( path );
    out << json.dump( 2 ) << '\n';
    if ( !out )
        throw PreconditionError( "cannot write " + path );
}

int run_verify( const QueryOptions &q, const TuningOptions &t, const std::string &jsonOut )
{
    VnnFormula formula = load_query( q );
    RunConfig config = build_config( formula, t );
    auto executor = make_executor( t );
    RunOutcome outcome = run_query( formula, config, executor.get() );
    nlohmann::json report = report_json( outcome, config, formula );
    std::cout << report.dump( 2 ) << '\n';
    if ( !jsonOut.empty() )
        write_json_file( jsonOut, report );
    return kExitOk;
}

int run_preprocess( const QueryOptions &q, const TuningOptions &t, const std::string &out )
{
    VnnFormula formula = load_query( q );
    IterPropConfig config;
    config.workers = resolve_workers( t.workers );
    if ( t.perReluTimeout )
        config.per_relu_timeout = *t.perReluTimeout;
    config.solver = default_solver_config( formula );
    if ( t.thresholdT )
        config.solver.threshold_t = *t.thresholdT;
    if ( t.branchingK )
        config.solver.branching_k_percent = *t.branchingK;

    Clock::time_point start = Clock::now();
    IterPropResult result = iterative_propagate( formula, config );
    double seconds = std::chrono::duration<double>( Clock::now() - start ).count();

    if ( !out.empty() )
    {
        std::ofstream stream( out );
        write_formula( stream, result.formula );
        if ( !stream )
            throw PreconditionError( "cannot write " + out );
    }
    nlohmann::json summary = {
        { "unfixed_before", formula.unfixed_count() },
        { "unfixed_after", result.formula.unfixed_count() },
        { "fixed", result.fixed },
        { "sweeps", result.sweeps },
        { "probes", result.probes },
        { "wall_seconds", seconds },
    };
    std::cout << summary.dump( 2 ) << '\n';
    return kExitOk;
}

struct BenchJob
{
    std::string id;
    std::string net;
    std::string property;
};

// One job per line: "[id] network property". Relative paths are resolved
// against the manifest's directory; '#' starts a comment.
std::vector<BenchJob> read_manifest( const std::string &path )
{
    std::ifstream in( path );
    if ( !in )
        throw PreconditionError( "cannot open manifest " + path );
    std::filesystem::path base = std::filesystem::path( path ).parent_path();
    auto resolve = [&]( const std::string &entry ) {
        std::filesystem::path p( entry );
        return ( p.is_absolute() ? p : base / p ).string();
    };

    std::vector<BenchJob> jobs;
    std::string line;
    for ( std::size_t number = 1; std::getline( in, line ); ++number )
    {
        if ( auto hash = line.find( '#' ); hash != std::string::npos )
            line.erase( hash );
        std::istringstream fields( line );
        std::vector<std::string> tokens;
        for ( std::string token; fields >> token; )
            tokens.push_back( token );
        if ( tokens.empty() )
            continue;
        if ( tokens.size() == 2 )
            tokens.insert( tokens.begin(),
                           std::filesystem::path( tokens[0] ).stem().string() + ":" +
                               std::filesystem::path( tokens[1] ).stem().string() );
        if ( tokens.size() != 3 )
            throw ParseError( path, number, "expected '[id] network property'" );
        jobs.push_back( { tokens[0], resolve( tokens[1] ), resolve( tokens[2] ) } );
    }
    if ( jobs.empty() )
        throw ParseError( path, 0, "manifest lists no jobs" );
    return jobs;
}

int run_bench( const std::string &manifest, TuningOptions t, double jobTimeout, const std::string &csvOut )
{
    std::vector<BenchJob> jobs = read_manifest( manifest );
    if ( !t.globalTimeout )
        t.globalTimeout = jobTimeout;

    std::ofstream file;
    if ( !csvOut.empty() )
    {
        file.open( csvOut );
        if ( !file )
            throw PreconditionError( "cannot write " + csvOut );
    }
    std::ostream &out = csvOut.empty() ? std::cout : file;
    out << "benchmark,verdict,seconds,solve_calls,timeouts\n";
    for ( const auto &job : jobs )
    {
        QueryOptions q;
        q.net = job.net;
        q.property = job.property;
        VnnFormula formula = load_query( q );
        RunConfig config = build_config( formula, t );
        auto executor = make_executor( t );
        RunOutcome outcome = run_query( formula, config, executor.get() );
        out << job.id << ',' << to_string( outcome.result.verdict ) << ',' << outcome.wall_seconds << ','
            << outcome.stats.solve_calls << ',' << outcome.stats.timeouts << '\n';
        out.flush();
    }
    return kExitOk;
}

int run_solve_subquery( const std::string &inPath, const std::string &outPath )
{
    std::ifstream in( inPath );
    if ( !in )
        throw PreconditionError( "cannot open " + inPath );
    SubQueryFile file = read_subquery( in, inPath );

    SolverConfig solver;
    solver.threshold_t = file.threshold_t;
    solver.branching_k_percent = file.branching_k_percent;
    solver.direction = file.direction;
    solver.deadline = budget_deadline( file.query.budget, std::nullopt );
    QueryResult result = solve( file.query.formula, solver );

    std::string partial = outPath + ".part";
    {
        std::ofstream out( partial );
        write_result( out, result );
        if ( !out )
            throw PreconditionError( "cannot write " + partial );
    }
    std::filesystem::rename( partial, outPath );
    return kExitOk;
}

} // namespace

int main( int argc, char **argv )
{
    CLI::App app{ "Parallel verification of ReLU networks by Split-and-Conquer" };
    app.require_subcommand( 1 );

    QueryOptions query;
    TuningOptions tuning;
    std::string jsonOut;
    auto *verify = app.add_subcommand( "verify", "Decide one query and print a JSON report" );
    add_query_options( *verify, query, false );
    verify->add_option( "--formula", query.formula, "Serialized formula (e.g. from preprocess) instead of --net" );
    add_tuning_options( *verify, tuning );
    verify->add_option( "--json-out", jsonOut, "Also write the report to this file" );

    std::string preprocessOut;
    auto *preprocess = app.add_subcommand( "preprocess", "Run iterative propagation and save the strengthened formula" );
    add_query_options( *preprocess, query, true );
    preprocess->add_option( "--workers", tuning.workers, "Worker count (falls back to RELU_SNC_WORKERS)" )
        ->check( CLI::PositiveNumber );
    preprocess->add_option( "--per-relu-timeout", tuning.perReluTimeout, "Probe timeout in seconds (default 2)" );
    preprocess->add_option( "--threshold-t", tuning.thresholdT, "Violations of one ReLU before it is split" );
    preprocess->add_option( "--branching-k", tuning.branchingK, "Branching window in percent (default 5)" );
    preprocess->add_option( "--out", preprocessOut, "Write the formula here" );

    std::string manifest;
    std::string csvOut;
    double jobTimeout = 3600.0;
    auto *bench = app.add_subcommand( "bench", "Run a manifest of (network, property) jobs and emit CSV" );
    bench->add_option( "manifest", manifest, "Manifest file" )->required();
    add_tuning_options( *bench, tuning );
    bench->add_option( "--timeout", jobTimeout, "Per-job wall-clock limit in seconds (default 3600)" );
    bench->add_option( "--csv-out", csvOut, "Write CSV here instead of standard output" );

    std::string subqueryIn;
    std::string subqueryOut;
    auto *worker = app.add_subcommand( "solve-subquery", "" ); // internal: process-executor worker
    worker->group( "" );
    worker->add_option( "--in", subqueryIn )->required();
    worker->add_option( "--out", subqueryOut )->required();

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::CallForHelp &e )
    {
        return app.exit( e );
    }
    catch ( const CLI::CallForAllHelp &e )
    {
        return app.exit( e );
    }
    catch ( const CLI::ParseError &e )
    {
        app.exit( e );
        return kExitUsage;
    }

    try
    {
        if ( *verify )
            return run_verify( query, tuning, jsonOut );
        if ( *preprocess )
            return run_preprocess( query, tuning, preprocessOut );
        if ( *bench )
            return run_bench( manifest, tuning, jobTimeout, csvOut );
        return run_solve_subquery( subqueryIn, subqueryOut );
    }
    catch ( const EngineError &e )
    {
        std::cerr << "engine error: " << e.what() << '\n';
        return kExitEngine;
    }
    catch ( const Error &e )
    {
        // Parse errors, bad inputs and unreadable files.
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    catch ( const std::exception &e )
    {
        std::cerr << "engine error: " << e.what() << '\n';
        return kExitEngine;
    }
}
