#include "relusnc/error.hpp"
#include "relusnc/network.hpp"
#include "relusnc/oracle.hpp"
#include "relusnc/snc.hpp"

#include "dense_lp.hpp"
#include "random_models.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <functional>
#include <mutex>
#include <thread>

namespace relusnc {
namespace {

// Answers each sub-query through a caller-supplied script.
class ScriptedExecutor : public SubQueryExecutor
{
public:
    using Script = std::function<QueryResult( const SubQuery &, std::stop_token )>;

    explicit ScriptedExecutor( Script script )
        : _script( std::move( script ) )
    {
    }

    QueryResult run( const SubQuery &query, const SolverConfig &, std::optional<Clock::time_point>, std::stop_token stop ) override
    {
        {
            std::lock_guard lock( _mutex );
            seen.push_back( query );
        }
        return _script( query, stop );
    }

    std::vector<SubQuery> seen;

private:
    Script _script;
    std::mutex _mutex;
};

VnnFormula single_relu_unsat()
{
    // f = ReLU(x), x in [-1, 1], f <= -0.5.
    VnnFormula f;
    Var x = f.add_variable( -1, 1 );
    Var y = f.add_variable();
    f.add_relu( x, y, 0 );
    f.add_linear( { { { y, 1.0 } }, Relation::LessEq, -0.5 } );
    f.inputs = { x };
    f.outputs = { y };
    return f;
}

SncConfig small_config()
{
    SncConfig config;
    config.initial_divides = 2;
    config.initial_timeout = 1.0;
    config.online_divides = 4;
    config.timeout_factor = 1.5;
    return config;
}

TEST( SplitStrategyNames, RoundTrip )
{
    for ( SplitStrategy s : { SplitStrategy::Input, SplitStrategy::Relu, SplitStrategy::Hybrid } )
        EXPECT_EQ( parse_split_strategy( to_string( s ) ), s );
    EXPECT_FALSE( parse_split_strategy( "bisect" ) );
}

TEST( SncDefaults, Examples )
{
    VnnFormula f;
    for ( int i = 0; i < 5; ++i )
        f.inputs.push_back( f.add_variable( 0, 1 ) );
    for ( int i = 0; i < 300; ++i )
        f.add_relu( f.add_variable(), f.add_variable(), 1 );
    SncConfig config = default_config( f, 8 );
    EXPECT_EQ( config.initial_divides, 8u );
    EXPECT_DOUBLE_EQ( config.initial_timeout, 30.0 );
    EXPECT_EQ( config.online_divides, 4u );
    EXPECT_DOUBLE_EQ( config.timeout_factor, 1.5 );
    EXPECT_EQ( resolve_strategy( config.strategy, f ), SplitStrategy::Input );

    EXPECT_EQ( default_config( f, 5 ).initial_divides, 8u );
    EXPECT_EQ( default_config( f, 1 ).initial_divides, 2u );
    EXPECT_THROW( default_config( f, 0 ), PreconditionError );

    VnnFormula image;
    for ( int i = 0; i < 784; ++i )
        image.inputs.push_back( image.add_variable( 0, 1 ) );
    EXPECT_EQ( resolve_strategy( SplitStrategy::Hybrid, image ), SplitStrategy::Relu );
    EXPECT_DOUBLE_EQ( default_config( image, 1 ).initial_timeout, 1.0 );
}

TEST( SncDefaults, HybridBoundaryIsTenInputs )
{
    VnnFormula f;
    for ( int i = 0; i < 10; ++i )
        f.inputs.push_back( f.add_variable( 0, 1 ) );
    EXPECT_EQ( resolve_strategy( SplitStrategy::Hybrid, f ), SplitStrategy::Input );
    f.inputs.push_back( f.add_variable( 0, 1 ) );
    EXPECT_EQ( resolve_strategy( SplitStrategy::Hybrid, f ), SplitStrategy::Relu );
}

TEST( SncDefaults, ScalingPartitionSize )
{
    EXPECT_EQ( scaling_partition_size( 1 ), 2u );
    EXPECT_EQ( scaling_partition_size( 2 ), 4u );
    EXPECT_EQ( scaling_partition_size( 8 ), 4u );
    EXPECT_EQ( scaling_partition_size( 16 ), 8u );
    EXPECT_EQ( scaling_partition_size( 64 ), 8u );
    EXPECT_EQ( scaling_partition_size( 128 ), 16u );
}

TEST( SncConfigValidation, RejectsBadParameters )
{
    auto expectRejected = []( auto mutate ) {
        SncConfig config = small_config();
        mutate( config );
        EXPECT_THROW( split_and_conquer( single_relu_unsat(), config ), PreconditionError );
    };
    expectRejected( []( SncConfig &c ) { c.initial_divides = 3; } );
    expectRejected( []( SncConfig &c ) { c.initial_divides = 1; } );
    expectRejected( []( SncConfig &c ) { c.online_divides = 6; } );
    expectRejected( []( SncConfig &c ) { c.initial_timeout = 0.0; } );
    expectRejected( []( SncConfig &c ) { c.timeout_factor = 1.0; } );
    expectRejected( []( SncConfig &c ) { c.workers = 0; } );
    expectRejected( []( SncConfig &c ) { c.global_timeout = -1.0; } );
}

TEST( Snc, SingleReluUnsatUsesOneCallPerChild )
{
    SncResult r = split_and_conquer( single_relu_unsat(), small_config() );
    EXPECT_TRUE( r.result.is_unsat() );
    EXPECT_EQ( r.stats.solve_calls, 2u );
    EXPECT_EQ( r.stats.unsat_calls, 2u );
    EXPECT_EQ( r.stats.timeouts, 0u );
    EXPECT_EQ( r.stats.max_depth, 1u );
}

TEST( Snc, TimeoutsExpandWithGrowingBudget )
{
    ScriptedExecutor executor( []( const SubQuery &q, std::stop_token ) {
        return q.depth < 3 ? QueryResult::timeout() : QueryResult::unsat();
    } );
    SncConfig config = small_config();
    config.initial_timeout = 2.0;
    config.online_divides = 2;
    SncResult r = split_and_conquer( single_relu_unsat(), config, executor );
    EXPECT_TRUE( r.result.is_unsat() );
    EXPECT_EQ( r.stats.solve_calls, 2u + 4u + 8u );
    EXPECT_EQ( r.stats.timeouts, 2u + 4u );
    EXPECT_EQ( r.stats.max_depth, 3u );
    for ( const CallRecord &call : r.stats.calls )
        EXPECT_DOUBLE_EQ( call.budget, 2.0 * std::pow( 1.5, static_cast<double>( call.depth - 1 ) ) );
}

TEST( Snc, LineageIds )
{
    ScriptedExecutor executor( []( const SubQuery &q, std::stop_token ) {
        return q.id == "1" ? QueryResult::timeout() : QueryResult::unsat();
    } );
    SncConfig config = small_config();
    split_and_conquer( single_relu_unsat(), config, executor );
    std::vector<std::string> ids;
    for ( const SubQuery &q : executor.seen )
        ids.push_back( q.id );
    EXPECT_EQ( ids, ( std::vector<std::string>{ "0", "1", "1.0", "1.1", "1.2", "1.3" } ) );
}

TEST( Snc, CallCountIdentityUnderRealTimeouts )
{
    testing::Rng rng( 81 );
    int withTimeouts = 0;
    for ( int trial = 0; trial < 30; ++trial )
    {
        VnnFormula f = testing::random_robustness_query( rng, testing::random_network( rng ) ).formula;
        for ( std::size_t n : { 2u, 4u } )
        {
            SncConfig config = small_config();
            config.initial_timeout = 1e-6;
            config.online_divides = n;
            config.timeout_factor = 4.0;
            config.solver = default_solver_config( f );
            SncResult r = split_and_conquer( f, config );
            ASSERT_FALSE( r.result.is_timeout() );
            // A Sat answer abandons the queue, so the count is exact only when Unsat.
            if ( r.result.is_unsat() )
                EXPECT_EQ( r.stats.solve_calls, config.initial_divides + n * r.stats.timeouts );
            else
                EXPECT_LE( r.stats.solve_calls, config.initial_divides + n * r.stats.timeouts );
            withTimeouts += r.stats.timeouts > 0;
        }
    }
    EXPECT_GT( withTimeouts, 0 );
}

TEST( Snc, UnsatRunLeavesEndUnsat )
{
    testing::Rng rng( 82 );
    for ( int trial = 0; trial < 30; ++trial )
    {
        VnnFormula f = testing::random_robustness_query( rng, testing::random_network( rng ) ).formula;
        SncConfig config = small_config();
        config.initial_timeout = 1e-6;
        config.timeout_factor = 4.0;
        SncResult r = split_and_conquer( f, config );
        if ( !r.result.is_unsat() )
            continue;
        EXPECT_EQ( r.stats.sat_calls, 0u );
        EXPECT_EQ( r.stats.unsat_calls, r.stats.solve_calls - r.stats.timeouts );
        // Each timed-out call has N children; leaves outnumber internal nodes.
        EXPECT_EQ( r.stats.unsat_calls, config.initial_divides + ( config.online_divides - 1 ) * r.stats.timeouts );
    }
}

TEST( Snc, SatCancelsOutstandingWork )
{
    std::atomic<int> started = 0;
    ScriptedExecutor executor( [&]( const SubQuery &q, std::stop_token stop ) {
        ++started;
        if ( q.id == "1" )
        {
            while ( started < 4 )
                std::this_thread::sleep_for( std::chrono::milliseconds( 1 ) );
            return QueryResult::sat( Assignment( 2, 0.0 ) );
        }
        while ( !stop.stop_requested() )
            std::this_thread::sleep_for( std::chrono::milliseconds( 1 ) );
        return QueryResult::timeout();
    } );
    SncConfig config = small_config();
    config.initial_divides = 4;
    config.workers = 4;
    SncResult r = split_and_conquer( single_relu_unsat(), config, executor );
    EXPECT_TRUE( r.result.is_sat() );
    EXPECT_EQ( r.stats.sat_calls, 1u );
    EXPECT_EQ( r.stats.solve_calls, 1u );
    EXPECT_EQ( r.stats.cancelled, 3u );
}

TEST( Snc, GlobalTimeoutYieldsTimeout )
{
    ScriptedExecutor executor( []( const SubQuery &, std::stop_token ) {
        std::this_thread::sleep_for( std::chrono::milliseconds( 5 ) );
        return QueryResult::timeout();
    } );
    SncConfig config = small_config();
    config.global_timeout = 0.2;
    Clock::time_point start = Clock::now();
    SncResult r = split_and_conquer( single_relu_unsat(), config, executor );
    EXPECT_TRUE( r.result.is_timeout() );
    EXPECT_LT( std::chrono::duration<double>( Clock::now() - start ).count(), 2.0 );
}

TEST( Snc, ExternalStopYieldsTimeout )
{
    std::stop_source source;
    ScriptedExecutor executor( [&]( const SubQuery &, std::stop_token stop ) {
        source.request_stop();
        while ( !stop.stop_requested() )
            std::this_thread::sleep_for( std::chrono::milliseconds( 1 ) );
        return QueryResult::timeout();
    } );
    SncConfig config = small_config();
    config.solver.stop = source.get_token();
    SncResult r = split_and_conquer( single_relu_unsat(), config, executor );
    EXPECT_TRUE( r.result.is_timeout() );
}

TEST( Snc, EngineErrorCarriesPartialStats )
{
    ScriptedExecutor executor( []( const SubQuery &q, std::stop_token ) -> QueryResult {
        if ( q.id == "1" )
            throw EngineError( "iteration cap" );
        return QueryResult::unsat();
    } );
    try
    {
        split_and_conquer( single_relu_unsat(), small_config(), executor );
        FAIL() << "expected SncEngineError";
    }
    catch ( const SncEngineError &e )
    {
        EXPECT_NE( std::string( e.what() ).find( "sub-query 1" ), std::string::npos );
        EXPECT_EQ( e.stats().solve_calls, 1u );
        EXPECT_EQ( e.stats().unsat_calls, 1u );
    }
}

struct GridPoint
{
    std::size_t initial;
    std::size_t online;
    double budget;
    SplitStrategy strategy;
};

TEST( Snc, AgreesWithOracleAcrossConfigurations )
{
    std::vector<GridPoint> grid;
    for ( std::size_t n0 : { 2u, 4u, 8u } )
        for ( std::size_t n : { 2u, 4u } )
            for ( double t0 : { 1e-4, 0.01, 1.0 } )
                for ( SplitStrategy s : { SplitStrategy::Input, SplitStrategy::Relu } )
                    grid.push_back( { n0, n, t0, s } );

    testing::Rng rng( 83 );
    for ( int trial = 0; trial < 12; ++trial )
    {
        VnnFormula f = testing::random_robustness_query( rng, testing::random_network( rng ) ).formula;
        Verdict expected = enumerate_phases_oracle( f, testing::dense_lp_feasible ).verdict;
        for ( const GridPoint &g : grid )
        {
            SncConfig config = small_config();
            config.initial_divides = g.initial;
            config.online_divides = g.online;
            config.initial_timeout = g.budget;
            config.strategy = g.strategy;
            config.solver = default_solver_config( f );
            SncResult r = split_and_conquer( f, config );
            ASSERT_EQ( r.result.verdict, expected ) << "trial " << trial << " N0=" << g.initial << " N=" << g.online
                                                    << " T0=" << g.budget << " " << to_string( g.strategy );
            if ( r.result.is_sat() )
                EXPECT_TRUE( check_assignment( f, r.result.witness, 1e-6 ) );
        }
    }
}

TEST( Snc, VerdictIndependentOfWorkerCount )
{
    testing::Rng rng( 84 );
    for ( int trial = 0; trial < 25; ++trial )
    {
        VnnFormula f = testing::random_robustness_query( rng, testing::random_network( rng ) ).formula;
        std::optional<Verdict> first;
        for ( std::size_t workers : { 1u, 2u, 8u } )
        {
            SncConfig config = small_config();
            config.workers = workers;
            config.initial_timeout = 1e-4;
            config.timeout_factor = 4.0;
            Verdict v = split_and_conquer( f, config ).result.verdict;
            if ( !first )
                first = v;
            EXPECT_EQ( v, *first ) << "trial " << trial << " workers " << workers;
        }
    }
}

TEST( ProcessExecutorTest, AgreesWithInProcess )
{
    ProcessExecutor processes( RELUSNC_CLI_PATH );
    testing::Rng rng( 85 );
    for ( int trial = 0; trial < 8; ++trial )
    {
        VnnFormula f = testing::random_robustness_query( rng, testing::random_network( rng ) ).formula;
        SncConfig config = small_config();
        config.workers = 2;
        SncResult local = split_and_conquer( f, config );
        SncResult remote = split_and_conquer( f, config, processes );
        EXPECT_EQ( remote.result.verdict, local.result.verdict );
        if ( remote.result.is_sat() )
            EXPECT_TRUE( check_assignment( f, remote.result.witness, 1e-6 ) );
    }
}

TEST( ProcessExecutorTest, ScratchDirectoryIsRemoved )
{
    std::filesystem::path scratch;
    {
        ProcessExecutor processes( RELUSNC_CLI_PATH );
        scratch = processes.scratch();
        EXPECT_TRUE( std::filesystem::is_directory( scratch ) );
        split_and_conquer( single_relu_unsat(), small_config(), processes );
    }
    EXPECT_FALSE( std::filesystem::exists( scratch ) );
}

TEST( ProcessExecutorTest, MissingWorkerIsRejected )
{
    EXPECT_THROW( ProcessExecutor( "/nonexistent/relusnc" ), PreconditionError );
}

TEST( ProcessExecutorTest, FailingWorkerIsAnEngineError )
{
    ProcessExecutor processes( "/bin/false" );
    EXPECT_THROW( split_and_conquer( single_relu_unsat(), small_config(), processes ), SncEngineError );
}

} // namespace
} // namespace relusnc
