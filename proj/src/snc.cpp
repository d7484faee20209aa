#include "relusnc/snc.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

namespace relusnc {

std::string_view to_string( SplitStrategy strategy )
{
    switch ( strategy )
    {
    case SplitStrategy::Input:
        return "input";
    case SplitStrategy::Relu:
        return "relu";
    case SplitStrategy::Hybrid:
        return "hybrid";
    }
    return "?";
}

std::optional<SplitStrategy> parse_split_strategy( std::string_view text )
{
    for ( SplitStrategy strategy : { SplitStrategy::Input, SplitStrategy::Relu, SplitStrategy::Hybrid } )
        if ( text == to_string( strategy ) )
            return strategy;
    return std::nullopt;
}

SplitStrategy resolve_strategy( SplitStrategy strategy, const VnnFormula &formula )
{
    if ( strategy != SplitStrategy::Hybrid )
        return strategy;
    return formula.inputs.size() <= kHybridInputLimit ? SplitStrategy::Input : SplitStrategy::Relu;
}

void SncConfig::validate() const
{
    auto requirePartition = []( std::size_t n, const char *name ) {
        if ( n < 2 || !is_power_of_two( n ) )
            throw PreconditionError( std::string( name ) + " must be a power of two >= 2, got " + std::to_string( n ) );
    };
    requirePartition( initial_divides, "initial divides" );
    requirePartition( online_divides, "online divides" );
    if ( !( initial_timeout > 0.0 ) )
        throw PreconditionError( "initial timeout must be positive" );
    if ( !( timeout_factor > 1.0 ) || !std::isfinite( timeout_factor ) )
        throw PreconditionError( "timeout factor must be a finite number > 1" );
    if ( workers == 0 )
        throw PreconditionError( "at least one worker is required" );
    if ( global_timeout && !( *global_timeout > 0.0 ) )
        throw PreconditionError( "global timeout must be positive" );
    solver.validate();
}

SncConfig default_config( const VnnFormula &formula, std::size_t workers )
{
    if ( workers == 0 )
        throw PreconditionError( "at least one worker is required" );
    SncConfig config;
    config.initial_divides = 2;
    while ( config.initial_divides < workers )
        config.initial_divides *= 2;
    config.initial_timeout = std::max( 1.0, 0.1 * static_cast<double>( formula.relus.size() ) );
    config.online_divides = 4;
    config.timeout_factor = 1.5;
    config.strategy = SplitStrategy::Hybrid;
    config.workers = workers;
    config.solver = default_solver_config( formula );
    return config;
}

std::size_t scaling_partition_size( std::size_t processors )
{
    if ( processors == 0 )
        throw PreconditionError( "at least one processor is required" );
    std::size_t log2p = 0;
    while ( ( std::size_t{ 2 } << log2p ) <= processors )
        ++log2p;
    return std::size_t{ 1 } << ( ( 5 + log2p ) / 3 );
}

namespace {

// `m` children of one formula by input bisection, or plain copies when there
// is nothing to bisect.
void bisect_into( const VnnFormula &formula, std::size_t m, std::vector<VnnFormula> &out )
{
    if ( m == 1 )
    {
        out.push_back( formula );
        return;
    }
    if ( formula.bounds.empty() || formula.inputs.empty() )
    {
        out.insert( out.end(), m, formula );
        return;
    }
    for ( auto &child : partition_input( formula, m ).children )
        out.push_back( std::move( child ) );
}

} // namespace

std::vector<VnnFormula> partition( const VnnFormula &formula,
                                   std::size_t n,
                                   SplitStrategy strategy,
                                   double k_percent )
{
    std::vector<VnnFormula> children;
    if ( resolve_strategy( strategy, formula ) == SplitStrategy::Input )
    {
        bisect_into( formula, n, children );
        return children;
    }

    PartitionResult split = partition_relu( formula, n, k_percent );
    std::size_t perChild = n / split.children.size();
    children.reserve( n );
    for ( const auto &child : split.children )
        bisect_into( child, perChild, children );
    return children;
}

namespace {

double seconds_since( Clock::time_point start )
{
    return std::chrono::duration<double>( Clock::now() - start ).count();
}

class Coordinator
{
public:
    Coordinator( const SncConfig &config, SubQueryExecutor &executor )
        : _config( config )
        , _executor( executor )
    {
    }

    SncResult run( const VnnFormula &formula )
    {
        _start = Clock::now();
        if ( _config.global_timeout )
            _globalDeadline = _start + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>( *_config.global_timeout ) );

        std::stop_callback forward( _config.solver.stop, [this] {
            _stop.request_stop();
            _wake.notify_all();
        } );

        std::vector<VnnFormula> initial = partition(
            formula, _config.initial_divides, _config.strategy, _config.solver.branching_k_percent );
        for ( std::size_t i = 0; i < initial.size(); ++i )
            _queue.push_back( { std::move( initial[i] ), _config.initial_timeout, 1, std::to_string( i ) } );

        if ( _config.workers == 1 )
            work();
        else
        {
            std::vector<std::jthread> pool;
            for ( std::size_t w = 0; w < _config.workers; ++w )
                pool.emplace_back( [this] { work(); } );
        }

        _stats.wall_time = seconds_since( _start );
        if ( _failure )
            throw SncEngineError( _failure->message, std::move( _stats ) );

        SncResult result;
        if ( _sat )
            result.result = std::move( *_sat );
        else if ( _timedOut || _stop.stop_requested() || !_queue.empty() )
            result.result = QueryResult::timeout();
        else
            result.result = QueryResult::unsat();
        result.stats = std::move( _stats );
        return result;
    }

private:
    struct Failure
    {
        std::string message;
    };

    bool finished() const { return _sat || _failure || _timedOut || _stop.stop_requested(); }

    void work()
    {
        while ( true )
        {
            SubQuery query;
            {
                std::unique_lock lock( _mutex );
                while ( true )
                {
                    if ( finished() )
                        return;
                    if ( _globalDeadline && Clock::now() >= *_globalDeadline )
                    {
                        _timedOut = true;
                        halt();
                        return;
                    }
                    if ( !_queue.empty() )
                        break;
                    if ( _inFlight == 0 )
                    {
                        _wake.notify_all();
                        return;
                    }
                    _wake.wait_for( lock, std::chrono::milliseconds( 20 ) );
                }
                query = std::move( _queue.front() );
                _queue.pop_front();
                ++_inFlight;
            }
            process( std::move( query ) );
        }
    }

    // Caller holds the lock.
    void halt()
    {
        _stop.request_stop();
        _wake.notify_all();
    }

    void process( SubQuery query )
    {
        Clock::time_point started = Clock::now();
        QueryResult answer;
        std::optional<std::string> error;
        try
        {
            answer = _executor.run( query, _config.solver, _globalDeadline, _stop.get_token() );
        }
        catch ( const std::exception &e )
        {
            error = "sub-query " + query.id + ": " + e.what();
        }
        double elapsed = seconds_since( started );

        // Partitioning runs outside the lock; the call stays in flight so the
        // queue cannot be judged drained meanwhile.
        std::vector<VnnFormula> children;
        bool expand = !error && answer.is_timeout() && !_stop.stop_requested() &&
                      !( _globalDeadline && Clock::now() >= *_globalDeadline );
        if ( expand )
        {
            try
            {
                children = partition( query.formula,
                                      _config.online_divides,
                                      _config.strategy,
                                      _config.solver.branching_k_percent );
            }
            catch ( const std::exception &e )
            {
                error = "partitioning sub-query " + query.id + ": " + e.what();
            }
        }

        std::unique_lock lock( _mutex );
        --_inFlight;
        if ( error )
        {
            _failure = Failure{ *error };
            halt();
            return;
        }

        if ( answer.is_timeout() && !expand )
        {
            // Interrupted by a winner, an external stop, or the global deadline.
            if ( _stop.stop_requested() )
            {
                ++_stats.cancelled;
                _wake.notify_all();
                return;
            }
            record( query, answer.verdict, elapsed );
            _timedOut = true;
            halt();
            return;
        }

        record( query, answer.verdict, elapsed );
        if ( answer.is_sat() )
        {
            if ( !_sat )
            {
                _sat = std::move( answer );
                halt();
            }
            return;
        }
        if ( answer.is_timeout() )
        {
            double budget = query.budget * _config.timeout_factor;
            for ( std::size_t i = 0; i < children.size(); ++i )
                _queue.push_back( { std::move( children[i] ), budget, query.depth + 1, query.id + "." + std::to_string( i ) } );
        }
        _wake.notify_all();
    }

    void record( const SubQuery &query, Verdict verdict, double elapsed )
    {
        ++_stats.solve_calls;
        switch ( verdict )
        {
        case Verdict::Sat:
            ++_stats.sat_calls;
            break;
        case Verdict::Unsat:
            ++_stats.unsat_calls;
            break;
        case Verdict::Timeout:
            ++_stats.timeouts;
            break;
        }
        _stats.max_depth = std::max( _stats.max_depth, query.depth );
        _stats.calls.push_back( { query.id, verdict, elapsed, query.budget, query.depth } );
    }

    const SncConfig &_config;
    SubQueryExecutor &_executor;
    Clock::time_point _start;
    std::optional<Clock::time_point> _globalDeadline;
    std::stop_source _stop;

    std::mutex _mutex;
    std::condition_variable _wake;
    std::deque<SubQuery> _queue;
    std::size_t _inFlight = 0;
    std::optional<QueryResult> _sat;
    std::optional<Failure> _failure;
    bool _timedOut = false;
    RunStats _stats;
};

} // namespace

SncResult split_and_conquer( const VnnFormula &formula, const SncConfig &config, SubQueryExecutor &executor )
{
    config.validate();
    formula.validate();
    return Coordinator( config, executor ).run( formula );
}

SncResult split_and_conquer( const VnnFormula &formula, const SncConfig &config )
{
    InProcessExecutor executor;
    return split_and_conquer( formula, config, executor );
}

} // namespace relusnc
