#include "relusnc/executor.hpp"

#include "relusnc/error.hpp"

#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char **environ;

namespace relusnc {

std::optional<Clock::time_point> budget_deadline( double budget, std::optional<Clock::time_point> limit )
{
    std::optional<Clock::time_point> deadline;
    if ( std::isfinite( budget ) )
        deadline = Clock::now() +
                   std::chrono::duration_cast<Clock::duration>( std::chrono::duration<double>( budget ) );
    if ( limit && ( !deadline || *limit < *deadline ) )
        deadline = limit;
    return deadline;
}

QueryResult InProcessExecutor::run( const SubQuery &query,
                                    const SolverConfig &solver,
                                    std::optional<Clock::time_point> deadline,
                                    std::stop_token stop )
{
    SolverConfig config = solver;
    config.deadline = budget_deadline( query.budget, deadline );
    config.stop = std::move( stop );
    return solve( query.formula, config );
}

namespace {

constexpr auto kPollInterval = std::chrono::milliseconds( 2 );
constexpr auto kGrace = std::chrono::milliseconds( 500 );

std::filesystem::path fresh_scratch()
{
    std::random_device entropy;
    auto base = std::filesystem::temp_directory_path();
    for ( int attempt = 0; attempt < 16; ++attempt )
    {
        auto dir = base / ( "relusnc-" + std::to_string( ::getpid() ) + "-" + std::to_string( entropy() ) );
        if ( std::filesystem::create_directory( dir ) )
            return dir;
    }
    throw EngineError( "cannot create a scratch directory under " + base.string() );
}

std::atomic<std::size_t> nextTicket{ 0 };

} // namespace

ProcessExecutor::ProcessExecutor( std::filesystem::path worker, std::filesystem::path scratch )
    : _worker( std::move( worker ) )
    , _scratch( std::move( scratch ) )
{
    if ( !std::filesystem::exists( _worker ) )
        throw PreconditionError( "worker executable not found: " + _worker.string() );
    if ( _scratch.empty() )
    {
        _scratch = fresh_scratch();
        _ownsScratch = true;
    }
    else
        std::filesystem::create_directories( _scratch );
}

ProcessExecutor::~ProcessExecutor()
{
    if ( _ownsScratch )
    {
        std::error_code ignored;
        std::filesystem::remove_all( _scratch, ignored );
    }
}

QueryResult ProcessExecutor::run( const SubQuery &query,
                                  const SolverConfig &solver,
                                  std::optional<Clock::time_point> deadline,
                                  std::stop_token stop )
{
    std::string ticket = std::to_string( nextTicket++ );
    auto in = _scratch / ( "query-" + ticket + ".txt" );
    auto out = _scratch / ( "result-" + ticket + ".txt" );

    // The child measures its own budget; the remaining global time caps it.
    SubQueryFile file{ query, solver.threshold_t, solver.branching_k_percent, solver.direction };
    std::optional<Clock::time_point> limit = budget_deadline( query.budget, deadline );
    if ( limit )
        file.query.budget = std::max(
            1e-6, std::chrono::duration<double>( *limit - Clock::now() ).count() );
    {
        std::ofstream stream( in );
        write_subquery( stream, file );
        if ( !stream )
            throw EngineError( "cannot write " + in.string() );
    }

    std::string program = _worker.string();
    std::vector<std::string> args{ program, "solve-subquery", "--in", in.string(), "--out", out.string() };
    std::vector<char *> argv;
    for ( auto &arg : args )
        argv.push_back( arg.data() );
    argv.push_back( nullptr );

    pid_t pid = 0;
    if ( int rc = ::posix_spawn( &pid, program.c_str(), nullptr, nullptr, argv.data(), environ ); rc != 0 )
        throw EngineError( "cannot start worker " + program + ": " + std::strerror( rc ) );

    bool killed = false;
    int status = 0;
    while ( true )
    {
        pid_t done = ::waitpid( pid, &status, WNOHANG );
        if ( done == pid )
            break;
        if ( done < 0 && errno != EINTR )
            throw EngineError( std::string( "waitpid failed: " ) + std::strerror( errno ) );
        if ( !killed && ( stop.stop_requested() || ( limit && Clock::now() > *limit + kGrace ) ) )
        {
            ::kill( pid, SIGKILL );
            killed = true;
        }
        std::this_thread::sleep_for( kPollInterval );
    }

    std::error_code ignored;
    std::filesystem::remove( in, ignored );
    if ( killed )
    {
        std::filesystem::remove( out, ignored );
        return QueryResult::timeout();
    }
    if ( !WIFEXITED( status ) || WEXITSTATUS( status ) != 0 )
        throw EngineError( "worker for sub-query " + query.id + " failed with status " + std::to_string( status ) );

    std::ifstream stream( out );
    if ( !stream )
        throw EngineError( "worker produced no result file " + out.string() );
    QueryResult result = read_result( stream, out.string() );
    stream.close();
    std::filesystem::remove( out, ignored );
    return result;
}

} // namespace relusnc
