#pragma once

// Backends that run one sub-query under its budget. The orchestrator calls
// run() concurrently from several worker threads.

#include "relusnc/reluplex.hpp"
#include "relusnc/serialize.hpp"

#include <filesystem>
#include <stop_token>
#include <string>

namespace relusnc {

class SubQueryExecutor
{
public:
    virtual ~SubQueryExecutor() = default;

    // Returns Timeout once the budget (or `deadline`, whichever is earlier)
    // passes or `stop` is requested.
    virtual QueryResult run( const SubQuery &query,
                             const SolverConfig &solver,
                             std::optional<Clock::time_point> deadline,
                             std::stop_token stop ) = 0;
};

class InProcessExecutor : public SubQueryExecutor
{
public:
    QueryResult run( const SubQuery &query,
                     const SolverConfig &solver,
                     std::optional<Clock::time_point> deadline,
                     std::stop_token stop ) override;
};

// Runs each sub-query in a child process: `<worker> solve-subquery --in F
// --out G`, exchanging the text formats from serialize.hpp through files in
// a scratch directory. The child is killed on stop or when the budget plus
// a grace period elapses.
class ProcessExecutor : public SubQueryExecutor
{
public:
    explicit ProcessExecutor( std::filesystem::path worker, std::filesystem::path scratch = {} );
    ~ProcessExecutor() override;

    QueryResult run( const SubQuery &query,
                     const SolverConfig &solver,
                     std::optional<Clock::time_point> deadline,
                     std::stop_token stop ) override;

    const std::filesystem::path &scratch() const { return _scratch; }

private:
    std::filesystem::path _worker;
    std::filesystem::path _scratch;
    bool _ownsScratch = false;
};

// Deadline for a call starting now with `budget` seconds, capped by `limit`.
std::optional<Clock::time_point> budget_deadline( double budget, std::optional<Clock::time_point> limit );

} // namespace relusnc
