#pragma once

// Split-and-Conquer: the query is partitioned into N0 sub-queries solved in
// parallel under budget T0. A sub-query that times out is partitioned into N
// children with budget multiplied by F. The first Sat answer wins; the run is
// Unsat once the queue drains with every worker idle.

#include "relusnc/error.hpp"
#include "relusnc/executor.hpp"
#include "relusnc/formula.hpp"
#include "relusnc/partition.hpp"
#include "relusnc/reluplex.hpp"

#include <optional>
#include <string>
#include <vector>

namespace relusnc {

enum class SplitStrategy
{
    Input,
    Relu,
    Hybrid // Input for at most kHybridInputLimit inputs, Relu otherwise
};

inline constexpr std::size_t kHybridInputLimit = 10;

std::string_view to_string( SplitStrategy strategy );
std::optional<SplitStrategy> parse_split_strategy( std::string_view text );

// Input or Relu; Hybrid is resolved against the formula's input dimension.
SplitStrategy resolve_strategy( SplitStrategy strategy, const VnnFormula &formula );

struct SncConfig
{
    std::size_t initial_divides = 2;
    double initial_timeout = 1.0; // seconds, may be infinite
    std::size_t online_divides = 4;
    double timeout_factor = 1.5;
    SplitStrategy strategy = SplitStrategy::Hybrid;
    std::size_t workers = 1;
    std::optional<double> global_timeout; // seconds
    SolverConfig solver;                  // deadline is set per call

    void validate() const;
};

SncConfig default_config( const VnnFormula &formula, std::size_t workers );

// Partition size 2^floor((5 + log2 p) / 3) for p processors.
std::size_t scaling_partition_size( std::size_t processors );

// Exactly n children. A ReLU split that runs out of unfixed ReLUs is topped
// up by bisecting inputs of each child.
std::vector<VnnFormula> partition( const VnnFormula &formula,
                                   std::size_t n,
                                   SplitStrategy strategy,
                                   double k_percent = 5.0 );

struct CallRecord
{
    std::string id;
    Verdict verdict = Verdict::Timeout;
    double seconds = 0.0;
    double budget = 0.0;
    std::size_t depth = 0;
};

struct RunStats
{
    std::size_t solve_calls = 0;
    std::size_t timeouts = 0;
    std::size_t sat_calls = 0;
    std::size_t unsat_calls = 0;
    std::size_t cancelled = 0; // abandoned after a Sat or global timeout; not in solve_calls
    std::size_t max_depth = 0;
    double wall_time = 0.0;
    std::vector<CallRecord> calls;
};

struct SncResult
{
    QueryResult result;
    RunStats stats;
};

class SncEngineError : public EngineError
{
public:
    SncEngineError( const std::string &message, RunStats stats )
        : EngineError( message )
        , _stats( std::move( stats ) )
    {
    }

    const RunStats &stats() const { return _stats; }

private:
    RunStats _stats;
};

SncResult split_and_conquer( const VnnFormula &formula, const SncConfig &config );
SncResult split_and_conquer( const VnnFormula &formula, const SncConfig &config, SubQueryExecutor &executor );

} // namespace relusnc
