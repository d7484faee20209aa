#pragma once

// Named run configurations and the top-level driver shared by the CLI and
// the Python module.
//
//   M      sequential solve, no partitioning
//   I      S&C, input splitting
//   R      S&C, ReLU splitting
//   S      S&C, hybrid splitting
//   +D     polarity-based direction (otherwise inactive phase first)
//   +P     iterative propagation before solving

#include "relusnc/iterprop.hpp"
#include "relusnc/snc.hpp"

#include <optional>
#include <string>
#include <vector>

namespace relusnc {

enum class Preset
{
    M,
    I,
    R,
    S,
    SD,
    SP,
    SDP
};

std::string_view to_string( Preset preset );
std::optional<Preset> parse_preset( std::string_view text );
const std::vector<Preset> &all_presets();

struct RunConfig
{
    std::string name = "custom";
    bool sequential = false;
    SncConfig snc;
    bool iterprop = false;
    double per_relu_timeout = kDefaultPerReluTimeout;
};

// Paper defaults for `formula` on `workers` workers.
RunConfig default_run_config( const VnnFormula &formula, std::size_t workers );
RunConfig preset_config( Preset preset, const VnnFormula &formula, std::size_t workers );

struct RunOutcome
{
    QueryResult result;
    RunStats stats;
    std::size_t iterprop_fixed = 0;
    std::size_t iterprop_sweeps = 0;
    double wall_seconds = 0.0;
};

// Runs iterative propagation when enabled, then the sequential solver or
// Split-and-Conquer. The global timeout covers both stages. `executor`
// defaults to in-process solving.
RunOutcome run_query( const VnnFormula &formula, const RunConfig &config, SubQueryExecutor *executor = nullptr );

} // namespace relusnc
