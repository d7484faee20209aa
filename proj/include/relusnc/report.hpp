#pragma once

// Machine-readable run report; the layout is pinned by
// docs/report.schema.json.

#include "relusnc/presets.hpp"

#include <nlohmann/json.hpp>

namespace relusnc {

nlohmann::json config_json( const RunConfig &config );

// `formula` supplies the input/output variables used to project a witness.
nlohmann::json report_json( const RunOutcome &outcome, const RunConfig &config, const VnnFormula &formula );

} // namespace relusnc
