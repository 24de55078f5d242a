#pragma once

#include "esn/pipeline.hpp"

#include <json.hpp>

#include <span>
#include <string>

namespace esn {

/// Includes the config echo and a wall_time_s field; every other field is
/// a deterministic function of config and data.
nlohmann::json to_json(const EvaluationReport& report);

/// Reservoir, readout and config of a trained system.
nlohmann::json to_json(const TrainedModel& model);
/// Throws DataError on a malformed or inconsistent model document.
TrainedModel model_from_json(const nlohmann::json& j);

/// Header "parameter,seed,accuracy,runtime_s"; one line per row.
std::string sweep_csv(std::span<const SweepRow> rows);

} // namespace esn
