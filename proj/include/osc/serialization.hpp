#pragma once

#include <json.hpp>

#include "osc/geometry.hpp"
#include "osc/losses.hpp"
#include "osc/synth.hpp"
#include "osc/trainer.hpp"

// JSON documents for configs and reports. Readers accept partial documents
// (missing keys keep their defaults) and reject unknown keys.

namespace osc {

nlohmann::json to_json(const LossConfig& cfg);
LossConfig loss_config_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const nlohmann::json& doc);

/// {"losses": [...], "seeds": [...]} or {"num_seeds": n, "first_seed": s},
/// plus "dataset", "fit" and "use_image".
nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_spec_from_json(const nlohmann::json& doc);

/// Breakdown without the gradient fields.
nlohmann::json to_json(const LossBreakdown& breakdown, const LossConfig& cfg);
LossBreakdown loss_breakdown_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const OffsetResult& result);
OffsetResult offset_result_from_json(const nlohmann::json& doc);

/// Parses JSON text, mapping syntax errors to InvalidArgument.
nlohmann::json parse_json(const std::string& text);

}  // namespace osc
