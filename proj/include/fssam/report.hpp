#pragma once

// Report serialization. JSON output uses insertion-ordered keys so identical
// reports serialize to identical bytes.

#include <string>
#include <vector>

#include "json.hpp"

#include "fssam/pipeline.hpp"

namespace fssam {

nlohmann::ordered_json to_json(const MetricsReport& report);
nlohmann::ordered_json to_json(const AblationReport& report);
nlohmann::ordered_json to_json(const std::vector<LayerScoreStats>& stats);

std::string format_table(const MetricsReport& report);
std::string format_table(const AblationReport& report);
std::string format_table(const std::vector<LayerScoreStats>& stats);

}  // namespace fssam
