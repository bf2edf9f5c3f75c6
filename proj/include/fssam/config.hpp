#pragma once

// JSON mapping for PipelineConfig and SynthSpec. Every key is optional and
// defaults to the struct's default; unknown keys are rejected by name.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "fssam/datagen.hpp"
#include "fssam/pipeline.hpp"

namespace fssam {

nlohmann::ordered_json to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

/// Parses a file; throws Config (parse errors, unknown keys, bad values) or Io.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
SynthSpec load_synth_spec(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string to_string(PredictionHead head);
std::string to_string(NormAxis axis);

}  // namespace fssam
