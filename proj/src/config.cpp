#include "fssam/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fssam/error.hpp"

namespace fssam {

namespace {

using json = nlohmann::json;
using Setter = std::function<void(const json&)>;

[[noreturn]] void bad_value(const std::string& key, const std::string& expected) {
  throw Error(ErrorCode::Config, "key '" + key + "': expected " + expected);
}

template <typename T>
Setter integer(const std::string& key, T& field) {
  return [&field, key](const json& v) {
    if (!v.is_number_integer()) bad_value(key, "an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) {
        field = v.get<T>();
      } else {
        if (v.get<std::int64_t>() < 0) bad_value(key, "a non-negative integer");
        field = static_cast<T>(v.get<std::int64_t>());
      }
    } else {
      const auto x = v.get<std::int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) bad_value(key, "a 32-bit integer");
      field = static_cast<T>(x);
    }
  };
}

Setter real(const std::string& key, double& field) {
  return [&field, key](const json& v) {
    if (!v.is_number()) bad_value(key, "a number");
    field = v.get<double>();
  };
}

Setter boolean(const std::string& key, bool& field) {
  return [&field, key](const json& v) {
    if (!v.is_boolean()) bad_value(key, "true or false");
    field = v.get<bool>();
  };
}

void apply(const json& j, const std::map<std::string, Setter>& setters, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::Config, std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(ErrorCode::Config, std::string("unknown ") + what + " key '" + key + "'");
    }
    it->second(value);
  }
}

}  // namespace

std::string to_string(PredictionHead head) {
  return head == PredictionHead::Prior ? "prior" : "fused";
}

std::string to_string(NormAxis axis) { return axis == NormAxis::PerRow ? "row" : "global"; }

nlohmann::ordered_json to_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["imr_iterations"] = cfg.imr_iterations;
  j["alpha"] = cfg.alpha;
  j["epsilon"] = cfg.epsilon;
  j["attention_layers"] = cfg.attention_layers;
  j["memory_gain"] = cfg.memory_gain;
  j["head"] = to_string(cfg.head);
  j["threshold"] = cfg.threshold;
  j["use_imr"] = cfg.use_imr;
  j["use_scma_calibration"] = cfg.use_scma_calibration;
  j["projection_seed"] = cfg.projection_seed;
  j["projection_width"] = cfg.projection_width;
  j["norm_axis"] = to_string(cfg.norm_axis);
  j["threads"] = cfg.threads;
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  const std::map<std::string, Setter> setters{
      {"imr_iterations", integer("imr_iterations", cfg.imr_iterations)},
      {"alpha", real("alpha", cfg.alpha)},
      {"epsilon", real("epsilon", cfg.epsilon)},
      {"attention_layers", integer("attention_layers", cfg.attention_layers)},
      {"memory_gain", real("memory_gain", cfg.memory_gain)},
      {"head",
       [&cfg](const json& v) {
         if (v == "fused") cfg.head = PredictionHead::Fused;
         else if (v == "prior") cfg.head = PredictionHead::Prior;
         else bad_value("head", "\"fused\" or \"prior\"");
       }},
      {"threshold", real("threshold", cfg.threshold)},
      {"use_imr", boolean("use_imr", cfg.use_imr)},
      {"use_scma_calibration", boolean("use_scma_calibration", cfg.use_scma_calibration)},
      {"projection_seed", integer("projection_seed", cfg.projection_seed)},
      {"projection_width", integer("projection_width", cfg.projection_width)},
      {"norm_axis",
       [&cfg](const json& v) {
         if (v == "row") cfg.norm_axis = NormAxis::PerRow;
         else if (v == "global") cfg.norm_axis = NormAxis::Global;
         else bad_value("norm_axis", "\"row\" or \"global\"");
       }},
      {"threads", integer("threads", cfg.threads)},
  };
  apply(j, setters, "pipeline config");
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json to_json(const SynthSpec& spec) {
  nlohmann::ordered_json j;
  j["height"] = spec.height;
  j["width"] = spec.width;
  j["channels"] = spec.channels;
  j["classes"] = spec.classes;
  j["noise_sigma"] = spec.noise_sigma;
  j["distractors"] = spec.distractors;
  j["shots"] = spec.shots;
  j["episodes"] = spec.episodes;
  j["seed"] = spec.seed;
  j["fg_rects"] = spec.fg_rects;
  j["fg_min_fraction"] = spec.fg_min_fraction;
  j["fg_max_fraction"] = spec.fg_max_fraction;
  j["distractor_min_fraction"] = spec.distractor_min_fraction;
  j["distractor_max_fraction"] = spec.distractor_max_fraction;
  j["distractor_affinity"] = spec.distractor_affinity;
  j["intra_class_gap"] = spec.intra_class_gap;
  j["feature_scale"] = spec.feature_scale;
  j["orthogonal_classes"] = spec.orthogonal_classes;
  return j;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  const std::map<std::string, Setter> setters{
      {"height", integer("height", s.height)},
      {"width", integer("width", s.width)},
      {"channels", integer("channels", s.channels)},
      {"classes", integer("classes", s.classes)},
      {"noise_sigma", real("noise_sigma", s.noise_sigma)},
      {"distractors", integer("distractors", s.distractors)},
      {"shots", integer("shots", s.shots)},
      {"episodes", integer("episodes", s.episodes)},
      {"seed", integer("seed", s.seed)},
      {"fg_rects", integer("fg_rects", s.fg_rects)},
      {"fg_min_fraction", real("fg_min_fraction", s.fg_min_fraction)},
      {"fg_max_fraction", real("fg_max_fraction", s.fg_max_fraction)},
      {"distractor_min_fraction", real("distractor_min_fraction", s.distractor_min_fraction)},
      {"distractor_max_fraction", real("distractor_max_fraction", s.distractor_max_fraction)},
      {"distractor_affinity", real("distractor_affinity", s.distractor_affinity)},
      {"intra_class_gap", real("intra_class_gap", s.intra_class_gap)},
      {"feature_scale", real("feature_scale", s.feature_scale)},
      {"orthogonal_classes", boolean("orthogonal_classes", s.orthogonal_classes)},
  };
  apply(j, setters, "synthetic spec");
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.detail());
  }
  return s;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  try {
    return pipeline_config_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(ErrorCode::Config, path.string() + ": " + e.detail());
  }
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  try {
    return synth_spec_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(ErrorCode::Config, path.string() + ": " + e.detail());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace fssam
