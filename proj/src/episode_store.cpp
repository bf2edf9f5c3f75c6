#include "fssam/episode_store.hpp"

#include <cstdio>

#include "fssam/config.hpp"
#include "fssam/error.hpp"
#include "fssam/fssf.hpp"

namespace fssam {

namespace fs = std::filesystem;

namespace {

std::string episode_dir(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ep%05d", index);
  return buf;
}

nlohmann::ordered_json write_episode(const fs::path& root, int index, const Episode& ep,
                                     const SoftMask* distractors) {
  const std::string sub = episode_dir(index);
  fs::create_directories(root / sub);
  nlohmann::ordered_json e;
  e["id"] = ep.id;
  e["class_id"] = ep.class_id;
  e["query"] = sub + "/query.fssf";
  e["query_mask"] = sub + "/query_mask.fssf";
  fssf::write_file(root / sub / "query.fssf", ep.query);
  fssf::write_file(root / sub / "query_mask.fssf", ep.query_mask);
  if (distractors != nullptr) {
    e["query_distractors"] = sub + "/query_distractors.fssf";
    fssf::write_file(root / sub / "query_distractors.fssf", *distractors);
  }
  auto& supports = e["supports"] = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < ep.supports.size(); ++s) {
    const std::string stem = sub + "/support" + std::to_string(s);
    fssf::write_file(root / (stem + ".fssf"), ep.supports[s].features);
    fssf::write_file(root / (stem + "_mask.fssf"), ep.supports[s].mask);
    supports.push_back({{"features", stem + ".fssf"}, {"mask", stem + "_mask.fssf"}});
  }
  return e;
}

void write_manifest(const fs::path& dir, nlohmann::ordered_json manifest) {
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::Config, where + ": missing '" + key + "'");
  }
  return obj.at(key);
}

fs::path tensor_path(const fs::path& dir, const nlohmann::json& v, const std::string& where) {
  if (!v.is_string()) throw Error(ErrorCode::Config, where + ": expected a relative path string");
  return dir / v.get<std::string>();
}

int int_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number_integer()) throw Error(ErrorCode::Config, where + ": '" + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace

void write_episode_set(const fs::path& dir, const SyntheticSet& set, const SynthSpec& spec) {
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "fssam-episodes";
  manifest["version"] = kEpisodeStoreVersion;
  manifest["spec"] = to_json(spec);
  auto& list = manifest["episodes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < set.episodes.size(); ++i) {
    const auto& se = set.episodes[i];
    list.push_back(write_episode(dir, static_cast<int>(i), se.episode, &se.query_distractors));
  }
  write_manifest(dir, std::move(manifest));
}

void write_episode_set(const fs::path& dir, const std::vector<Episode>& episodes) {
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "fssam-episodes";
  manifest["version"] = kEpisodeStoreVersion;
  auto& list = manifest["episodes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    list.push_back(write_episode(dir, static_cast<int>(i), episodes[i], nullptr));
  }
  write_manifest(dir, std::move(manifest));
}

StoredSet read_episode_set(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw Error(ErrorCode::Io, "no manifest.json in " + dir.string());
  }
  const nlohmann::json manifest = read_json_file(manifest_path);
  const std::string where = manifest_path.string();
  if (field(manifest, "format", where) != "fssam-episodes") {
    throw Error(ErrorCode::Config, where + ": not an episode manifest");
  }
  if (int_field(manifest, "version", where) != kEpisodeStoreVersion) {
    throw Error(ErrorCode::UnsupportedVersion, where + ": unsupported manifest version");
  }
  const auto& list = field(manifest, "episodes", where);
  if (!list.is_array()) throw Error(ErrorCode::Config, where + ": 'episodes' must be an array");

  StoredSet out;
  if (manifest.contains("spec")) out.spec = manifest.at("spec");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& e = list[i];
    const std::string at = where + ": episodes[" + std::to_string(i) + "]";
    Episode ep;
    ep.id = int_field(e, "id", at);
    ep.class_id = int_field(e, "class_id", at);
    ep.query = fssf::read_features(tensor_path(dir, field(e, "query", at), at));
    ep.query_mask = fssf::read_mask(tensor_path(dir, field(e, "query_mask", at), at));
    const auto& supports = field(e, "supports", at);
    if (!supports.is_array()) throw Error(ErrorCode::Config, at + ": 'supports' must be an array");
    for (const auto& s : supports) {
      ep.supports.push_back({fssf::read_features(tensor_path(dir, field(s, "features", at), at)),
                             fssf::read_mask(tensor_path(dir, field(s, "mask", at), at))});
    }
    if (e.contains("query_distractors")) {
      out.query_distractors.emplace_back(
          fssf::read_mask(tensor_path(dir, e.at("query_distractors"), at)));
    } else {
      out.query_distractors.emplace_back(std::nullopt);
    }
    out.episodes.push_back(std::move(ep));
  }
  return out;
}

}  // namespace fssam
