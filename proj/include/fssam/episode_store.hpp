#pragma once

// On-disk episode sets: a directory holding manifest.json plus one FSSF file
// per tensor. Paths inside the manifest are relative to the directory.

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"

#include "fssam/datagen.hpp"

namespace fssam {

inline constexpr int kEpisodeStoreVersion = 1;

struct StoredSet {
  std::vector<Episode> episodes;
  /// Generator distractor masks, one per episode, when the set was synthetic.
  std::vector<std::optional<SoftMask>> query_distractors;
  /// Generator spec, when recorded.
  std::optional<nlohmann::json> spec;
};

void write_episode_set(const std::filesystem::path& dir, const SyntheticSet& set,
                       const SynthSpec& spec);
void write_episode_set(const std::filesystem::path& dir, const std::vector<Episode>& episodes);

/// Throws Io for missing files, Config for a malformed manifest, and the FSSF
/// error codes for bad tensor files.
StoredSet read_episode_set(const std::filesystem::path& dir);

}  // namespace fssam
