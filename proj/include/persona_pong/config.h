#ifndef PERSONA_PONG_CONFIG_H_
#define PERSONA_PONG_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "persona_pong/arena.h"

namespace persona_pong {

// Every tunable of a run. Resolution order: defaults, then a JSON config
// file, then command-line flags (dotted key names, e.g. learner.gamma).
struct RunConfig {
  CourtConfig court;
  LearnerConfig learner;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.1;
  std::string personality = "id";
  Side side = Side::kLeft;
  ObservationMode obs_mode = ObservationMode::kCompact;
  uint64_t seed = 1;
  int64_t frames = 300000;
  int64_t snapshot_every = 50000;
  int matches = 1000;
  double epsilon = 0.0;  // evaluation exploration
  int workers = 1;
  bool mirror = false;
  std::string out_dir = "out";

  void Validate() const;
  TrainConfig ToTrainConfig() const;
};

nlohmann::json ToJson(const RunConfig& config);
// Keys absent from `j` keep their current values; unknown keys throw
// ConfigError.
void MergeJson(RunConfig& config, const nlohmann::json& j);

// Dotted names of every leaf setting, in a stable order.
std::vector<std::string> ConfigKeys();

// Sets one dotted key from its textual value, parsed according to the
// type of the current value. Throws ConfigError for unknown keys or bad
// values.
void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value);

RunConfig LoadConfigFile(const std::string& path, RunConfig base = {});

}  // namespace persona_pong

#endif  // PERSONA_PONG_CONFIG_H_
