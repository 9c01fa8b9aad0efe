#include "persona_pong/config.h"

#include <fstream>
#include <sstream>

#include "persona_pong/errors.h"

namespace persona_pong {
namespace {

using nlohmann::json;

RunConfig FromJson(const json& j) {
  RunConfig c;
  const json& court = j.at("court");
  c.court.paddle_height = court.at("paddle_height").get<double>();
  c.court.paddle_step = court.at("paddle_step").get<double>();
  c.court.ball_speed_initial = court.at("ball_speed_initial").get<double>();
  c.court.speed_multiplier = court.at("speed_multiplier").get<double>();
  c.court.speed_cap = court.at("speed_cap").get<double>();
  c.court.max_bounce_angle_deg = court.at("max_bounce_angle_deg").get<double>();
  c.court.serve_angle_deg = court.at("serve_angle_deg").get<double>();
  c.court.ball_size = court.at("ball_size").get<double>();
  c.court.points_to_win = court.at("points_to_win").get<int>();
  c.court.max_ticks_per_point = court.at("max_ticks_per_point").get<int>();

  const json& learner = j.at("learner");
  c.learner.gamma = learner.at("gamma").get<double>();
  c.learner.batch_size = learner.at("batch_size").get<int>();
  c.learner.learning_rate = learner.at("learning_rate").get<double>();
  c.learner.target_sync_every = learner.at("target_sync_every").get<int>();
  c.learner.learn_start = learner.at("learn_start").get<int>();
  c.learner.action_repeat = learner.at("action_repeat").get<int>();
  c.learner.train_every = learner.at("train_every").get<int>();
  c.learner.huber_threshold = learner.at("huber_threshold").get<double>();
  c.learner.replay_capacity = learner.at("replay_capacity").get<int>();
  c.learner.rms_decay = learner.at("rms_decay").get<double>();
  c.learner.rms_epsilon = learner.at("rms_epsilon").get<double>();
  c.learner.hidden_layers = learner.at("hidden_layers").get<std::vector<int>>();

  const json& schedule = j.at("schedule");
  c.epsilon_start = schedule.at("epsilon_start").get<double>();
  c.epsilon_end = schedule.at("epsilon_end").get<double>();
  c.epsilon_decay_fraction = schedule.at("decay_fraction").get<double>();

  c.personality = j.at("personality").get<std::string>();
  c.side = ParseSide(j.at("side").get<std::string>());
  c.obs_mode = ParseObservationMode(j.at("obs").get<std::string>());
  c.seed = j.at("seed").get<uint64_t>();
  c.frames = j.at("frames").get<int64_t>();
  c.snapshot_every = j.at("snapshot_every").get<int64_t>();
  c.matches = j.at("matches").get<int>();
  c.epsilon = j.at("epsilon").get<double>();
  c.workers = j.at("workers").get<int>();
  c.mirror = j.at("mirror").get<bool>();
  c.out_dir = j.at("out").get<std::string>();
  return c;
}

// Leaves are scalars and arrays; only objects are descended into.
void CollectKeys(const json& j, const std::string& prefix,
                 std::vector<std::string>& keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      CollectKeys(*it, key, keys);
    } else {
      keys.push_back(key);
    }
  }
}

json::json_pointer PointerFor(const std::string& dotted) {
  std::string path = "/" + dotted;
  for (char& ch : path) {
    if (ch == '.') ch = '/';
  }
  return json::json_pointer(path);
}

void CheckKnownKeys(const json& patch, const json& known,
                    const std::string& prefix) {
  if (!patch.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!known.contains(it.key())) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    if (known[it.key()].is_object()) {
      CheckKnownKeys(*it, known[it.key()], key);
    }
  }
}

}  // namespace

void RunConfig::Validate() const {
  court.Validate();
  learner.Validate();
  PersonaRegistry::Global().Find(personality);
  if (frames < 0) throw ConfigError("frames must be non-negative");
  if (snapshot_every < 1) throw ConfigError("snapshot_every must be >= 1");
  if (matches < 1) throw ConfigError("matches must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

TrainConfig RunConfig::ToTrainConfig() const {
  TrainConfig t;
  t.court = court;
  t.learner = learner;
  t.epsilon_start = epsilon_start;
  t.epsilon_end = epsilon_end;
  t.epsilon_decay_fraction = epsilon_decay_fraction;
  t.personality = personality;
  t.side = side;
  t.obs_mode = obs_mode;
  t.total_frames = frames;
  t.snapshot_every = snapshot_every;
  t.seed = seed;
  t.out_dir = out_dir;
  return t;
}

json ToJson(const RunConfig& c) {
  return {
      {"court",
       {{"paddle_height", c.court.paddle_height},
        {"paddle_step", c.court.paddle_step},
        {"ball_speed_initial", c.court.ball_speed_initial},
        {"speed_multiplier", c.court.speed_multiplier},
        {"speed_cap", c.court.speed_cap},
        {"max_bounce_angle_deg", c.court.max_bounce_angle_deg},
        {"serve_angle_deg", c.court.serve_angle_deg},
        {"ball_size", c.court.ball_size},
        {"points_to_win", c.court.points_to_win},
        {"max_ticks_per_point", c.court.max_ticks_per_point}}},
      {"learner",
       {{"gamma", c.learner.gamma},
        {"batch_size", c.learner.batch_size},
        {"learning_rate", c.learner.learning_rate},
        {"target_sync_every", c.learner.target_sync_every},
        {"learn_start", c.learner.learn_start},
        {"action_repeat", c.learner.action_repeat},
        {"train_every", c.learner.train_every},
        {"huber_threshold", c.learner.huber_threshold},
        {"replay_capacity", c.learner.replay_capacity},
        {"rms_decay", c.learner.rms_decay},
        {"rms_epsilon", c.learner.rms_epsilon},
        {"hidden_layers", c.learner.hidden_layers}}},
      {"schedule",
       {{"epsilon_start", c.epsilon_start},
        {"epsilon_end", c.epsilon_end},
        {"decay_fraction", c.epsilon_decay_fraction}}},
      {"personality", c.personality},
      {"side", SideName(c.side)},
      {"obs", ObservationModeName(c.obs_mode)},
      {"seed", c.seed},
      {"frames", c.frames},
      {"snapshot_every", c.snapshot_every},
      {"matches", c.matches},
      {"epsilon", c.epsilon},
      {"workers", c.workers},
      {"mirror", c.mirror},
      {"out", c.out_dir},
  };
}

void MergeJson(RunConfig& config, const json& patch) {
  json merged = ToJson(config);
  CheckKnownKeys(patch, merged, "");
  merged.merge_patch(patch);
  try {
    config = FromJson(merged);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  CollectKeys(ToJson(RunConfig{}), "", keys);
  return keys;
}

void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value) {
  json j = ToJson(config);
  const auto ptr = PointerFor(key);
  if (!j.contains(ptr) || j.at(ptr).is_object()) {
    throw ConfigError("unknown config key '" + key + "'");
  }
  json& slot = j.at(ptr);
  try {
    size_t used = 0;
    switch (slot.type()) {
      case json::value_t::boolean:
        if (value == "true" || value == "1") {
          slot = true;
        } else if (value == "false" || value == "0") {
          slot = false;
        } else {
          throw ConfigError("expected true/false");
        }
        break;
      case json::value_t::number_unsigned:
        slot = std::stoull(value, &used);
        break;
      case json::value_t::number_integer:
        slot = std::stoll(value, &used);
        break;
      case json::value_t::number_float:
        slot = std::stod(value, &used);
        break;
      case json::value_t::array: {
        json arr = json::array();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) arr.push_back(std::stoi(item));
        slot = arr;
        break;
      }
      default:
        slot = value;
    }
    if (used != 0 && used != value.size()) {
      throw ConfigError("trailing characters");
    }
    config = FromJson(j);
  } catch (const ConfigError& e) {
    throw ConfigError("bad value '" + value + "' for " + key + ": " +
                      e.what());
  } catch (const std::exception& e) {
    throw ConfigError("bad value '" + value + "' for " + key + ": " +
                      e.what());
  }
}

RunConfig LoadConfigFile(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  MergeJson(base, j);
  return base;
}

}  // namespace persona_pong
