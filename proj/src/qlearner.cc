#include "persona_pong/qlearner.h"

#include <algorithm>

namespace persona_pong {

void LearnerConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid learner config: ") + what);
  };
  require(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
  require(batch_size >= 1, "batch_size must be positive");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(target_sync_every >= 1, "target_sync_every must be positive");
  require(learn_start >= batch_size, "learn_start must be >= batch_size");
  require(train_every >= 1, "train_every must be positive");
  require(action_repeat >= 1, "action_repeat must be positive");
  require(huber_threshold > 0.0, "huber_threshold must be positive");
  require(replay_capacity >= batch_size, "replay_capacity must be >= batch");
  require(rms_decay > 0.0 && rms_decay < 1.0, "rms_decay must be in (0, 1)");
  require(rms_epsilon > 0.0, "rms_epsilon must be positive");
  require(std::all_of(hidden_layers.begin(), hidden_layers.end(),
                      [](int n) { return n > 0; }),
          "hidden layer sizes must be positive");
}

std::vector<int> LearnerConfig::LayerSizes(int input_size) const {
  std::vector<int> sizes{input_size};
  sizes.insert(sizes.end(), hidden_layers.begin(), hidden_layers.end());
  sizes.push_back(kNumActions);
  return sizes;
}

double EpsilonSchedule::At(int64_t frame) const {
  if (frame <= 0) return start;
  if (decay_frames <= 0 || frame >= decay_frames) return end;
  const double t = static_cast<double>(frame) / static_cast<double>(decay_frames);
  return start + (end - start) * t;
}

ReplayBuffer::ReplayBuffer(size_t capacity, int obs_size)
    : capacity_(capacity), obs_size_(obs_size) {
  if (capacity == 0) throw ArgumentError("replay capacity must be positive");
  if (obs_size <= 0) throw ArgumentError("observation size must be positive");
  obs_.resize(capacity * obs_size);
  next_obs_.resize(capacity * obs_size);
  actions_.resize(capacity);
  rewards_.resize(capacity);
  terminal_.resize(capacity);
}

void ReplayBuffer::Push(std::span<const float> obs, int action, float reward,
                        std::span<const float> next_obs, bool terminal) {
  if (static_cast<int>(obs.size()) != obs_size_ ||
      static_cast<int>(next_obs.size()) != obs_size_) {
    throw ArgumentError("transition observation has the wrong size");
  }
  size_t slot;
  if (size_ < capacity_) {
    slot = Slot(size_);
    ++size_;
  } else {
    slot = head_;
    head_ = (head_ + 1) % capacity_;
  }
  std::copy(obs.begin(), obs.end(), obs_.begin() + slot * obs_size_);
  std::copy(next_obs.begin(), next_obs.end(),
            next_obs_.begin() + slot * obs_size_);
  actions_[slot] = action;
  rewards_[slot] = reward;
  terminal_[slot] = terminal ? 1 : 0;
  ++pushes_;
}

ReplayBuffer::Ref ReplayBuffer::At(size_t i) const {
  if (i >= size_) throw ArgumentError("replay index out of range");
  const size_t slot = Slot(i);
  const std::span<const float> all_obs(obs_);
  const std::span<const float> all_next(next_obs_);
  return {all_obs.subspan(slot * obs_size_, obs_size_), actions_[slot],
          rewards_[slot], all_next.subspan(slot * obs_size_, obs_size_),
          terminal_[slot] != 0};
}

std::vector<size_t> ReplayBuffer::SampleIndices(size_t batch,
                                                SplitMix64& rng) const {
  if (size_ == 0) throw StateError("cannot sample from an empty buffer");
  std::vector<size_t> indices(batch);
  for (auto& i : indices) i = static_cast<size_t>(rng.Below(size_));
  return indices;
}

std::vector<ReplayBuffer::Ref> ReplayBuffer::Sample(size_t batch,
                                                    SplitMix64& rng) const {
  std::vector<Ref> out;
  out.reserve(batch);
  for (size_t i : SampleIndices(batch, rng)) out.push_back(At(i));
  return out;
}

DqnLearner::DqnLearner(const LearnerConfig& config, int obs_size,
                       uint64_t seed)
    : config_(config),
      online_(config.LayerSizes(obs_size)),
      optimizer_(online_.parameter_count(), config.rms_decay,
                 config.rms_epsilon),
      buffer_(static_cast<size_t>(config.replay_capacity), obs_size),
      explore_rng_(DeriveSeed(seed, 1)),
      sample_rng_(DeriveSeed(seed, 2)) {
  config_.Validate();
  SplitMix64 init_rng(DeriveSeed(seed, 0));
  online_.InitUniform(init_rng);
  target_ = online_;
}

int DqnLearner::Act(std::span<const float> obs, double epsilon) {
  // Skip the forward pass when the action will be random anyway.
  if (epsilon > 0.0 && explore_rng_.Uniform() < epsilon) {
    return static_cast<int>(explore_rng_.Below(kNumActions));
  }
  auto q = online_.Forward(obs, act_ws_);
  return SelectAction<float>(q, 0.0, explore_rng_);
}

std::optional<double> DqnLearner::Observe(std::span<const float> obs,
                                          int action, float reward,
                                          std::span<const float> next_obs,
                                          bool terminal) {
  buffer_.Push(obs, action, reward, next_obs, terminal);
  ++transitions_;
  if (static_cast<int64_t>(buffer_.size()) < config_.learn_start ||
      transitions_ % config_.train_every != 0) {
    return std::nullopt;
  }
  const auto batch = buffer_.Sample(config_.batch_size, sample_rng_);
  const auto targets = TdTargets<float>(batch, target_, config_.gamma);
  const double loss =
      ApplyUpdate(online_, optimizer_, std::span<const ReplayBuffer::Ref>(batch),
                  std::span<const double>(targets), config_.learning_rate,
                  config_.huber_threshold);
  ++learner_steps_;
  if (learner_steps_ % config_.target_sync_every == 0) target_ = online_;
  return loss;
}

}  // namespace persona_pong
