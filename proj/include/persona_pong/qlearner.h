#ifndef PERSONA_PONG_QLEARNER_H_
#define PERSONA_PONG_QLEARNER_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "persona_pong/court.h"
#include "persona_pong/errors.h"
#include "persona_pong/mlp.h"
#include "persona_pong/rng.h"

namespace persona_pong {

struct LearnerConfig {
  double gamma = 0.99;
  int batch_size = 32;
  double learning_rate = 2.5e-4;
  int target_sync_every = 1000;  // learner steps
  int learn_start = 5000;        // transitions stored before learning
  int action_repeat = 4;         // environment steps per agent decision
  int train_every = 1;           // decisions per gradient step
  double huber_threshold = 1.0;
  int replay_capacity = 100000;
  double rms_decay = 0.95;
  double rms_epsilon = 1e-6;
  std::vector<int> hidden_layers{64, 64};

  void Validate() const;
  std::vector<int> LayerSizes(int input_size) const;
};

// Linear decay from `start` to `end` over `decay_frames`, then constant.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  int64_t decay_frames = 100000;

  double At(int64_t frame) const;
};

// Greedy choice with ties to the lowest index, or a uniform random action
// with probability epsilon. The rng is consulted only when epsilon > 0.
template <typename Real>
int SelectAction(std::span<const Real> values, double epsilon,
                 SplitMix64& rng) {
  if (values.empty()) throw ArgumentError("no action values to select from");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ArgumentError("epsilon must lie in [0, 1]");
  }
  if (epsilon > 0.0 && rng.Uniform() < epsilon) {
    return static_cast<int>(rng.Below(values.size()));
  }
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

// Fixed-capacity FIFO store of transitions with uniform sampling.
class ReplayBuffer {
 public:
  struct Ref {
    std::span<const float> obs;
    int action;
    float reward;
    std::span<const float> next_obs;
    bool terminal;
  };

  ReplayBuffer(size_t capacity, int obs_size);

  void Push(std::span<const float> obs, int action, float reward,
            std::span<const float> next_obs, bool terminal);

  size_t size() const { return size_; }
  size_t capacity() const { return capacity_; }
  int obs_size() const { return obs_size_; }
  uint64_t pushes() const { return pushes_; }

  // i-th stored transition, oldest first.
  Ref At(size_t i) const;

  // Uniform with replacement. Throws StateError when empty.
  std::vector<size_t> SampleIndices(size_t batch, SplitMix64& rng) const;
  std::vector<Ref> Sample(size_t batch, SplitMix64& rng) const;

 private:
  size_t Slot(size_t i) const { return (head_ + i) % capacity_; }

  size_t capacity_;
  int obs_size_;
  size_t size_ = 0;
  size_t head_ = 0;  // slot of the oldest transition
  uint64_t pushes_ = 0;
  std::vector<float> obs_;
  std::vector<float> next_obs_;
  std::vector<int> actions_;
  std::vector<float> rewards_;
  std::vector<uint8_t> terminal_;
};

// r for terminal transitions, r + gamma * max_a Q_target(s', a) otherwise.
template <typename Real>
std::vector<double> TdTargets(std::span<const ReplayBuffer::Ref> batch,
                              const Mlp<Real>& target, double gamma) {
  std::vector<double> targets;
  targets.reserve(batch.size());
  typename Mlp<Real>::Workspace ws;
  for (const auto& t : batch) {
    double y = t.reward;
    if (!t.terminal) {
      auto q = target.Forward(t.next_obs, ws);
      y += gamma * static_cast<double>(*std::max_element(q.begin(), q.end()));
    }
    targets.push_back(y);
  }
  return targets;
}

// Huber(q(s, a) - target) averaged over the batch, accumulating its gradient
// into `grad` (which must be zeroed by the caller).
template <typename Real>
double HuberLossAndGradient(const Mlp<Real>& qf,
                            std::span<const ReplayBuffer::Ref> batch,
                            std::span<const double> targets, double threshold,
                            std::span<Real> grad) {
  if (batch.empty() || batch.size() != targets.size()) {
    throw ArgumentError("batch and targets must be non-empty and aligned");
  }
  typename Mlp<Real>::Workspace ws;
  std::vector<Real> grad_out(qf.output_size());
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (size_t k = 0; k < batch.size(); ++k) {
    auto q = qf.Forward(batch[k].obs, ws);
    const int a = batch[k].action;
    const double err = static_cast<double>(q[a]) - targets[k];
    const double abs_err = std::abs(err);
    loss += abs_err <= threshold ? 0.5 * err * err
                                 : threshold * (abs_err - 0.5 * threshold);
    std::fill(grad_out.begin(), grad_out.end(), Real(0));
    grad_out[a] =
        static_cast<Real>(std::clamp(err, -threshold, threshold) * scale);
    qf.Backward(ws, grad_out, grad);
  }
  return loss * scale;
}

// Gradient step scaled by a running mean of squared gradients.
template <typename Real>
class RmsProp {
 public:
  RmsProp(size_t n, double decay, double epsilon)
      : mean_square_(n, Real(0)), decay_(decay), epsilon_(epsilon) {}

  void Apply(std::span<Real> params, std::span<const Real> grad, double lr) {
    for (size_t i = 0; i < params.size(); ++i) {
      const double g = grad[i];
      double& ms = mean_square_[i];
      ms = decay_ * ms + (1.0 - decay_) * g * g;
      if (g == 0.0) continue;
      params[i] -= static_cast<Real>(lr * g / (std::sqrt(ms) + epsilon_));
    }
  }

 private:
  std::vector<double> mean_square_;
  double decay_;
  double epsilon_;
};

// One optimizer step on the Huber TD loss; returns the pre-update loss.
// Throws NumericalDivergence on a non-finite loss or gradient.
template <typename Real>
double ApplyUpdate(Mlp<Real>& qf, RmsProp<Real>& optimizer,
                   std::span<const ReplayBuffer::Ref> batch,
                   std::span<const double> targets, double learning_rate,
                   double huber_threshold) {
  std::vector<Real> grad(qf.parameter_count(), Real(0));
  const double loss =
      HuberLossAndGradient(qf, batch, targets, huber_threshold,
                           std::span<Real>(grad));
  if (!std::isfinite(loss)) {
    throw NumericalDivergence("non-finite TD loss");
  }
  for (size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(static_cast<double>(grad[i]))) {
      throw NumericalDivergence("non-finite gradient at parameter " +
                                std::to_string(i));
    }
  }
  optimizer.Apply(qf.parameters(), grad, learning_rate);
  return loss;
}

// Online network, target copy, replay memory and optimizer of one DQN agent.
class DqnLearner {
 public:
  DqnLearner(const LearnerConfig& config, int obs_size, uint64_t seed);

  int Act(std::span<const float> obs, double epsilon);

  // Stores the transition; runs a gradient step when one is due and returns
  // its loss.
  std::optional<double> Observe(std::span<const float> obs, int action,
                                float reward, std::span<const float> next_obs,
                                bool terminal);

  const QFunction& online() const { return online_; }
  const QFunction& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  int64_t learner_steps() const { return learner_steps_; }

 private:
  LearnerConfig config_;
  QFunction online_;
  QFunction target_;
  RmsProp<float> optimizer_;
  ReplayBuffer buffer_;
  SplitMix64 explore_rng_;
  SplitMix64 sample_rng_;
  QFunction::Workspace act_ws_;
  int64_t transitions_ = 0;
  int64_t learner_steps_ = 0;
};

}  // namespace persona_pong

#endif  // PERSONA_PONG_QLEARNER_H_
