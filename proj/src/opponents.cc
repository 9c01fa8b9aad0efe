#include "persona_pong/opponents.h"

#include <algorithm>
#include <cmath>

namespace persona_pong {

TrackerPolicy TrackerPolicy::For(const CourtConfig& config) {
  TrackerPolicy p;
  p.dead_zone = config.paddle_height / 4.0;
  p.tracking_speed =
      std::min(config.paddle_step, 0.8 * config.MaxReturnVerticalSpeed());
  p.recenter_y = 0.5;
  return p;
}

Action HandcodedAction(const CourtConfig& config, const GameState& state,
                       Side side) {
  const TrackerPolicy policy = TrackerPolicy::For(config);
  const double vx = state.ball.vx;
  const bool incoming = side == Side::kLeft ? vx < 0.0 : vx > 0.0;
  const double target = incoming ? state.ball.y : policy.recenter_y;
  const double delta = target - state.PaddleOf(side);
  if (std::abs(delta) <= policy.dead_zone) return Action::kStay;

  if (policy.tracking_speed < config.paddle_step) {
    const double ratio = policy.tracking_speed / config.paddle_step;
    // Moves on tick 0 and then whenever the running quota allows.
    const double moves_before = std::ceil(state.tick * ratio);
    const double moves_after = std::ceil((state.tick + 1) * ratio);
    if (moves_after == moves_before) return Action::kStay;
  }
  return delta > 0.0 ? Action::kUp : Action::kDown;
}

}  // namespace persona_pong
