#ifndef PERSONA_PONG_OPPONENTS_H_
#define PERSONA_PONG_OPPONENTS_H_

#include "persona_pong/court.h"

namespace persona_pong {

// Parameters of the hand-coded tracker, derived from the court.
struct TrackerPolicy {
  double dead_zone = 0.0;       // paddle_height / 4
  double tracking_speed = 0.0;  // min(paddle_step, 0.8 * max ball vy)
  double recenter_y = 0.5;

  static TrackerPolicy For(const CourtConfig& config);
};

// Follows the ball's height while the ball approaches and drifts back to
// mid-court while it recedes; holds still inside the dead zone. When the
// tracking speed is below the paddle step the paddle moves only on the
// ticks needed to average that speed.
Action HandcodedAction(const CourtConfig& config, const GameState& state,
                       Side side);

}  // namespace persona_pong

#endif  // PERSONA_PONG_OPPONENTS_H_
