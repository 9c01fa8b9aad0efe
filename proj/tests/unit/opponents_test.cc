#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "persona_pong/arena.h"
#include "persona_pong/court.h"
#include "persona_pong/opponents.h"
#include "persona_pong/rng.h"

using namespace persona_pong;

namespace {

GameState Rally(double ball_y, double vx, double paddle_y, Side side) {
  GameState s = NewMatch(CourtConfig{}, 1);
  s.phase = Phase::kRally;
  s.ball = Ball{0.5, ball_y, vx, 0.0, std::abs(vx)};
  s.paddle_y[Index(side)] = paddle_y;
  return s;
}

}  // namespace

TEST_CASE("tracker parameters follow the court") {
  const CourtConfig c;
  const TrackerPolicy p = TrackerPolicy::For(c);
  CHECK(p.dead_zone == doctest::Approx(0.0375));
  CHECK(p.recenter_y == 0.5);
  CHECK(p.tracking_speed < c.MaxBallVerticalSpeed());
  CHECK(p.tracking_speed <= c.paddle_step);
}

TEST_CASE("rule examples") {
  const CourtConfig c;
  // Incoming for the left paddle means the ball moves left.
  CHECK(HandcodedAction(c, Rally(0.6, -0.02, 0.4, Side::kLeft), Side::kLeft) ==
        Action::kUp);
  CHECK(HandcodedAction(c, Rally(0.2, -0.02, 0.4, Side::kLeft), Side::kLeft) ==
        Action::kDown);
  CHECK(HandcodedAction(c, Rally(0.41, -0.02, 0.4, Side::kLeft),
                        Side::kLeft) == Action::kStay);
  CHECK(HandcodedAction(c, Rally(0.1, 0.02, 0.8, Side::kLeft), Side::kLeft) ==
        Action::kDown);
  CHECK(HandcodedAction(c, Rally(0.9, -0.02, 0.2, Side::kRight),
                        Side::kRight) == Action::kUp);
  CHECK(HandcodedAction(c, Rally(0.6, 0.02, 0.4, Side::kRight),
                        Side::kRight) == Action::kUp);
}

TEST_CASE("tracker moves no faster than its tracking speed on average") {
  const CourtConfig c;
  GameState s = Rally(1.0, -0.001, 0.0, Side::kLeft);
  s.paddle_y[0] = c.paddle_height / 2;
  int moves = 0;
  for (int t = 0; t < 1000; ++t) {
    s.tick = t;
    if (HandcodedAction(c, s, Side::kLeft) == Action::kUp) ++moves;
  }
  CHECK(moves * c.paddle_step / 1000.0 ==
        doctest::Approx(TrackerPolicy::For(c).tracking_speed).epsilon(0.01));
}

TEST_CASE("mirrored states give the same action to the other side") {
  const CourtConfig c;
  SplitMix64 rng(12);
  for (int i = 0; i < 5000; ++i) {
    GameState s = NewMatch(c, rng.Next());
    s.phase = Phase::kRally;
    s.tick = static_cast<int64_t>(rng.Below(10000));
    s.ball.x = rng.Uniform(0.05, 0.95);
    s.ball.y = rng.Uniform(0.0, 1.0);
    s.ball.vx = rng.Uniform(-0.03, 0.03);
    s.ball.vy = rng.Uniform(-0.03, 0.03);
    s.paddle_y = {rng.Uniform(0.075, 0.925), rng.Uniform(0.075, 0.925)};
    const GameState m = Mirror(s);
    CHECK(HandcodedAction(c, s, Side::kLeft) ==
          HandcodedAction(c, m, Side::kRight));
    CHECK(HandcodedAction(c, s, Side::kRight) ==
          HandcodedAction(c, m, Side::kLeft));
    CHECK(HandcodedAction(c, s, Side::kLeft) ==
          HandcodedAction(c, s, Side::kLeft));
  }
}

TEST_CASE("a steep shot beats the tracker") {
  const CourtConfig c;
  GameState s = NewMatch(c, 3);
  s.phase = Phase::kRally;
  const double angle = c.max_bounce_angle_deg * 3.14159265358979323846 / 180;
  s.ball = Ball{0.6, 0.1, c.speed_cap * std::cos(angle),
                c.speed_cap * std::sin(angle), c.speed_cap};
  s.paddle_y = {0.5, 0.1};
  std::optional<Side> scorer;
  for (int t = 0; t < 100 && !scorer; ++t) {
    scorer = Step(c, s, Action::kStay, HandcodedAction(c, s, Side::kRight))
                 .point_scored;
  }
  REQUIRE(scorer.has_value());
  CHECK(*scorer == Side::kLeft);
}

TEST_CASE("tracker against tracker is even") {
  const CourtConfig c;
  const Agent left{{"H_L", "", Side::kLeft}, MakeHandcodedPolicy()};
  const Agent right{{"H_R", "", Side::kRight}, MakeHandcodedPolicy()};
  const EvalResult r = Evaluate(c, left, right, 1000, 0.0, 2024, 1);
  CHECK(r.agent.pct_won >= 45.0);
  CHECK(r.agent.pct_won <= 55.0);
  CHECK(r.agent.pct_won + r.opponent.pct_won == doctest::Approx(100.0));
}
