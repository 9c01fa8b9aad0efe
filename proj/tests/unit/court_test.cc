#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>

#include "persona_pong/court.h"
#include "persona_pong/errors.h"

using namespace persona_pong;

namespace {

GameState RallyState(double x, double y, double vx, double vy) {
  GameState s = NewMatch(CourtConfig{}, 1);
  s.phase = Phase::kRally;
  s.ball = {x, y, vx, vy, std::hypot(vx, vy)};
  return s;
}

double MaxDiff(const GameState& a, const GameState& b) {
  double d = 0.0;
  d = std::max(d, std::abs(a.ball.x - b.ball.x));
  d = std::max(d, std::abs(a.ball.y - b.ball.y));
  d = std::max(d, std::abs(a.ball.vx - b.ball.vx));
  d = std::max(d, std::abs(a.ball.vy - b.ball.vy));
  d = std::max(d, std::abs(a.ball.speed - b.ball.speed));
  d = std::max(d, std::abs(a.paddle_y[0] - b.paddle_y[0]));
  d = std::max(d, std::abs(a.paddle_y[1] - b.paddle_y[1]));
  return d;
}

// 4-connected bright regions.
int CountRegions(const Grid& g) {
  std::vector<int> seen(g.pixels.size(), 0);
  int regions = 0;
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      if (g.At(r, c) <= 0.5f || seen[r * g.width + c]) continue;
      ++regions;
      std::vector<std::pair<int, int>> stack{{r, c}};
      seen[r * g.width + c] = 1;
      while (!stack.empty()) {
        auto [y, x] = stack.back();
        stack.pop_back();
        const int dy[] = {1, -1, 0, 0};
        const int dx[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int ny = y + dy[k];
          const int nx = x + dx[k];
          if (ny < 0 || nx < 0 || ny >= g.height || nx >= g.width) continue;
          if (g.At(ny, nx) <= 0.5f || seen[ny * g.width + nx]) continue;
          seen[ny * g.width + nx] = 1;
          stack.push_back({ny, nx});
        }
      }
    }
  }
  return regions;
}

}  // namespace

TEST_CASE("new match starts at love-all in the serving phase") {
  const GameState s = NewMatch(CourtConfig{}, 7);
  CHECK(s.score[0] == 0);
  CHECK(s.score[1] == 0);
  CHECK(s.tick == 0);
  CHECK(s.phase == Phase::kServing);
  CHECK(s.ball.x == 0.5);
  const double angle = std::atan2(std::abs(s.ball.vy), std::abs(s.ball.vx));
  CHECK(angle <= M_PI / 4 + 1e-12);
  CHECK(NewMatch(CourtConfig{}, 7) == s);
}

TEST_CASE("invalid court configs are rejected") {
  CourtConfig c;
  c.paddle_height = 0.0;
  CHECK_THROWS_AS(NewMatch(c, 1), ConfigError);
  c = {};
  c.points_to_win = 0;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c = {};
  c.ball_speed_initial = 0.05;  // above the cap
  CHECK_THROWS_AS(c.Validate(), ConfigError);
}

TEST_CASE("paddles move by one step and stay clamped") {
  const CourtConfig c;
  GameState s = RallyState(0.5, 0.5, 0.01, 0.0);
  Step(c, s, Action::kUp, Action::kDown);
  CHECK(s.paddle_y[0] == doctest::Approx(0.52).epsilon(1e-12));
  CHECK(s.paddle_y[1] == doctest::Approx(0.48).epsilon(1e-12));
  for (int i = 0; i < 100; ++i) {
    s.ball = {0.5, 0.5, 0.0, 0.0, 0.0};
    Step(c, s, Action::kUp, Action::kDown);
  }
  CHECK(s.paddle_y[0] == doctest::Approx(1.0 - c.paddle_height / 2));
  CHECK(s.paddle_y[1] == doctest::Approx(c.paddle_height / 2));
}

TEST_CASE("a ball past the left paddle scores for the right") {
  const CourtConfig c;
  GameState s = RallyState(0.005, 0.9, -0.02, 0.0);
  s.paddle_y = {0.2, 0.5};
  const StepEvents e = Step(c, s, Action::kStay, Action::kStay);
  REQUIRE(e.point_scored.has_value());
  CHECK(*e.point_scored == Side::kRight);
  CHECK_FALSE(e.paddle_hit.has_value());
  CHECK(s.score[1] == 1);
  CHECK(s.point_index == 1);
  CHECK(s.phase == Phase::kServing);
  // The next serve heads toward the player who conceded.
  CHECK(s.ball.vx < 0.0);
}

TEST_CASE("a paddle hit reflects and speeds up the ball") {
  const CourtConfig c;
  GameState s = RallyState(0.01, 0.5, -0.02, 0.0);
  s.paddle_y = {0.5, 0.5};
  const StepEvents e = Step(c, s, Action::kStay, Action::kStay);
  REQUIRE(e.paddle_hit.has_value());
  CHECK(*e.paddle_hit == Side::kLeft);
  CHECK_FALSE(e.point_scored.has_value());
  CHECK(s.ball.vx > 0.0);
  CHECK(s.ball.speed == doctest::Approx(0.021));
  CHECK(s.ball.vy == doctest::Approx(0.0));

  // Contact at the top edge leaves at the maximum angle.
  s = RallyState(0.01, 0.575, -0.02, 0.0);
  s.paddle_y = {0.5, 0.5};
  Step(c, s, Action::kStay, Action::kStay);
  CHECK(std::atan2(s.ball.vy, s.ball.vx) ==
        doctest::Approx(M_PI / 3).epsilon(1e-9));
}

TEST_CASE("speed is capped") {
  const CourtConfig c;
  GameState s = RallyState(0.01, 0.5, -0.039, 0.0);
  s.ball.speed = 0.039;
  Step(c, s, Action::kStay, Action::kStay);
  CHECK(s.ball.speed == doctest::Approx(c.speed_cap));
}

TEST_CASE("eleventh point ends the match") {
  const CourtConfig c;
  GameState s = RallyState(0.995, 0.9, 0.02, 0.0);
  s.paddle_y = {0.5, 0.1};
  s.score = {10, 4};
  // Right misses: left reaches 11.
  StepEvents e = Step(c, s, Action::kStay, Action::kStay);
  CHECK(e.match_over == Side::kLeft);
  CHECK(s.IsTerminal());
  CHECK_THROWS_AS(Step(c, s, Action::kStay, Action::kStay), StateError);

  s = RallyState(0.005, 0.9, -0.02, 0.0);
  s.paddle_y = {0.1, 0.5};
  s.score = {3, 10};
  e = Step(c, s, Action::kStay, Action::kStay);
  CHECK(e.point_scored == Side::kRight);
  CHECK(e.match_over == Side::kRight);
  CHECK(s.score[1] == 11);
  CHECK(s.phase == Phase::kTerminal);
}

TEST_CASE("stall guard forces a point against the side the ball approaches") {
  CourtConfig c;
  c.max_ticks_per_point = 5;
  GameState s = RallyState(0.5, 0.5, 0.0001, 0.0);
  StepEvents e;
  for (int i = 0; i < 5; ++i) e = Step(c, s, Action::kStay, Action::kStay);
  CHECK(e.stall_forced);
  CHECK(e.point_scored == Side::kLeft);
  CHECK(s.score[0] == 1);
}

TEST_CASE("compact observations are bounded and mirror-consistent") {
  const CourtConfig c;
  SplitMix64 rng(11);
  for (int i = 0; i < 500; ++i) {
    GameState s = RallyState(rng.Uniform(), rng.Uniform(),
                             rng.Uniform(-0.04, 0.04) * 0.7,
                             rng.Uniform(-0.04, 0.04) * 0.7);
    s.paddle_y = {rng.Uniform(0.075, 0.925), rng.Uniform(0.075, 0.925)};
    s.score = {static_cast<int>(rng.Below(11)),
               static_cast<int>(rng.Below(11))};
    for (Side side : {Side::kLeft, Side::kRight}) {
      const auto obs = ObserveCompact(c, s, side);
      for (float v : obs) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
      }
      CHECK(ObserveCompact(c, Mirror(s), Opponent(side)) == obs);
    }
  }
}

TEST_CASE("pixel observations stack four frames plus score features") {
  const CourtConfig c;
  Observer obs(c, Side::kRight, ObservationMode::kPixel);
  GameState s = NewMatch(c, 3);
  s.score = {2, 5};
  auto o = obs.Observe(s);
  REQUIRE(o.size() == 4u * 84 * 84 + 3);
  for (size_t i = 0; i < 4u * 84 * 84; ++i) {
    CHECK((o[i] == 0.0f || o[i] == 1.0f));
  }
  CHECK(o[4 * 84 * 84 + 0] == doctest::Approx(5.0 / 11));
  CHECK(o[4 * 84 * 84 + 1] == doctest::Approx(2.0 / 11));
  CHECK(o[4 * 84 * 84 + 2] == doctest::Approx(3.0 / 11));
  Step(c, s, Action::kUp, Action::kUp);
  o = obs.Observe(s);
  CHECK(o.size() == 4u * 84 * 84 + 3);
  CHECK(obs.size() == ObservationSize(ObservationMode::kPixel));
}

TEST_CASE("render draws two paddles and a ball") {
  const CourtConfig c;
  GameState s = NewMatch(c, 5);
  const Grid g = Render(c, s, 84, 84);
  CHECK(CountRegions(g) == 3);
  CHECK(Render(c, s, 84, 84) == g);
  CHECK_THROWS_AS(Render(c, s, 8, 84), ConfigError);
}

TEST_CASE("ball at the centre lights the centre cells") {
  const CourtConfig c;
  GameState s = NewMatch(c, 5);
  s.ball.x = 0.5;
  s.ball.y = 0.5;
  const Grid g = Render(c, s, 84, 84);
  // Oracle: the ball square spans [0.49, 0.51] in both axes.
  const int lo = static_cast<int>(std::floor(0.49 * 84));
  const int hi = static_cast<int>(std::ceil(0.51 * 84)) - 1;
  int lit = 0;
  for (int r = 10; r < 74; ++r) {
    for (int col = 10; col < 74; ++col) {
      if (g.At(r, col) > 0.5f) {
        ++lit;
        CHECK(std::abs(r + 0.5 - 42.0) <= 1.5);
        CHECK(std::abs(col + 0.5 - 42.0) <= 1.5);
        CHECK(col >= lo);
        CHECK(col <= hi);
      }
    }
  }
  CHECK(lit == (hi - lo + 1) * (hi - lo + 1));
}

TEST_CASE("PGM frames carry a P5 header") {
  const CourtConfig c;
  const Grid g = Render(c, NewMatch(c, 1), 32, 16);
  const std::string path = "court_test_frame.pgm";
  WritePgm(g, path);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(w == 32);
  CHECK(h == 16);
  CHECK(maxval == 255);
  in.get();
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(body.size() == 32u * 16);
  std::remove(path.c_str());
}

TEST_CASE("random play keeps every physics invariant") {
  const CourtConfig c;
  SplitMix64 rng(2024);
  for (int m = 0; m < 100; ++m) {
    GameState s = NewMatch(c, rng.Next());
    int prev_total = 0;
    int steps = 0;
    while (!s.IsTerminal()) {
      const Action a = ActionFromIndex(static_cast<int>(rng.Below(3)));
      const Action b = ActionFromIndex(static_cast<int>(rng.Below(3)));
      GameState mirrored = Mirror(s);
      StepEvents e = Step(c, s, a, b);
      Step(c, mirrored, b, a);
      CHECK(MaxDiff(Mirror(mirrored), s) <= 1e-12);
      CHECK(!(e.point_scored && e.paddle_hit));
      CHECK((!e.match_over || e.point_scored));
      CHECK(s.ball.y >= 0.0);
      CHECK(s.ball.y <= 1.0);
      const int total = s.score[0] + s.score[1];
      CHECK(total >= prev_total);
      CHECK(total == s.point_index);
      prev_total = total;
      REQUIRE(++steps < 11 * 2 * c.max_ticks_per_point);
    }
    CHECK(std::max(s.score[0], s.score[1]) == 11);
    CHECK(std::min(s.score[0], s.score[1]) <= 10);
  }
}
