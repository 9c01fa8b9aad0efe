#include "persona_pong/court.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "persona_pong/errors.h"

namespace persona_pong {
namespace {

constexpr double kPaddleThickness = 0.02;  // visual only

double Radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

// Folds a coordinate back into [0, 1] after a wall reflection.
double FoldIntoCourt(double y) {
  if (y < 0.0) return -y;
  if (y > 1.0) return 2.0 - y;
  return y;
}

void MovePaddle(const CourtConfig& config, double& y, Action action) {
  const double half = config.paddle_height / 2.0;
  if (action == Action::kUp) {
    y += config.paddle_step;
  } else if (action == Action::kDown) {
    y -= config.paddle_step;
  }
  y = std::clamp(y, half, 1.0 - half);
}

void Serve(const CourtConfig& config, GameState& state, Side toward) {
  const double angle =
      Radians(state.rng.Uniform(-config.serve_angle_deg,
                                config.serve_angle_deg));
  Ball& ball = state.ball;
  ball.x = 0.5;
  ball.y = 0.5;
  ball.speed = config.ball_speed_initial;
  const double direction = toward == Side::kLeft ? -1.0 : 1.0;
  ball.vx = direction * ball.speed * std::cos(angle);
  ball.vy = ball.speed * std::sin(angle);
  state.phase = Phase::kServing;
  state.ticks_in_point = 0;
}

void AwardPoint(const CourtConfig& config, GameState& state, Side scorer,
                StepEvents& events) {
  state.score[Index(scorer)] += 1;
  state.point_index += 1;
  state.last_scorer = scorer;
  events.point_scored = scorer;
  if (state.score[Index(scorer)] >= config.points_to_win) {
    state.phase = Phase::kTerminal;
    state.ball = Ball{};
    state.ticks_in_point = 0;
    events.match_over = scorer;
    return;
  }
  Serve(config, state, Opponent(scorer));
}

// Resolves the ball crossing the face of `side`'s paddle. Returns true on a
// hit; the ball is then reflected back into the court.
bool ResolvePaddle(const CourtConfig& config, GameState& state, Side side,
                   double x_prev, double y_prev) {
  Ball& ball = state.ball;
  const double distance_to_face =
      side == Side::kLeft ? x_prev : (1.0 - x_prev);
  const double t = distance_to_face / std::abs(ball.vx);
  const double y_cross = FoldIntoCourt(y_prev + ball.vy * t);
  const double half = config.paddle_height / 2.0;
  const double offset = y_cross - state.PaddleOf(side);
  if (std::abs(offset) > half + config.ball_size / 2.0) return false;

  const double relative = std::clamp(offset / half, -1.0, 1.0);
  const double angle = relative * Radians(config.max_bounce_angle_deg);
  ball.speed = std::min(ball.speed * config.speed_multiplier, config.speed_cap);
  const double direction = side == Side::kLeft ? 1.0 : -1.0;
  ball.vx = direction * ball.speed * std::cos(angle);
  ball.vy = ball.speed * std::sin(angle);
  ball.x = side == Side::kLeft ? -ball.x : 2.0 - ball.x;
  return true;
}

}  // namespace

std::string_view SideName(Side s) {
  return s == Side::kLeft ? "left" : "right";
}

Side ParseSide(std::string_view name) {
  if (name == "left" || name == "l" || name == "L") return Side::kLeft;
  if (name == "right" || name == "r" || name == "R") return Side::kRight;
  throw ConfigError("unknown side '" + std::string(name) + "'");
}

void CourtConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid court config: ") + what);
  };
  require(paddle_height > 0.0 && paddle_height < 1.0,
          "paddle_height must be in (0, 1)");
  require(paddle_step > 0.0, "paddle_step must be positive");
  require(ball_speed_initial > 0.0, "ball_speed_initial must be positive");
  require(speed_multiplier > 0.0, "speed_multiplier must be positive");
  require(speed_cap > 0.0 && speed_cap < 0.5,
          "speed_cap must be in (0, 0.5)");
  require(ball_speed_initial <= speed_cap,
          "ball_speed_initial must not exceed speed_cap");
  require(max_bounce_angle_deg > 0.0 && max_bounce_angle_deg < 90.0,
          "max_bounce_angle_deg must be in (0, 90)");
  require(serve_angle_deg >= 0.0 && serve_angle_deg < 90.0,
          "serve_angle_deg must be in [0, 90)");
  require(ball_size > 0.0 && ball_size < 1.0, "ball_size must be in (0, 1)");
  require(points_to_win >= 1, "points_to_win must be at least 1");
  require(max_ticks_per_point >= 1, "max_ticks_per_point must be positive");
}

double CourtConfig::MaxBallVerticalSpeed() const {
  const double angle =
      std::max(Radians(max_bounce_angle_deg), Radians(serve_angle_deg));
  return speed_cap * std::sin(angle);
}

double CourtConfig::MaxReturnVerticalSpeed() const {
  const double angle =
      std::max(Radians(max_bounce_angle_deg), Radians(serve_angle_deg));
  return ball_speed_initial * std::sin(angle);
}

GameState NewMatch(const CourtConfig& config, uint64_t seed) {
  config.Validate();
  GameState state;
  state.rng = SplitMix64(seed);
  const Side first = (state.rng.Next() & 1) ? Side::kRight : Side::kLeft;
  Serve(config, state, first);
  return state;
}

StepEvents Step(const CourtConfig& config, GameState& state, Action left,
                Action right) {
  if (state.phase == Phase::kTerminal) {
    throw StateError("cannot step a finished match");
  }
  StepEvents events;
  state.phase = Phase::kRally;
  state.tick += 1;
  state.ticks_in_point += 1;

  MovePaddle(config, state.paddle_y[0], left);
  MovePaddle(config, state.paddle_y[1], right);

  Ball& ball = state.ball;
  const double x_prev = ball.x;
  const double y_prev = ball.y;
  ball.x += ball.vx;
  ball.y += ball.vy;
  if (ball.y < 0.0 || ball.y > 1.0) {
    ball.y = FoldIntoCourt(ball.y);
    ball.vy = -ball.vy;
    events.wall_bounce = true;
  }

  std::optional<Side> scorer;
  if (ball.x < 0.0) {
    if (ResolvePaddle(config, state, Side::kLeft, x_prev, y_prev)) {
      events.paddle_hit = Side::kLeft;
    } else {
      scorer = Side::kRight;
    }
  } else if (ball.x > 1.0) {
    if (ResolvePaddle(config, state, Side::kRight, x_prev, y_prev)) {
      events.paddle_hit = Side::kRight;
    } else {
      scorer = Side::kLeft;
    }
  }

  if (!scorer && state.ticks_in_point >= config.max_ticks_per_point) {
    // The player the ball is travelling toward concedes.
    scorer = ball.vx < 0.0 ? Side::kRight : Side::kLeft;
    events.stall_forced = true;
  }
  if (scorer) AwardPoint(config, state, *scorer, events);
  return events;
}

GameState Mirror(const GameState& state) {
  GameState m = state;
  m.ball.x = 1.0 - state.ball.x;
  m.ball.vx = -state.ball.vx;
  m.paddle_y = {state.paddle_y[1], state.paddle_y[0]};
  m.score = {state.score[1], state.score[0]};
  if (state.last_scorer) m.last_scorer = Opponent(*state.last_scorer);
  return m;
}

// ---------------------------------------------------------------------------

std::string_view ObservationModeName(ObservationMode mode) {
  return mode == ObservationMode::kCompact ? "compact" : "pixel";
}

ObservationMode ParseObservationMode(std::string_view name) {
  if (name == "compact") return ObservationMode::kCompact;
  if (name == "pixel") return ObservationMode::kPixel;
  throw ConfigError("unknown observation mode '" + std::string(name) + "'");
}

int ObservationSize(ObservationMode mode) {
  return mode == ObservationMode::kCompact
             ? kCompactFeatures
             : kFrameStack * kFrameSize * kFrameSize + kScoreFeatures;
}

namespace {

std::array<float, kScoreFeatures> ScoreFeatures(const CourtConfig& config,
                                                const GameState& state,
                                                Side side) {
  const double scale = config.points_to_win;
  const int own = state.ScoreOf(side);
  const int opp = state.ScoreOf(Opponent(side));
  return {static_cast<float>(own / scale), static_cast<float>(opp / scale),
          static_cast<float>((own - opp) / scale)};
}

}  // namespace

std::array<float, kCompactFeatures> ObserveCompact(const CourtConfig& config,
                                                   const GameState& state,
                                                   Side side) {
  const Ball& b = state.ball;
  const bool left = side == Side::kLeft;
  const double x = left ? b.x : 1.0 - b.x;
  const double vx = left ? b.vx : -b.vx;
  const auto scores = ScoreFeatures(config, state, side);
  return {static_cast<float>(2.0 * x - 1.0),
          static_cast<float>(2.0 * b.y - 1.0),
          static_cast<float>(vx / config.speed_cap),
          static_cast<float>(b.vy / config.speed_cap),
          static_cast<float>(2.0 * state.PaddleOf(side) - 1.0),
          static_cast<float>(2.0 * state.PaddleOf(Opponent(side)) - 1.0),
          scores[0],
          scores[1],
          scores[2]};
}

namespace {

// Fills the cells covered by [x0, x1) x [y0, y1) in court coordinates; at
// least one cell is lit in each direction.
void FillRect(Grid& grid, double x0, double x1, double y0, double y1) {
  auto span = [](double lo, double hi, int n) {
    int first = static_cast<int>(std::floor(lo * n));
    int last = static_cast<int>(std::ceil(hi * n)) - 1;
    first = std::clamp(first, 0, n - 1);
    last = std::clamp(last, first, n - 1);
    return std::pair{first, last};
  };
  const auto [c0, c1] = span(x0, x1, grid.width);
  // Rows grow downward; y grows upward.
  const auto [r0, r1] = span(1.0 - y1, 1.0 - y0, grid.height);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) grid.pixels[r * grid.width + c] = 1.0f;
  }
}

}  // namespace

Grid Render(const CourtConfig& config, const GameState& state, int width,
            int height) {
  if (width < 16 || height < 16) {
    throw ConfigError("render size must be at least 16x16");
  }
  Grid grid{width, height,
            std::vector<float>(static_cast<size_t>(width) * height, 0.0f)};
  const double half = config.paddle_height / 2.0;
  const double left_y = state.PaddleOf(Side::kLeft);
  const double right_y = state.PaddleOf(Side::kRight);
  FillRect(grid, 0.0, kPaddleThickness, left_y - half, left_y + half);
  FillRect(grid, 1.0 - kPaddleThickness, 1.0, right_y - half, right_y + half);
  if (!state.IsTerminal()) {
    const double r = config.ball_size / 2.0;
    FillRect(grid, state.ball.x - r, state.ball.x + r, state.ball.y - r,
             state.ball.y + r);
  }
  return grid;
}

Grid RenderFor(const CourtConfig& config, const GameState& state, Side side,
               int width, int height) {
  return Render(config, side == Side::kLeft ? state : Mirror(state), width,
                height);
}

void WritePgm(const Grid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << "P5\n" << grid.width << ' ' << grid.height << "\n255\n";
  std::vector<unsigned char> bytes(grid.pixels.size());
  std::transform(grid.pixels.begin(), grid.pixels.end(), bytes.begin(),
                 [](float v) {
                   return static_cast<unsigned char>(
                       std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
                 });
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Observer::Observer(const CourtConfig& config, Side side, ObservationMode mode)
    : config_(config), side_(side), mode_(mode) {
  buffer_.resize(ObservationSize(mode));
}

void Observer::Reset() { frames_.clear(); }

std::span<const float> Observer::Observe(const GameState& state) {
  if (mode_ == ObservationMode::kCompact) {
    const auto features = ObserveCompact(config_, state, side_);
    std::copy(features.begin(), features.end(), buffer_.begin());
    return buffer_;
  }
  Grid frame = RenderFor(config_, state, side_, kFrameSize, kFrameSize);
  if (frames_.empty()) {
    frames_.assign(kFrameStack, frame);
  } else {
    frames_.pop_front();
    frames_.push_back(std::move(frame));
  }
  auto out = buffer_.begin();
  for (const Grid& g : frames_) out = std::copy(g.pixels.begin(), g.pixels.end(), out);
  const auto scores = ScoreFeatures(config_, state, side_);
  std::copy(scores.begin(), scores.end(), out);
  return buffer_;
}

}  // namespace persona_pong
