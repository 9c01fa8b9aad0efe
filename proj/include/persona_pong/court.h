#ifndef PERSONA_PONG_COURT_H_
#define PERSONA_PONG_COURT_H_

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "persona_pong/rng.h"

namespace persona_pong {

enum class Side { kLeft = 0, kRight = 1 };

inline Side Opponent(Side s) {
  return s == Side::kLeft ? Side::kRight : Side::kLeft;
}
inline int Index(Side s) { return static_cast<int>(s); }
std::string_view SideName(Side s);  // "left" / "right"
Side ParseSide(std::string_view name);

// Up increases the paddle's y coordinate.
enum class Action { kUp = 0, kDown = 1, kStay = 2 };
inline constexpr int kNumActions = 3;
inline Action ActionFromIndex(int i) { return static_cast<Action>(i); }

enum class Phase { kServing, kRally, kTerminal };

// Geometry and physics of the unit-square court. Paddle faces sit on x = 0
// (left) and x = 1 (right).
struct CourtConfig {
  double paddle_height = 0.15;
  double paddle_step = 0.02;
  double ball_speed_initial = 0.02;
  double speed_multiplier = 1.05;  // applied on every paddle hit
  double speed_cap = 0.04;
  double max_bounce_angle_deg = 60.0;
  double serve_angle_deg = 45.0;
  double ball_size = 0.02;  // side of the square ball; widens paddle contact
  int points_to_win = 11;
  int max_ticks_per_point = 10000;

  // Throws ConfigError on any violated invariant.
  void Validate() const;

  // Largest vertical ball speed the physics can produce.
  double MaxBallVerticalSpeed() const;
  // Largest vertical speed of a ball travelling at the initial speed.
  double MaxReturnVerticalSpeed() const;

  friend bool operator==(const CourtConfig&, const CourtConfig&) = default;
};

struct Ball {
  double x = 0.5;
  double y = 0.5;
  double vx = 0.0;
  double vy = 0.0;
  double speed = 0.0;

  friend bool operator==(const Ball&, const Ball&) = default;
};

struct GameState {
  Ball ball;
  std::array<double, 2> paddle_y{0.5, 0.5};  // indexed by Side
  std::array<int, 2> score{0, 0};
  int64_t tick = 0;
  int ticks_in_point = 0;
  int point_index = 0;  // points played so far
  std::optional<Side> last_scorer;
  Phase phase = Phase::kServing;
  SplitMix64 rng;

  int ScoreOf(Side s) const { return score[Index(s)]; }
  double PaddleOf(Side s) const { return paddle_y[Index(s)]; }
  bool IsTerminal() const { return phase == Phase::kTerminal; }

  friend bool operator==(const GameState&, const GameState&) = default;
};

struct StepEvents {
  bool wall_bounce = false;
  std::optional<Side> paddle_hit;
  std::optional<Side> point_scored;  // side that won the point
  std::optional<Side> match_over;    // winner
  bool stall_forced = false;         // point awarded by the stall guard

  friend bool operator==(const StepEvents&, const StepEvents&) = default;
};

GameState NewMatch(const CourtConfig& config, uint64_t seed);

// Advances one tick. Throws StateError on a terminal state.
StepEvents Step(const CourtConfig& config, GameState& state, Action left,
                Action right);

// Reflection about x = 0.5 with the two players exchanged.
GameState Mirror(const GameState& state);

// ---------------------------------------------------------------------------
// Observations

enum class ObservationMode { kCompact, kPixel };

std::string_view ObservationModeName(ObservationMode mode);
ObservationMode ParseObservationMode(std::string_view name);

inline constexpr int kCompactFeatures = 9;
inline constexpr int kScoreFeatures = 3;
inline constexpr int kFrameStack = 4;
inline constexpr int kFrameSize = 84;

int ObservationSize(ObservationMode mode);

// Nine features in [-1, 1] seen from `side`, which always appears as the left
// ("own") player: ball x, y, vx, vy, own paddle y, opponent paddle y,
// own score, opponent score, score difference.
std::array<float, kCompactFeatures> ObserveCompact(const CourtConfig& config,
                                                   const GameState& state,
                                                   Side side);

// Row-major grayscale image, row 0 at the top of the court (y = 1).
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  float At(int row, int col) const { return pixels[row * width + col]; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

// Paddles and ball as filled rectangles (value 1) on a zero background.
// Throws ConfigError for sizes below 16.
Grid Render(const CourtConfig& config, const GameState& state, int width,
            int height);

// Render as seen from `side` (mirrored horizontally for the right player).
Grid RenderFor(const CourtConfig& config, const GameState& state, Side side,
               int width, int height);

// Binary P5 graymap.
void WritePgm(const Grid& grid, const std::string& path);

// Builds observations for one player over one match. Pixel mode keeps the
// four most recent frames; the first observation of a match repeats the
// initial frame.
class Observer {
 public:
  Observer(const CourtConfig& config, Side side, ObservationMode mode);

  void Reset();
  std::span<const float> Observe(const GameState& state);

  Side side() const { return side_; }
  ObservationMode mode() const { return mode_; }
  int size() const { return ObservationSize(mode_); }

 private:
  CourtConfig config_;
  Side side_;
  ObservationMode mode_;
  std::deque<Grid> frames_;
  std::vector<float> buffer_;
};

}  // namespace persona_pong

#endif  // PERSONA_PONG_COURT_H_
