#ifndef PERSONA_PONG_ARENA_H_
#define PERSONA_PONG_ARENA_H_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "persona_pong/checkpoint.h"
#include "persona_pong/court.h"
#include "persona_pong/happiness.h"
#include "persona_pong/personas.h"
#include "persona_pong/qlearner.h"

namespace persona_pong {

// ---------------------------------------------------------------------------
// Policies

// Per-match decision maker for one paddle.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual Action Act(const GameState& state) = 0;
};

// Immutable policy shared across matches and worker threads; Start() creates
// the per-match state (observation history, exploration stream).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::unique_ptr<Controller> Start(const CourtConfig& config,
                                            Side side, uint64_t seed,
                                            double epsilon) const = 0;
};

std::shared_ptr<const Policy> MakeHandcodedPolicy();
std::shared_ptr<const Policy> MakeRandomPolicy();
// Acts greedily (up to epsilon) on the network's values, holding each choice
// for action_repeat ticks or until the point ends.
std::shared_ptr<const Policy> MakeGreedyPolicy(
    std::shared_ptr<const QFunction> network, ObservationMode mode,
    int action_repeat = 1);

enum class PolicyKind { kHandcoded, kCheckpoint, kRandom };

struct AgentSpec {
  std::string name;         // e.g. ID_L
  std::string personality;  // registry name; empty for scripted players
  Side side = Side::kLeft;
  PolicyKind kind = PolicyKind::kHandcoded;
  std::string checkpoint_path;
  bool mirror = false;
};

struct Agent {
  AgentSpec spec;
  std::shared_ptr<const Policy> policy;
};

// Resolves a spec into a playable agent. Checkpoints are validated against
// the requested side and observation mode (CheckpointError on mismatch);
// a checkpoint's personality fills an empty spec personality.
Agent LoadAgent(AgentSpec spec, ObservationMode mode);

// Conventional name for a trained agent, e.g. ("se", right) -> "SE_R".
std::string AgentName(std::string_view personality, Side side);

// ---------------------------------------------------------------------------
// Match records

struct PointRecord {
  int64_t tick = 0;  // 1-based step at which the point ended
  Side scorer = Side::kLeft;
  std::array<int, 2> score_after{0, 0};
  bool stall_forced = false;

  friend bool operator==(const PointRecord&, const PointRecord&) = default;
};

struct MatchTranscript {
  uint64_t seed = 0;
  std::array<std::string, 2> agents;         // by side
  std::array<std::string, 2> personalities;  // by side
  std::vector<PointRecord> points;
  std::array<int, 2> final_score{0, 0};
  Side winner = Side::kLeft;
  int64_t steps = 0;  // n, length of the reward chain
  int stalls = 0;

  // Dense per-step rewards of `perspective` under `persona`.
  RewardTrace Trace(const Persona& persona, Side perspective,
                    int points_to_win) const;
  // Exact cumulative reward from the point events.
  double Cumulative(const Persona& persona, Side perspective,
                    int points_to_win) const;

  friend bool operator==(const MatchTranscript&,
                         const MatchTranscript&) = default;
};

std::string TranscriptToJson(const MatchTranscript& t, int points_to_win);
MatchTranscript TranscriptFromJson(const std::string& line);
void WriteTranscripts(std::ostream& out,
                      std::span<const MatchTranscript> transcripts,
                      int points_to_win);
std::vector<MatchTranscript> ReadTranscripts(const std::string& path);

struct MatchOptions {
  double epsilon_left = 0.0;
  double epsilon_right = 0.0;
};

// Plays one match to its terminus.
MatchTranscript RunMatch(const CourtConfig& config, const Agent& left,
                         const Agent& right, uint64_t seed,
                         const MatchOptions& options = {});

// ---------------------------------------------------------------------------
// Statistics

struct MatchStats {
  std::string agent;
  int matches = 0;
  double avg_score = 0.0;
  double pct_won = 0.0;
  double avg_r_id = 0.0;
  double avg_r_se = 0.0;
};

// Stats of whoever played `side` in the given matches.
MatchStats ComputeStats(std::string agent,
                        std::span<const MatchTranscript> transcripts,
                        Side side, int points_to_win);

// Evaluation stats columns: agent,avg_score,pct_won,avg_r_id,avg_r_se.
void WriteStatsCsv(std::ostream& out, std::span<const MatchStats> rows);
std::string FormatPercent(double pct);

struct PairingStats {
  std::string left;
  std::string right;
  int matches = 0;
  double avg_score_left = 0.0;
  double avg_score_right = 0.0;
  double pct_won_left = 0.0;
  double pct_won_right = 0.0;
};

// Tournament columns: match,avg_score_l,avg_score_r,pct_won_l,pct_won_r.
void WritePairingCsv(std::ostream& out, std::span<const PairingStats> rows);

// ---------------------------------------------------------------------------
// Harness operations

// Calls fn(i) for i in [0, n) on `workers` threads; fn must only write to
// slot i of its outputs.
void ParallelFor(int n, int workers, const std::function<void(int)>& fn);

struct EvalResult {
  MatchStats agent;
  MatchStats opponent;
  std::vector<MatchTranscript> transcripts;
};

// Plays n matches with seeds DeriveSeed(base_seed, i); epsilon applies to
// the evaluated agent. Sides come from the agents' specs.
EvalResult Evaluate(const CourtConfig& config, const Agent& agent,
                    const Agent& opponent, int matches, double epsilon,
                    uint64_t base_seed, int workers = 1);

struct TournamentResult {
  std::vector<PairingStats> pairings;
  std::vector<MatchTranscript> transcripts;  // pairing-major order
};

// Each pairing is (left agent, right agent). Pairing p, match i uses seed
// DeriveSeed(DeriveSeed(base_seed, p), i).
TournamentResult Tournament(
    const CourtConfig& config,
    const std::vector<std::pair<Agent, Agent>>& pairings, int matches,
    uint64_t base_seed, int workers = 1);

// The four pairings of the original protocol as (left, right) names.
std::vector<std::pair<std::string, std::string>> DefaultPairings();

// Cumulative rewards, under `personality`, of every match in which `agent`
// took part.
std::vector<double> RewardsOf(std::span<const MatchTranscript> transcripts,
                              const std::string& agent,
                              const std::string& personality,
                              int points_to_win);

// Average of the last min(window, i + 1) entries at each index.
std::vector<double> MovingAverage(std::span<const double> series,
                                  int window = 10);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  CourtConfig court;
  LearnerConfig learner;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.1;  // of total_frames
  std::string personality = "id";
  Side side = Side::kLeft;
  ObservationMode obs_mode = ObservationMode::kCompact;
  int64_t total_frames = 300000;
  int64_t snapshot_every = 50000;
  uint64_t seed = 1;
  std::string out_dir = ".";
  std::string name;  // file prefix; defaults to AgentName(personality, side)

  void Validate() const;
};

struct CurveRow {
  int match = 0;
  int64_t frames = 0;
  double reward = 0.0;
  double moving_average = 0.0;
};

struct TrainResult {
  std::vector<CurveRow> curve;
  std::vector<std::string> snapshots;  // periodic, in order
  std::string final_checkpoint;
  std::string curve_path;
};

// DQN against the hand-coded opponent. Writes a checkpoint every
// snapshot_every frames, a final checkpoint, and the curve CSV
// (match,frames,R,R_ma10). Numerical divergence propagates after the
// snapshots written so far are left in place.
TrainResult Train(const TrainConfig& config);

void WriteCurveCsv(std::ostream& out, std::span<const CurveRow> rows);

}  // namespace persona_pong

#endif  // PERSONA_PONG_ARENA_H_
