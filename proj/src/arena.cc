#include "persona_pong/arena.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "persona_pong/errors.h"
#include "persona_pong/opponents.h"

namespace persona_pong {
namespace {

using nlohmann::json;

class HandcodedController : public Controller {
 public:
  HandcodedController(const CourtConfig& config, Side side)
      : config_(config), side_(side) {}
  Action Act(const GameState& state) override {
    return HandcodedAction(config_, state, side_);
  }

 private:
  CourtConfig config_;
  Side side_;
};

class HandcodedPolicy : public Policy {
 public:
  std::unique_ptr<Controller> Start(const CourtConfig& config, Side side,
                                    uint64_t, double) const override {
    return std::make_unique<HandcodedController>(config, side);
  }
};

class RandomController : public Controller {
 public:
  explicit RandomController(uint64_t seed) : rng_(seed) {}
  Action Act(const GameState&) override {
    return ActionFromIndex(static_cast<int>(rng_.Below(kNumActions)));
  }

 private:
  SplitMix64 rng_;
};

class RandomPolicy : public Policy {
 public:
  std::unique_ptr<Controller> Start(const CourtConfig&, Side, uint64_t seed,
                                    double) const override {
    return std::make_unique<RandomController>(seed);
  }
};

class GreedyController : public Controller {
 public:
  GreedyController(std::shared_ptr<const QFunction> network,
                   const CourtConfig& config, Side side, ObservationMode mode,
                   int action_repeat, uint64_t seed, double epsilon)
      : network_(std::move(network)),
        observer_(config, side, mode),
        action_repeat_(action_repeat),
        rng_(seed),
        epsilon_(epsilon) {}

  // Decides every action_repeat ticks and at the start of every point, as
  // during training.
  Action Act(const GameState& state) override {
    if (held_ == 0 || state.point_index != point_index_) {
      auto obs = observer_.Observe(state);
      auto q = network_->Forward(obs, ws_);
      action_ = ActionFromIndex(SelectAction<float>(q, epsilon_, rng_));
      held_ = action_repeat_;
      point_index_ = state.point_index;
    }
    --held_;
    return action_;
  }

 private:
  std::shared_ptr<const QFunction> network_;
  Observer observer_;
  int action_repeat_;
  SplitMix64 rng_;
  double epsilon_;
  QFunction::Workspace ws_;
  Action action_ = Action::kStay;
  int held_ = 0;
  int point_index_ = 0;
};

class GreedyPolicy : public Policy {
 public:
  GreedyPolicy(std::shared_ptr<const QFunction> network, ObservationMode mode,
               int action_repeat)
      : network_(std::move(network)),
        mode_(mode),
        action_repeat_(action_repeat) {}

  std::unique_ptr<Controller> Start(const CourtConfig& config, Side side,
                                    uint64_t seed,
                                    double epsilon) const override {
    return std::make_unique<GreedyController>(network_, config, side, mode_,
                                              action_repeat_, seed, epsilon);
  }

 private:
  std::shared_ptr<const QFunction> network_;
  ObservationMode mode_;
  int action_repeat_;
};

char SideLetter(Side s) { return s == Side::kLeft ? 'L' : 'R'; }

Side SideFromLetter(const std::string& s) {
  if (s == "L") return Side::kLeft;
  if (s == "R") return Side::kRight;
  throw ArgumentError("bad side letter '" + s + "' in transcript");
}

}  // namespace

std::shared_ptr<const Policy> MakeHandcodedPolicy() {
  return std::make_shared<HandcodedPolicy>();
}

std::shared_ptr<const Policy> MakeRandomPolicy() {
  return std::make_shared<RandomPolicy>();
}

std::shared_ptr<const Policy> MakeGreedyPolicy(
    std::shared_ptr<const QFunction> network, ObservationMode mode,
    int action_repeat) {
  if (action_repeat < 1) throw ArgumentError("action_repeat must be >= 1");
  return std::make_shared<GreedyPolicy>(std::move(network), mode,
                                        action_repeat);
}

std::string AgentName(std::string_view personality, Side side) {
  std::string name(personality);
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return name + (side == Side::kLeft ? "_L" : "_R");
}

Agent LoadAgent(AgentSpec spec, ObservationMode mode) {
  Agent agent;
  switch (spec.kind) {
    case PolicyKind::kHandcoded:
      agent.policy = MakeHandcodedPolicy();
      break;
    case PolicyKind::kRandom:
      agent.policy = MakeRandomPolicy();
      break;
    case PolicyKind::kCheckpoint: {
      Checkpoint ckpt = LoadCheckpoint(spec.checkpoint_path);
      CheckCompatible(ckpt.meta, spec.side, spec.mirror, mode);
      if (spec.personality.empty()) spec.personality = ckpt.meta.personality;
      agent.policy = MakeGreedyPolicy(
          std::make_shared<const QFunction>(std::move(ckpt.network)), mode,
          ckpt.meta.action_repeat);
      break;
    }
  }
  if (!spec.personality.empty()) {
    PersonaRegistry::Global().Find(spec.personality);
  }
  agent.spec = std::move(spec);
  return agent;
}

// ---------------------------------------------------------------------------

RewardTrace MatchTranscript::Trace(const Persona& persona, Side perspective,
                                   int points_to_win) const {
  RewardTrace trace;
  int64_t step = 0;
  for (const PointRecord& p : points) {
    for (++step; step < p.tick; ++step) trace.Append(0.0);
    const double r = StepReward(
        persona, PointEvent::Seen(perspective, p.scorer, p.score_after,
                                  points_to_win));
    if (p.tick == steps && std::max(p.score_after[0], p.score_after[1]) >=
                               points_to_win) {
      trace.AppendTerminus(r);
    } else {
      trace.Append(r);
    }
  }
  return trace;
}

double MatchTranscript::Cumulative(const Persona& persona, Side perspective,
                                   int points_to_win) const {
  Quarters total = 0;
  for (const PointRecord& p : points) {
    total += StepRewardQuarters(
        persona, PointEvent::Seen(perspective, p.scorer, p.score_after,
                                  points_to_win));
  }
  return FromQuarters(total);
}

std::string TranscriptToJson(const MatchTranscript& t, int points_to_win) {
  json points = json::array();
  for (const PointRecord& p : t.points) {
    points.push_back({p.tick, std::string(1, SideLetter(p.scorer)),
                      p.score_after[0], p.score_after[1],
                      p.stall_forced ? 1 : 0});
  }
  const Persona& id = GetPersona(Personality::kId);
  const Persona& se = GetPersona(Personality::kSuperEgo);
  json rewards;
  for (Side s : {Side::kLeft, Side::kRight}) {
    rewards[std::string(SideName(s))] = {
        {"id", t.Cumulative(id, s, points_to_win)},
        {"se", t.Cumulative(se, s, points_to_win)}};
  }
  json j = {
      {"seed", t.seed},
      {"left", {{"agent", t.agents[0]}, {"personality", t.personalities[0]}}},
      {"right", {{"agent", t.agents[1]}, {"personality", t.personalities[1]}}},
      {"steps", t.steps},
      {"final", t.final_score},
      {"winner", SideName(t.winner)},
      {"stalls", t.stalls},
      {"points", points},
      {"rewards", rewards},
  };
  return j.dump();
}

MatchTranscript TranscriptFromJson(const std::string& line) {
  MatchTranscript t;
  try {
    const json j = json::parse(line);
    t.seed = j.at("seed").get<uint64_t>();
    t.agents = {j.at("left").at("agent").get<std::string>(),
                j.at("right").at("agent").get<std::string>()};
    t.personalities = {j.at("left").at("personality").get<std::string>(),
                       j.at("right").at("personality").get<std::string>()};
    t.steps = j.at("steps").get<int64_t>();
    t.final_score = j.at("final").get<std::array<int, 2>>();
    t.winner = ParseSide(j.at("winner").get<std::string>());
    t.stalls = j.at("stalls").get<int>();
    for (const auto& p : j.at("points")) {
      PointRecord r;
      r.tick = p.at(0).get<int64_t>();
      r.scorer = SideFromLetter(p.at(1).get<std::string>());
      r.score_after = {p.at(2).get<int>(), p.at(3).get<int>()};
      r.stall_forced = p.at(4).get<int>() != 0;
      t.points.push_back(r);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ArgumentError(std::string("malformed transcript line: ") + e.what());
  }
  return t;
}

void WriteTranscripts(std::ostream& out,
                      std::span<const MatchTranscript> transcripts,
                      int points_to_win) {
  for (const auto& t : transcripts) {
    out << TranscriptToJson(t, points_to_win) << '\n';
  }
}

std::vector<MatchTranscript> ReadTranscripts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transcript file " + path);
  std::vector<MatchTranscript> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(TranscriptFromJson(line));
  }
  return out;
}

MatchTranscript RunMatch(const CourtConfig& config, const Agent& left,
                         const Agent& right, uint64_t seed,
                         const MatchOptions& options) {
  GameState state = NewMatch(config, DeriveSeed(seed, 0));
  auto left_ctl = left.policy->Start(config, Side::kLeft, DeriveSeed(seed, 1),
                                     options.epsilon_left);
  auto right_ctl = right.policy->Start(config, Side::kRight,
                                       DeriveSeed(seed, 2),
                                       options.epsilon_right);
  MatchTranscript t;
  t.seed = seed;
  t.agents = {left.spec.name, right.spec.name};
  t.personalities = {left.spec.personality, right.spec.personality};
  while (!state.IsTerminal()) {
    const Action a_left = left_ctl->Act(state);
    const Action a_right = right_ctl->Act(state);
    const StepEvents events = Step(config, state, a_left, a_right);
    if (events.point_scored) {
      t.points.push_back({state.tick, *events.point_scored, state.score,
                          events.stall_forced});
      if (events.stall_forced) ++t.stalls;
    }
  }
  t.final_score = state.score;
  t.winner = state.score[0] > state.score[1] ? Side::kLeft : Side::kRight;
  t.steps = state.tick;
  return t;
}

// ---------------------------------------------------------------------------

MatchStats ComputeStats(std::string agent,
                        std::span<const MatchTranscript> transcripts,
                        Side side, int points_to_win) {
  MatchStats s;
  s.agent = std::move(agent);
  s.matches = static_cast<int>(transcripts.size());
  if (transcripts.empty()) return s;
  const Persona& id = GetPersona(Personality::kId);
  const Persona& se = GetPersona(Personality::kSuperEgo);
  double score = 0.0;
  double won = 0.0;
  double r_id = 0.0;
  double r_se = 0.0;
  for (const auto& t : transcripts) {
    score += t.final_score[Index(side)];
    won += t.winner == side ? 1.0 : 0.0;
    r_id += t.Cumulative(id, side, points_to_win);
    r_se += t.Cumulative(se, side, points_to_win);
  }
  const double n = static_cast<double>(transcripts.size());
  s.avg_score = score / n;
  s.pct_won = 100.0 * won / n;
  s.avg_r_id = r_id / n;
  s.avg_r_se = r_se / n;
  return s;
}

std::string FormatPercent(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", pct);
  std::string s = buf;
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) {
    s.resize(s.size() - 2);
  }
  return s + "%";
}

void WriteStatsCsv(std::ostream& out, std::span<const MatchStats> rows) {
  out << "agent,avg_score,pct_won,avg_r_id,avg_r_se\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.2f,%s,%.2f,%.2f\n", r.agent.c_str(),
                  r.avg_score, FormatPercent(r.pct_won).c_str(), r.avg_r_id,
                  r.avg_r_se);
    out << buf;
  }
}

void WritePairingCsv(std::ostream& out, std::span<const PairingStats> rows) {
  out << "match,avg_score_l,avg_score_r,pct_won_l,pct_won_r\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s vs %s,%.2f,%.2f,%s,%s\n",
                  r.left.c_str(), r.right.c_str(), r.avg_score_left,
                  r.avg_score_right, FormatPercent(r.pct_won_left).c_str(),
                  FormatPercent(r.pct_won_right).c_str());
    out << buf;
  }
}

void ParallelFor(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::clamp(workers, 1, std::max(1, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

EvalResult Evaluate(const CourtConfig& config, const Agent& agent,
                    const Agent& opponent, int matches, double epsilon,
                    uint64_t base_seed, int workers) {
  if (matches < 1) throw ArgumentError("need at least one match");
  if (agent.spec.side == opponent.spec.side) {
    throw ArgumentError("agent and opponent must play opposite sides");
  }
  const bool agent_left = agent.spec.side == Side::kLeft;
  const Agent& left = agent_left ? agent : opponent;
  const Agent& right = agent_left ? opponent : agent;
  MatchOptions options;
  (agent_left ? options.epsilon_left : options.epsilon_right) = epsilon;

  EvalResult result;
  result.transcripts.resize(matches);
  ParallelFor(matches, workers, [&](int i) {
    result.transcripts[i] =
        RunMatch(config, left, right, DeriveSeed(base_seed, i), options);
  });
  result.agent = ComputeStats(agent.spec.name, result.transcripts,
                              agent.spec.side, config.points_to_win);
  result.opponent = ComputeStats(opponent.spec.name, result.transcripts,
                                 opponent.spec.side, config.points_to_win);
  return result;
}

TournamentResult Tournament(
    const CourtConfig& config,
    const std::vector<std::pair<Agent, Agent>>& pairings, int matches,
    uint64_t base_seed, int workers) {
  if (pairings.empty()) throw ArgumentError("tournament needs a pairing");
  if (matches < 1) throw ArgumentError("need at least one match per pairing");
  for (const auto& [l, r] : pairings) {
    if (l.spec.name == r.spec.name) {
      throw ArgumentError("agent '" + l.spec.name + "' cannot play itself");
    }
  }
  const int total = static_cast<int>(pairings.size()) * matches;
  TournamentResult result;
  result.transcripts.resize(total);
  ParallelFor(total, workers, [&](int k) {
    const int p = k / matches;
    const int i = k % matches;
    const auto& [left, right] = pairings[p];
    result.transcripts[k] = RunMatch(
        config, left, right, DeriveSeed(DeriveSeed(base_seed, p), i));
  });
  for (size_t p = 0; p < pairings.size(); ++p) {
    std::span<const MatchTranscript> slice(
        result.transcripts.data() + p * matches, matches);
    const auto l = ComputeStats(pairings[p].first.spec.name, slice,
                                Side::kLeft, config.points_to_win);
    const auto r = ComputeStats(pairings[p].second.spec.name, slice,
                                Side::kRight, config.points_to_win);
    result.pairings.push_back({l.agent, r.agent, matches, l.avg_score,
                               r.avg_score, l.pct_won, r.pct_won});
  }
  return result;
}

std::vector<std::pair<std::string, std::string>> DefaultPairings() {
  return {{"ID_L", "ID_R"}, {"SE_L", "SE_R"}, {"ID_L", "SE_R"},
          {"SE_L", "ID_R"}};
}

std::vector<double> RewardsOf(std::span<const MatchTranscript> transcripts,
                              const std::string& agent,
                              const std::string& personality,
                              int points_to_win) {
  const Persona& persona = PersonaRegistry::Global().Find(personality);
  std::vector<double> out;
  for (const auto& t : transcripts) {
    for (Side s : {Side::kLeft, Side::kRight}) {
      if (t.agents[Index(s)] == agent) {
        out.push_back(t.Cumulative(persona, s, points_to_win));
      }
    }
  }
  return out;
}

std::vector<double> MovingAverage(std::span<const double> series, int window) {
  if (window < 1) throw ArgumentError("moving-average window must be >= 1");
  std::vector<double> out;
  out.reserve(series.size());
  double sum = 0.0;
  for (size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    if (i >= static_cast<size_t>(window)) sum -= series[i - window];
    const size_t count = std::min(i + 1, static_cast<size_t>(window));
    out.push_back(sum / static_cast<double>(count));
  }
  return out;
}

// ---------------------------------------------------------------------------

void TrainConfig::Validate() const {
  court.Validate();
  learner.Validate();
  PersonaRegistry::Global().Find(personality);
  if (total_frames < learner.learn_start) {
    throw ConfigError("frame budget is smaller than learn_start");
  }
  if (snapshot_every < 1) throw ConfigError("snapshot_every must be >= 1");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 &&
        epsilon_end <= 1.0)) {
    throw ConfigError("epsilon values must lie in [0, 1]");
  }
  if (!(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0)) {
    throw ConfigError("epsilon_decay_fraction must lie in [0, 1]");
  }
}

void WriteCurveCsv(std::ostream& out, std::span<const CurveRow> rows) {
  out << "match,frames,R,R_ma10\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%lld,%g,%.4f\n", r.match,
                  static_cast<long long>(r.frames), r.reward,
                  r.moving_average);
    out << buf;
  }
}

TrainResult Train(const TrainConfig& config) {
  config.Validate();
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const std::string prefix = config.name.empty()
                                 ? AgentName(config.personality, config.side)
                                 : config.name;
  const Persona& persona = PersonaRegistry::Global().Find(config.personality);
  const Side side = config.side;
  const Side other = Opponent(side);
  const CourtConfig& court = config.court;
  const EpsilonSchedule schedule{
      config.epsilon_start, config.epsilon_end,
      static_cast<int64_t>(config.epsilon_decay_fraction *
                           static_cast<double>(config.total_frames))};

  Observer observer(court, side, config.obs_mode);
  DqnLearner learner(config.learner, observer.size(),
                     DeriveSeed(config.seed, 0));
  CheckpointMeta meta;
  meta.personality = config.personality;
  meta.side = side;
  meta.obs_mode = config.obs_mode;
  meta.layer_sizes = learner.online().layer_sizes();
  meta.seed = config.seed;
  meta.action_repeat = config.learner.action_repeat;

  TrainResult result;
  auto snapshot = [&](int64_t frames, const std::string& path) {
    meta.frames_trained = frames;
    meta.created_utc = CurrentUtcTimestamp();
    SaveCheckpoint(path, meta, learner.online());
  };

  std::vector<float> current(observer.size());
  std::vector<float> next(observer.size());
  std::vector<double> returns;
  int64_t frame = 0;
  for (int match = 0; frame < config.total_frames; ++match) {
    GameState state =
        NewMatch(court, DeriveSeed(DeriveSeed(config.seed, 1), match));
    observer.Reset();
    auto first = observer.Observe(state);
    std::copy(first.begin(), first.end(), current.begin());
    Quarters match_return = 0;
    while (!state.IsTerminal() && frame < config.total_frames) {
      const int a = learner.Act(current, schedule.At(frame));
      const Action own = ActionFromIndex(a);
      // One decision spans action_repeat ticks, cut short by a point.
      Quarters q = 0;
      for (int k = 0; k < config.learner.action_repeat; ++k) {
        const Action opp = HandcodedAction(court, state, other);
        const StepEvents events =
            side == Side::kLeft ? Step(court, state, own, opp)
                                : Step(court, state, opp, own);
        ++frame;
        if (frame % config.snapshot_every == 0) {
          char name[64];
          std::snprintf(name, sizeof name, "_%09lld.ckpt",
                        static_cast<long long>(frame));
          const std::string path =
              (fs::path(config.out_dir) / (prefix + name));
          snapshot(frame, path);
          result.snapshots.push_back(path);
        }
        if (events.point_scored) {
          q = StepRewardQuarters(
              persona, PointEvent::Seen(side, *events.point_scored,
                                        state.score, court.points_to_win));
          break;
        }
        if (frame >= config.total_frames) break;
      }
      match_return += q;
      auto obs = observer.Observe(state);
      std::copy(obs.begin(), obs.end(), next.begin());
      learner.Observe(current, a, static_cast<float>(FromQuarters(q)), next,
                      state.IsTerminal());
      std::swap(current, next);
    }
    if (state.IsTerminal()) {
      returns.push_back(FromQuarters(match_return));
      const auto ma = MovingAverage(
          std::span<const double>(returns).last(
              std::min<size_t>(returns.size(), 10)),
          10);
      result.curve.push_back(
          {match, frame, returns.back(), ma.back()});
    }
  }

  result.final_checkpoint =
      (fs::path(config.out_dir) / (prefix + "_final.ckpt")).string();
  snapshot(frame, result.final_checkpoint);
  result.curve_path =
      (fs::path(config.out_dir) / (prefix + "_curve.csv")).string();
  std::ofstream curve(result.curve_path);
  WriteCurveCsv(curve, result.curve);
  return result;
}

}  // namespace persona_pong
