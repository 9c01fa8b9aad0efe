#include "persona_pong/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "persona_pong/arena.h"
#include "persona_pong/config.h"
#include "persona_pong/errors.h"
#include "persona_pong/happiness.h"
#include "persona_pong/personas.h"

namespace persona_pong {
namespace {

namespace fs = std::filesystem;

// Config flags shared by every subcommand.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;  // key -> raw flag text
  std::map<std::string, CLI::Option*> options;
  bool mirror = false;
};

void AddConfigFlags(CLI::App& app, ConfigFlags& flags) {
  app.add_option("--config", flags.config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  for (const std::string& key : ConfigKeys()) {
    if (key == "mirror") {
      flags.options[key] = app.add_flag(
          "--mirror", flags.mirror,
          "Allow a checkpoint to drive the side it was not trained on");
      continue;
    }
    std::string help = "Config value " + key;
    if (key == "out") {
      flags.options[key] =
          app.add_option("--out", flags.values[key], "Output directory")
              ->envname("PERSONA_PONG_OUT");
      continue;
    }
    flags.options[key] = app.add_option("--" + key, flags.values[key], help);
  }
}

bool FlagGiven(const ConfigFlags& flags, const std::string& key) {
  return flags.options.at(key)->count() > 0 ||
         (key == "out" && !flags.values.at("out").empty());
}

// Defaults, then the config file, then flags.
RunConfig ResolveConfig(const ConfigFlags& flags, nlohmann::json* file_json) {
  RunConfig config;
  if (!flags.config_path.empty()) {
    config = LoadConfigFile(flags.config_path);
    if (file_json) {
      std::ifstream in(flags.config_path);
      *file_json = nlohmann::json::parse(in);
    }
  }
  for (const std::string& key : ConfigKeys()) {
    if (key == "mirror") {
      if (flags.mirror) config.mirror = true;
      continue;
    }
    if (FlagGiven(flags, key)) {
      SetConfigValue(config, key, flags.values.at(key));
    }
  }
  config.Validate();
  return config;
}

fs::path PrepareOut(const RunConfig& config) {
  fs::path dir(config.out_dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << ToJson(config).dump(2) << "\n";
  return dir;
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

// "handcoded", "random" or a checkpoint path.
AgentSpec SpecFor(const std::string& source, Side side, bool mirror) {
  AgentSpec spec;
  spec.side = side;
  spec.mirror = mirror;
  const std::string suffix = side == Side::kLeft ? "_L" : "_R";
  if (source == "handcoded") {
    spec.kind = PolicyKind::kHandcoded;
    spec.name = "HC" + suffix;
  } else if (source == "random") {
    spec.kind = PolicyKind::kRandom;
    spec.name = "RND" + suffix;
  } else {
    spec.kind = PolicyKind::kCheckpoint;
    spec.checkpoint_path = source;
  }
  return spec;
}

Agent ResolveAgent(AgentSpec spec, ObservationMode mode) {
  Agent agent = LoadAgent(std::move(spec), mode);
  if (agent.spec.name.empty()) {
    agent.spec.name = AgentName(agent.spec.personality, agent.spec.side);
  }
  return agent;
}

void WriteTranscriptFile(const fs::path& path,
                         std::span<const MatchTranscript> transcripts,
                         int points_to_win) {
  auto out = OpenOut(path);
  WriteTranscripts(out, transcripts, points_to_win);
}

// ---------------------------------------------------------------------------

int RunTrain(const RunConfig& config, std::ostream& out) {
  const TrainConfig train = config.ToTrainConfig();
  train.Validate();
  PrepareOut(config);
  out << "training " << AgentName(config.personality, config.side) << " for "
      << config.frames << " environment steps (" << config.learner.action_repeat
      << " per decision)\n";
  const TrainResult r = Train(train);
  for (const auto& s : r.snapshots) out << "snapshot " << s << "\n";
  out << "final " << r.final_checkpoint << "\n";
  out << "curve " << r.curve_path << " (" << r.curve.size() << " matches)\n";
  return 0;
}

struct EvalFlags {
  std::string agent;
  std::string opponent = "handcoded";
};

int RunEval(RunConfig config, const ConfigFlags& flags, const EvalFlags& ef,
            std::ostream& out) {
  // A checkpoint plays its own side unless --side says otherwise.
  if (!FlagGiven(flags, "side") && ef.agent != "handcoded" &&
      ef.agent != "random") {
    config.side = LoadCheckpoint(ef.agent).meta.side;
  }
  const Agent agent =
      ResolveAgent(SpecFor(ef.agent, config.side, config.mirror),
                   config.obs_mode);
  const Agent opponent = ResolveAgent(
      SpecFor(ef.opponent, Opponent(config.side), false), config.obs_mode);
  const fs::path dir = PrepareOut(config);
  const EvalResult r =
      Evaluate(config.court, agent, opponent, config.matches, config.epsilon,
               config.seed, config.workers);
  WriteTranscriptFile(dir / "transcripts.jsonl", r.transcripts,
                      config.court.points_to_win);
  const MatchStats rows[] = {r.agent, r.opponent};
  {
    auto csv = OpenOut(dir / "stats.csv");
    WriteStatsCsv(csv, rows);
  }
  WriteStatsCsv(out, rows);
  return 0;
}

struct MatchFlags {
  std::string left = "handcoded";
  std::string right = "handcoded";
};

int RunMatchCommand(const RunConfig& config, const MatchFlags& mf,
                    std::ostream& out) {
  const Agent left = ResolveAgent(
      SpecFor(mf.left, Side::kLeft, config.mirror), config.obs_mode);
  const Agent right = ResolveAgent(
      SpecFor(mf.right, Side::kRight, config.mirror), config.obs_mode);
  const fs::path dir = PrepareOut(config);
  const MatchTranscript t = RunMatch(config.court, left, right, config.seed,
                                     {config.epsilon, config.epsilon});
  WriteTranscriptFile(dir / "match.jsonl", std::span(&t, 1),
                      config.court.points_to_win);
  out << left.spec.name << " " << t.final_score[0] << " : "
      << t.final_score[1] << " " << right.spec.name << " (" << t.steps
      << " steps)\n";
  return 0;
}

struct TournamentFlags {
  std::vector<std::string> agents;    // NAME=PATH
  std::vector<std::string> pairings;  // LEFT:RIGHT
};

std::pair<std::string, std::string> SplitOnce(const std::string& s, char sep,
                                              const std::string& what) {
  const size_t at = s.find(sep);
  if (at == std::string::npos || at == 0 || at + 1 == s.size()) {
    throw ConfigError("malformed " + what + " '" + s + "'");
  }
  return {s.substr(0, at), s.substr(at + 1)};
}

int RunTournament(RunConfig config, const nlohmann::json& file_json,
                  const ConfigFlags& flags, const TournamentFlags& tf,
                  std::ostream& out) {
  if (!FlagGiven(flags, "matches") && !file_json.contains("matches")) {
    config.matches = 100;
  }
  std::map<std::string, std::string> sources;
  for (const auto& a : tf.agents) {
    auto [name, path] = SplitOnce(a, '=', "--agent");
    if (!sources.emplace(name, path).second) {
      throw ConfigError("agent '" + name + "' given twice");
    }
  }
  std::vector<std::pair<std::string, std::string>> names;
  for (const auto& p : tf.pairings) names.push_back(SplitOnce(p, ':', "--pairing"));
  if (names.empty()) names = DefaultPairings();

  auto make = [&](const std::string& name, Side side) {
    auto it = sources.find(name);
    if (it == sources.end()) {
      throw ConfigError("no --agent given for '" + name + "'");
    }
    AgentSpec spec = SpecFor(it->second, side, config.mirror);
    spec.name = name;
    return ResolveAgent(std::move(spec), config.obs_mode);
  };
  std::vector<std::pair<Agent, Agent>> pairings;
  for (const auto& [l, r] : names) {
    pairings.emplace_back(make(l, Side::kLeft), make(r, Side::kRight));
  }
  const fs::path dir = PrepareOut(config);
  const TournamentResult r = Tournament(config.court, pairings,
                                        config.matches, config.seed,
                                        config.workers);
  WriteTranscriptFile(dir / "transcripts.jsonl", r.transcripts,
                      config.court.points_to_win);
  {
    auto csv = OpenOut(dir / "tournament.csv");
    WritePairingCsv(csv, r.pairings);
  }
  WritePairingCsv(out, r.pairings);
  return 0;
}

int RunEnumerate(const RunConfig& config, std::ostream& out) {
  const Persona& first = GetPersona(Personality::kId);
  const Persona& second =
      PersonaRegistry::Global().Find(config.personality == "id"
                                         ? std::string("se")
                                         : config.personality);
  const fs::path dir = PrepareOut(config);
  const OutcomeSet set =
      EnumerateOutcomes(first, second, config.court.points_to_win);
  {
    auto csv = OpenOut(dir / "outcomes.csv");
    WriteOutcomeCsv(csv, set);
  }
  const RewardBounds a = set.FirstBounds();
  const RewardBounds b = set.SecondBounds();
  nlohmann::json bounds = {
      {"sequences", set.sequences},
      {"points_to_win", set.points_to_win},
      {first.name,
       {{"min", a.r_star}, {"max", a.r_star_star},
        {"min_witness", set.first_min.witness},
        {"max_witness", set.first_max.witness}}},
      {second.name,
       {{"min", b.r_star}, {"max", b.r_star_star},
        {"min_witness", set.second_min.witness},
        {"max_witness", set.second_max.witness}}},
  };
  std::ofstream(dir / "bounds.json") << bounds.dump(2) << "\n";
  out << "sequences " << set.sequences << "\n"
      << "R_" << first.name << " in [" << a.r_star << ", " << a.r_star_star
      << "]\n"
      << "R_" << second.name << " in [" << b.r_star << ", " << b.r_star_star
      << "]\n"
      << set.outcomes.size() << " distinct pairs written to "
      << (dir / "outcomes.csv").string() << "\n";
  return 0;
}

struct ReportFlags {
  std::vector<std::string> test;
  std::vector<std::string> society;
};

std::vector<MatchTranscript> ReadAll(const std::vector<std::string>& paths) {
  std::vector<MatchTranscript> all;
  for (const auto& p : paths) {
    auto part = ReadTranscripts(p);
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return all;
}

int RunReport(const RunConfig& config, const ReportFlags& rf,
              std::ostream& out) {
  const auto test = ReadAll(rf.test);
  const auto society = ReadAll(rf.society);
  // Every agent with a personality that appears in the test phase, in order
  // of first appearance.
  std::vector<std::pair<std::string, std::string>> agents;
  for (const auto& t : test) {
    for (int s = 0; s < 2; ++s) {
      if (t.personalities[s].empty()) continue;
      const std::pair<std::string, std::string> a{t.agents[s],
                                                  t.personalities[s]};
      if (std::find(agents.begin(), agents.end(), a) == agents.end()) {
        agents.push_back(a);
      }
    }
  }
  if (agents.empty()) {
    throw ConfigError("test transcripts contain no agent with a personality");
  }
  const int ptw = config.court.points_to_win;
  std::vector<AgentRewards> rewards;
  for (const auto& [name, personality] : agents) {
    rewards.push_back({name, personality,
                       RewardsOf(test, name, personality, ptw),
                       RewardsOf(society, name, personality, ptw)});
  }
  const HappinessReport report = BuildHappinessReport(rewards);
  const fs::path dir = PrepareOut(config);
  {
    auto csv = OpenOut(dir / "happiness.csv");
    WriteHappinessCsv(csv, report);
  }
  WriteHappinessTable(out, report);
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Id and superego Pong agents: training, evaluation, "
               "tournaments and happiness reports",
               "persona_pong"};
  app.require_subcommand(1);

  ConfigFlags train_flags, eval_flags, match_flags, tour_flags, enum_flags,
      report_flags;
  auto* train = app.add_subcommand("train", "Train a DQN agent against the "
                                            "hand-coded opponent");
  AddConfigFlags(*train, train_flags);

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "Play an agent against an opponent");
  AddConfigFlags(*eval, eval_flags);
  eval->add_option("--agent", ef.agent,
                   "Checkpoint path, 'handcoded' or 'random'")
      ->required();
  eval->add_option("--opponent", ef.opponent,
                   "Checkpoint path, 'handcoded' or 'random'");

  MatchFlags mf;
  auto* match = app.add_subcommand("match", "Play one match");
  AddConfigFlags(*match, match_flags);
  match->add_option("--left", mf.left, "Left player source");
  match->add_option("--right", mf.right, "Right player source");

  TournamentFlags tf;
  auto* tour = app.add_subcommand("tournament", "Play agents against each other");
  AddConfigFlags(*tour, tour_flags);
  tour->add_option("--agent", tf.agents, "NAME=SOURCE, repeatable")
      ->required();
  tour->add_option("--pairing", tf.pairings,
                   "LEFT:RIGHT agent names, repeatable (default: the four "
                   "ID/SE pairings)");

  auto* enumerate = app.add_subcommand(
      "enumerate", "List every achievable pair of cumulative rewards");
  AddConfigFlags(*enumerate, enum_flags);

  ReportFlags rf;
  auto* report = app.add_subcommand("report", "Happiness in test and society");
  AddConfigFlags(*report, report_flags);
  report->add_option("--test", rf.test, "Transcript files of the test phase")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--society", rf.society,
                     "Transcript files of the society phase")
      ->required()
      ->check(CLI::ExistingFile);

  app.failure_message(CLI::FailureMessage::help);
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return static_cast<int>(ExitCode::kUsage);
  }

  try {
    nlohmann::json file_json = nlohmann::json::object();
    if (train->parsed()) {
      return RunTrain(ResolveConfig(train_flags, nullptr), out);
    }
    if (eval->parsed()) {
      return RunEval(ResolveConfig(eval_flags, nullptr), eval_flags, ef, out);
    }
    if (match->parsed()) {
      return RunMatchCommand(ResolveConfig(match_flags, nullptr), mf, out);
    }
    if (tour->parsed()) {
      const RunConfig config = ResolveConfig(tour_flags, &file_json);
      return RunTournament(config, file_json, tour_flags, tf, out);
    }
    if (enumerate->parsed()) {
      return RunEnumerate(ResolveConfig(enum_flags, nullptr), out);
    }
    if (report->parsed()) {
      return RunReport(ResolveConfig(report_flags, nullptr), rf, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kInvalidConfig);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kInvalidConfig);
  }
  return static_cast<int>(ExitCode::kUsage);
}

}  // namespace persona_pong
