#ifndef PERSONA_PONG_PERSONAS_H_
#define PERSONA_PONG_PERSONAS_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "persona_pong/court.h"

namespace persona_pong {

// Every reward in this module is a multiple of 1/4, so rules return integer
// quarters and all sums stay exact.
using Quarters = int32_t;
inline double FromQuarters(Quarters q) { return q / 4.0; }

enum class Personality { kId, kSuperEgo };

std::string_view PersonalityName(Personality p);  // "id" / "se"
Personality ParsePersonality(std::string_view name);

enum class Scorer { kOwn, kOpponent };

// A point as seen by the evaluated agent.
struct PointEvent {
  Scorer scorer = Scorer::kOwn;
  int own_after = 0;
  int opp_after = 0;
  bool is_terminus = false;
  bool match_won = false;  // meaningful only when is_terminus

  // Translates a court-level point into `perspective`'s point of view.
  static PointEvent Seen(Side perspective, Side scorer,
                         std::array<int, 2> score_after, int points_to_win);
};

struct RewardBounds {
  double r_star = 0.0;       // minimum achievable cumulative reward
  double r_star_star = 0.0;  // maximum achievable cumulative reward

  friend bool operator==(const RewardBounds&, const RewardBounds&) = default;
};

// A personality's per-step rule plus its certified bounds. Non-event steps
// always reward zero, so the rule only sees point events.
struct Persona {
  std::string name;
  std::function<Quarters(const PointEvent&)> point_rule;
  RewardBounds bounds;
};

// Name-keyed registry; "id" and "se" are always present.
class PersonaRegistry {
 public:
  static PersonaRegistry& Global();

  void Register(Persona persona);
  const Persona& Find(std::string_view name) const;  // throws LookupError
  bool Contains(std::string_view name) const;
  std::vector<std::string> Names() const;

 private:
  PersonaRegistry();
  std::map<std::string, Persona, std::less<>> personas_;
};

const Persona& GetPersona(Personality p);

Quarters StepRewardQuarters(const Persona& persona,
                            const std::optional<PointEvent>& event);
double StepReward(const Persona& persona,
                  const std::optional<PointEvent>& event);
double StepReward(Personality p, const std::optional<PointEvent>& event);

RewardBounds Bounds(std::string_view name);
RewardBounds Bounds(Personality p);

// Per-step rewards r_1..r_n of one agent over one match.
class RewardTrace {
 public:
  void Append(double reward) { rewards_.push_back(reward); }
  // Appends the final reward and marks it as the terminus step.
  void AppendTerminus(double reward);

  const std::vector<double>& rewards() const { return rewards_; }
  size_t length() const { return rewards_.size(); }
  bool terminated() const { return terminated_; }

 private:
  std::vector<double> rewards_;
  bool terminated_ = false;
};

// Exact sum of a finished trace. Throws ArgumentError without a terminus.
double Cumulative(const RewardTrace& trace);

// ---------------------------------------------------------------------------
// Exhaustive enumeration of terminal point sequences.

struct Outcome {
  Quarters first = 0;   // cumulative reward of the first persona
  Quarters second = 0;  // cumulative reward of the second persona
  uint64_t count = 0;   // number of sequences reaching this pair
  std::string witness;  // first sequence found, 'O' own point, 'X' opponent
};

struct Extremum {
  Quarters value = 0;
  std::string witness;
};

struct OutcomeSet {
  std::string first_name;
  std::string second_name;
  int points_to_win = 11;
  uint64_t sequences = 0;
  std::vector<Outcome> outcomes;  // sorted by (first, second)
  Extremum first_min, first_max, second_min, second_max;

  const Outcome* Find(double first, double second) const;
  RewardBounds FirstBounds() const;
  RewardBounds SecondBounds() const;
};

// Walks every binary point sequence that ends when one side reaches
// points_to_win, scoring it under both personas.
OutcomeSet EnumerateOutcomes(const Persona& first, const Persona& second,
                             int points_to_win = 11);

// Columns r_<first>,r_<second>,count,witness.
void WriteOutcomeCsv(std::ostream& out, const OutcomeSet& set);

// Scores a point-outcome string ('O'/'X') under one persona.
Quarters ScoreSequence(const Persona& persona, std::string_view sequence,
                       int points_to_win = 11);

}  // namespace persona_pong

#endif  // PERSONA_PONG_PERSONAS_H_
