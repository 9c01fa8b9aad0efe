#ifndef PERSONA_PONG_HAPPINESS_H_
#define PERSONA_PONG_HAPPINESS_H_

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "persona_pong/personas.h"

namespace persona_pong {

struct Happiness {
  double value = 0.0;
  // False when the reward lay outside its bounds; the value is not clamped.
  bool in_range = true;
};

// (R - R*) / (R** - R*). Throws ArgumentError for degenerate bounds.
Happiness ComputeHappiness(double reward, const RewardBounds& bounds);

struct AggregateHappiness {
  double mean_of_h = 0.0;    // average of per-match happiness
  double h_of_mean_r = 0.0;  // happiness of the average reward
};

// Throws ArgumentError for an empty list.
AggregateHappiness Aggregate(std::span<const double> rewards,
                             const RewardBounds& bounds);

enum class HappinessPhase { kTest, kSociety };

// Per-match cumulative rewards of one agent, measured under its own
// personality, in both phases.
struct AgentRewards {
  std::string agent;
  std::string personality;
  std::vector<double> test;
  std::vector<double> society;
};

struct HappinessRow {
  std::string agent;
  std::string personality;
  AggregateHappiness test;
  AggregateHappiness society;
  int rank_test = 0;      // 1 = happiest in the phase
  int rank_society = 0;
  int direction = 0;      // sign of (H_society - H_test)
};

struct HappinessReport {
  std::vector<HappinessRow> rows;

  // True when the test-phase ordering is exactly reversed in society.
  bool RanksInverted() const;
};

// Throws ArgumentError (incomplete report) if any agent lacks either phase.
HappinessReport BuildHappinessReport(const std::vector<AgentRewards>& agents);

// Columns agent,phase,h_mean,h_of_mean_r,rank; two rows per agent.
void WriteHappinessCsv(std::ostream& out, const HappinessReport& report);
void WriteHappinessTable(std::ostream& out, const HappinessReport& report);

}  // namespace persona_pong

#endif  // PERSONA_PONG_HAPPINESS_H_
