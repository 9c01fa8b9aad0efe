#include "persona_pong/happiness.h"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "persona_pong/errors.h"

namespace persona_pong {

Happiness ComputeHappiness(double reward, const RewardBounds& bounds) {
  const double span = bounds.r_star_star - bounds.r_star;
  if (!(span > 0.0)) {
    throw ArgumentError("happiness needs r_star < r_star_star");
  }
  Happiness h;
  h.value = (reward - bounds.r_star) / span;
  h.in_range = reward >= bounds.r_star && reward <= bounds.r_star_star;
  return h;
}

AggregateHappiness Aggregate(std::span<const double> rewards,
                             const RewardBounds& bounds) {
  if (rewards.empty()) throw ArgumentError("no rewards to aggregate");
  double sum_h = 0.0;
  double sum_r = 0.0;
  for (double r : rewards) {
    sum_h += ComputeHappiness(r, bounds).value;
    sum_r += r;
  }
  const double n = static_cast<double>(rewards.size());
  return {sum_h / n, ComputeHappiness(sum_r / n, bounds).value};
}

namespace {

// Dense ranking, 1 = highest; equal values share a rank.
std::vector<int> Ranks(const std::vector<double>& values) {
  std::vector<int> ranks(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    ranks[i] = 1 + static_cast<int>(std::count_if(
                       values.begin(), values.end(),
                       [&](double v) { return v > values[i]; }));
  }
  return ranks;
}

}  // namespace

bool HappinessReport::RanksInverted() const {
  const int n = static_cast<int>(rows.size());
  if (n < 2) return false;
  return std::all_of(rows.begin(), rows.end(), [n](const HappinessRow& r) {
    return r.rank_society == n + 1 - r.rank_test;
  });
}

HappinessReport BuildHappinessReport(const std::vector<AgentRewards>& agents) {
  HappinessReport report;
  for (const AgentRewards& a : agents) {
    if (a.test.empty() || a.society.empty()) {
      throw ArgumentError("incomplete report: agent '" + a.agent +
                          "' lacks " + (a.test.empty() ? "test" : "society") +
                          " phase data");
    }
    const RewardBounds bounds = Bounds(a.personality);
    HappinessRow row;
    row.agent = a.agent;
    row.personality = a.personality;
    row.test = Aggregate(a.test, bounds);
    row.society = Aggregate(a.society, bounds);
    const double delta = row.society.mean_of_h - row.test.mean_of_h;
    row.direction = (delta > 0) - (delta < 0);
    report.rows.push_back(std::move(row));
  }
  std::vector<double> test_h;
  std::vector<double> society_h;
  for (const auto& r : report.rows) {
    test_h.push_back(r.test.mean_of_h);
    society_h.push_back(r.society.mean_of_h);
  }
  const auto test_ranks = Ranks(test_h);
  const auto society_ranks = Ranks(society_h);
  for (size_t i = 0; i < report.rows.size(); ++i) {
    report.rows[i].rank_test = test_ranks[i];
    report.rows[i].rank_society = society_ranks[i];
  }
  return report;
}

void WriteHappinessCsv(std::ostream& out, const HappinessReport& report) {
  out << "agent,phase,h_mean,h_of_mean_r,rank\n";
  char line[256];
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%s,test,%.6f,%.6f,%d\n", r.agent.c_str(),
                  r.test.mean_of_h, r.test.h_of_mean_r, r.rank_test);
    out << line;
    std::snprintf(line, sizeof line, "%s,society,%.6f,%.6f,%d\n",
                  r.agent.c_str(), r.society.mean_of_h, r.society.h_of_mean_r,
                  r.rank_society);
    out << line;
  }
}

void WriteHappinessTable(std::ostream& out, const HappinessReport& report) {
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-4s %8s %5s %10s %5s %s\n", "agent",
                "pers", "H_test", "rank", "H_society", "rank", "shift");
  out << line;
  for (const auto& r : report.rows) {
    const char* shift = r.direction > 0 ? "up" : r.direction < 0 ? "down" : "=";
    std::snprintf(line, sizeof line, "%-8s %-4s %8.3f %5d %10.3f %5d %s\n",
                  r.agent.c_str(), r.personality.c_str(), r.test.mean_of_h,
                  r.rank_test, r.society.mean_of_h, r.rank_society, shift);
    out << line;
  }
  out << "test/society rank order inverted: "
      << (report.RanksInverted() ? "yes" : "no") << '\n';
}

}  // namespace persona_pong
