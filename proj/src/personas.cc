#include "persona_pong/personas.h"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "persona_pong/errors.h"

namespace persona_pong {
namespace {

// +1 own point, -1 opponent point.
Quarters IdRule(const PointEvent& e) {
  return e.scorer == Scorer::kOwn ? 4 : -4;
}

// Rewards narrow leads and taking turns. With d = own - opp after the point:
// own point: +1/2 if d <= 1, +1/4 otherwise.
// opponent point: +1/2 if d == 0, 0 if d >= 1, -1/2 if d <= -1.
// Losing the match costs a further 1/2 at the terminus.
Quarters SuperEgoRule(const PointEvent& e) {
  const int d = e.own_after - e.opp_after;
  Quarters q = 0;
  if (e.scorer == Scorer::kOwn) {
    q = d <= 1 ? 2 : 1;
  } else if (d == 0) {
    q = 2;
  } else if (d >= 1) {
    q = 0;
  } else {
    q = -2;
  }
  if (e.is_terminus && !e.match_won) q -= 2;
  return q;
}

}  // namespace

std::string_view PersonalityName(Personality p) {
  return p == Personality::kId ? "id" : "se";
}

Personality ParsePersonality(std::string_view name) {
  if (name == "id" || name == "ID") return Personality::kId;
  if (name == "se" || name == "SE" || name == "superego") {
    return Personality::kSuperEgo;
  }
  throw LookupError("unknown personality '" + std::string(name) + "'");
}

PointEvent PointEvent::Seen(Side perspective, Side scorer,
                            std::array<int, 2> score_after,
                            int points_to_win) {
  PointEvent e;
  e.scorer = scorer == perspective ? Scorer::kOwn : Scorer::kOpponent;
  e.own_after = score_after[Index(perspective)];
  e.opp_after = score_after[Index(Opponent(perspective))];
  e.is_terminus = std::max(e.own_after, e.opp_after) >= points_to_win;
  e.match_won = e.is_terminus && e.own_after > e.opp_after;
  return e;
}

PersonaRegistry::PersonaRegistry() {
  Register({"id", IdRule, {-11.0, 11.0}});
  Register({"se", SuperEgoRule, {-6.0, 10.5}});
}

PersonaRegistry& PersonaRegistry::Global() {
  static PersonaRegistry registry;
  return registry;
}

void PersonaRegistry::Register(Persona persona) {
  if (persona.name.empty() || !persona.point_rule) {
    throw ArgumentError("persona needs a name and a point rule");
  }
  if (!(persona.bounds.r_star < persona.bounds.r_star_star)) {
    throw ArgumentError("persona bounds must satisfy r_star < r_star_star");
  }
  std::string key = persona.name;
  personas_.insert_or_assign(std::move(key), std::move(persona));
}

const Persona& PersonaRegistry::Find(std::string_view name) const {
  auto it = personas_.find(name);
  if (it == personas_.end()) {
    throw LookupError("unknown personality '" + std::string(name) + "'");
  }
  return it->second;
}

bool PersonaRegistry::Contains(std::string_view name) const {
  return personas_.find(name) != personas_.end();
}

std::vector<std::string> PersonaRegistry::Names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : personas_) names.push_back(name);
  return names;
}

const Persona& GetPersona(Personality p) {
  return PersonaRegistry::Global().Find(PersonalityName(p));
}

Quarters StepRewardQuarters(const Persona& persona,
                            const std::optional<PointEvent>& event) {
  if (!event) return 0;
  return persona.point_rule(*event);
}

double StepReward(const Persona& persona,
                  const std::optional<PointEvent>& event) {
  return FromQuarters(StepRewardQuarters(persona, event));
}

double StepReward(Personality p, const std::optional<PointEvent>& event) {
  return StepReward(GetPersona(p), event);
}

RewardBounds Bounds(std::string_view name) {
  return PersonaRegistry::Global().Find(name).bounds;
}

RewardBounds Bounds(Personality p) { return GetPersona(p).bounds; }

void RewardTrace::AppendTerminus(double reward) {
  if (terminated_) throw StateError("trace already has a terminus");
  rewards_.push_back(reward);
  terminated_ = true;
}

double Cumulative(const RewardTrace& trace) {
  if (!trace.terminated()) {
    throw ArgumentError("reward trace does not end at a terminus event");
  }
  double total = 0.0;
  for (double r : trace.rewards()) total += r;
  return total;
}

// ---------------------------------------------------------------------------

namespace {

struct Walker {
  const Persona& first;
  const Persona& second;
  int target;
  std::string path;
  std::map<std::pair<Quarters, Quarters>, Outcome> outcomes;
  uint64_t sequences = 0;

  void Walk(int own, int opp, Quarters a, Quarters b) {
    for (const bool own_scores : {true, false}) {
      const int own_after = own + (own_scores ? 1 : 0);
      const int opp_after = opp + (own_scores ? 0 : 1);
      PointEvent e;
      e.scorer = own_scores ? Scorer::kOwn : Scorer::kOpponent;
      e.own_after = own_after;
      e.opp_after = opp_after;
      e.is_terminus = own_after == target || opp_after == target;
      e.match_won = e.is_terminus && own_after > opp_after;
      const Quarters a_next = a + first.point_rule(e);
      const Quarters b_next = b + second.point_rule(e);
      path.push_back(own_scores ? 'O' : 'X');
      if (e.is_terminus) {
        ++sequences;
        auto [it, inserted] = outcomes.try_emplace({a_next, b_next});
        if (inserted) {
          it->second.first = a_next;
          it->second.second = b_next;
          it->second.witness = path;
        }
        ++it->second.count;
      } else {
        Walk(own_after, opp_after, a_next, b_next);
      }
      path.pop_back();
    }
  }
};

}  // namespace

const Outcome* OutcomeSet::Find(double first, double second) const {
  const auto a = static_cast<Quarters>(std::lround(first * 4.0));
  const auto b = static_cast<Quarters>(std::lround(second * 4.0));
  auto it = std::lower_bound(
      outcomes.begin(), outcomes.end(), std::pair{a, b},
      [](const Outcome& o, const std::pair<Quarters, Quarters>& key) {
        return std::pair{o.first, o.second} < key;
      });
  if (it == outcomes.end() || it->first != a || it->second != b) {
    return nullptr;
  }
  return &*it;
}

RewardBounds OutcomeSet::FirstBounds() const {
  return {FromQuarters(first_min.value), FromQuarters(first_max.value)};
}

RewardBounds OutcomeSet::SecondBounds() const {
  return {FromQuarters(second_min.value), FromQuarters(second_max.value)};
}

OutcomeSet EnumerateOutcomes(const Persona& first, const Persona& second,
                             int points_to_win) {
  if (points_to_win < 1) throw ArgumentError("points_to_win must be >= 1");
  Walker walker{first, second, points_to_win, {}, {}, 0};
  walker.path.reserve(2 * points_to_win);
  walker.Walk(0, 0, 0, 0);

  OutcomeSet set;
  set.first_name = first.name;
  set.second_name = second.name;
  set.points_to_win = points_to_win;
  set.sequences = walker.sequences;
  set.outcomes.reserve(walker.outcomes.size());
  for (auto& [_, outcome] : walker.outcomes) {
    set.outcomes.push_back(std::move(outcome));
  }

  // Ties resolve to the earliest outcome in (first, second) order.
  const auto& o = set.outcomes;
  auto by_first = [](const Outcome& x, const Outcome& y) {
    return x.first < y.first;
  };
  auto by_second = [](const Outcome& x, const Outcome& y) {
    return x.second < y.second;
  };
  const auto lo1 = std::min_element(o.begin(), o.end(), by_first);
  const auto hi1 = std::max_element(o.begin(), o.end(), by_first);
  const auto lo2 = std::min_element(o.begin(), o.end(), by_second);
  const auto hi2 = std::max_element(o.begin(), o.end(), by_second);
  set.first_min = {lo1->first, lo1->witness};
  set.first_max = {hi1->first, hi1->witness};
  set.second_min = {lo2->second, lo2->witness};
  set.second_max = {hi2->second, hi2->witness};
  return set;
}

void WriteOutcomeCsv(std::ostream& out, const OutcomeSet& set) {
  out << "r_" << set.first_name << ",r_" << set.second_name
      << ",count,witness\n";
  for (const Outcome& o : set.outcomes) {
    out << FromQuarters(o.first) << ',' << FromQuarters(o.second) << ','
        << o.count << ',' << o.witness << '\n';
  }
}

Quarters ScoreSequence(const Persona& persona, std::string_view sequence,
                       int points_to_win) {
  int own = 0;
  int opp = 0;
  Quarters total = 0;
  for (char c : sequence) {
    if (own >= points_to_win || opp >= points_to_win) {
      throw ArgumentError("point sequence continues past the terminus");
    }
    if (c != 'O' && c != 'X') {
      throw ArgumentError("point sequences use only 'O' and 'X'");
    }
    const Side scorer = c == 'O' ? Side::kLeft : Side::kRight;
    (c == 'O' ? own : opp) += 1;
    total += persona.point_rule(
        PointEvent::Seen(Side::kLeft, scorer, {own, opp}, points_to_win));
  }
  return total;
}

}  // namespace persona_pong
