#ifndef PERSONA_PONG_TESTS_ORACLES_H_
#define PERSONA_PONG_TESTS_ORACLES_H_

// Test-only reference computations. Nothing here calls into the library.

#include <climits>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracles {

inline uint64_t Binomial(int n, int k) {
  uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct BruteForceOutcomes {
  uint64_t sequences = 0;
  std::map<std::pair<int, int>, uint64_t> counts;  // (id, se) in quarters
  std::vector<std::string> se_max_sequences;
};

// Reads every bit mask of the longest possible match as a point sequence
// (bit set = own point), truncates it at the first side to reach `target`,
// and keeps only masks whose unused tail is zero so each terminal sequence
// is seen once. Rewards follow the written rules, in quarters.
inline BruteForceOutcomes EnumerateByMasks(int target) {
  BruteForceOutcomes out;
  const int longest = 2 * target - 1;
  int best_se = INT_MIN;
  for (uint64_t mask = 0; mask < (uint64_t{1} << longest); ++mask) {
    int own = 0;
    int opp = 0;
    int length = 0;
    int id = 0;
    int se = 0;
    std::string seq;
    while (own < target && opp < target) {
      const bool mine = (mask >> length) & 1;
      ++length;
      if (mine) {
        ++own;
        id += 4;
        se += (own - opp < 2) ? 2 : 1;
        seq += 'O';
      } else {
        ++opp;
        id -= 4;
        const int lead = own - opp;
        se += lead == 0 ? 2 : (lead > 0 ? 0 : -2);
        seq += 'X';
      }
    }
    if (opp == target) se -= 2;
    if (length < 64 && (mask >> length) != 0) continue;
    ++out.sequences;
    ++out.counts[{id, se}];
    if (se > best_se) {
      best_se = se;
      out.se_max_sequences.clear();
    }
    if (se == best_se) out.se_max_sequences.push_back(seq);
  }
  return out;
}

}  // namespace oracles

#endif  // PERSONA_PONG_TESTS_ORACLES_H_
