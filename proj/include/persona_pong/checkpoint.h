#ifndef PERSONA_PONG_CHECKPOINT_H_
#define PERSONA_PONG_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "persona_pong/court.h"
#include "persona_pong/mlp.h"

namespace persona_pong {

// File layout: "PPNG1\n", u64 little-endian header length, UTF-8 JSON header,
// then binary32 little-endian parameters in network order.
inline constexpr char kCheckpointMagic[] = "PPNG1\n";
inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointMeta {
  int format_version = kCheckpointFormatVersion;
  std::string personality = "id";
  Side side = Side::kLeft;
  ObservationMode obs_mode = ObservationMode::kCompact;
  std::vector<int> layer_sizes;
  int action_repeat = 1;  // environment steps per decision
  int64_t frames_trained = 0;
  uint64_t seed = 0;
  std::string created_utc;

  friend bool operator==(const CheckpointMeta&,
                         const CheckpointMeta&) = default;
};

struct Checkpoint {
  CheckpointMeta meta;
  QFunction network;
};

void SaveCheckpoint(const std::string& path, const CheckpointMeta& meta,
                    const QFunction& network);

// Throws CheckpointError on bad magic, version, truncation or a parameter
// count that does not match the header's layer sizes.
Checkpoint LoadCheckpoint(const std::string& path);

// Throws CheckpointError unless the checkpoint may drive `side` with
// `mode` observations. A checkpoint trained on the other side is accepted
// only with `mirror` set.
void CheckCompatible(const CheckpointMeta& meta, Side side, bool mirror,
                     ObservationMode mode);

// ISO-8601 UTC timestamp. Honors SOURCE_DATE_EPOCH for reproducible output.
std::string CurrentUtcTimestamp();

}  // namespace persona_pong

#endif  // PERSONA_PONG_CHECKPOINT_H_
