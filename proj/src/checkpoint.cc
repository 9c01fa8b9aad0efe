#include "persona_pong/checkpoint.h"

#include <bit>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "persona_pong/errors.h"

namespace persona_pong {
namespace {

using nlohmann::json;

constexpr size_t kMagicSize = sizeof(kCheckpointMagic) - 1;

void PutU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

uint64_t GetU64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::string CurrentUtcTimestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void SaveCheckpoint(const std::string& path, const CheckpointMeta& meta,
                    const QFunction& network) {
  if (meta.layer_sizes != network.layer_sizes()) {
    throw CheckpointError("checkpoint metadata layer sizes disagree with the "
                          "network");
  }
  const json header = {
      {"format_version", meta.format_version},
      {"personality", meta.personality},
      {"side", SideName(meta.side)},
      {"obs_mode", ObservationModeName(meta.obs_mode)},
      {"layer_sizes", meta.layer_sizes},
      {"action_repeat", meta.action_repeat},
      {"frames_trained", meta.frames_trained},
      {"seed", meta.seed},
      {"created_utc", meta.created_utc},
  };
  const std::string header_text = header.dump();

  std::string bytes(kCheckpointMagic, kMagicSize);
  PutU64(bytes, header_text.size());
  bytes += header_text;
  for (float p : network.parameters()) {
    const auto bits = std::bit_cast<uint32_t>(p);
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>(bits >> (8 * i)));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  const std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  const auto* raw = reinterpret_cast<const unsigned char*>(data.data());

  if (data.size() < kMagicSize + 8 ||
      data.compare(0, kMagicSize, kCheckpointMagic) != 0) {
    throw CheckpointError(path + ": not a checkpoint (bad magic)");
  }
  const uint64_t header_len = GetU64(raw + kMagicSize);
  const size_t header_start = kMagicSize + 8;
  if (header_len > data.size() - header_start) {
    throw CheckpointError(path + ": truncated header");
  }

  Checkpoint ckpt;
  CheckpointMeta& meta = ckpt.meta;
  try {
    const json header = json::parse(data.substr(header_start, header_len));
    meta.format_version = header.at("format_version").get<int>();
    if (meta.format_version != kCheckpointFormatVersion) {
      throw CheckpointError(path + ": unsupported format version " +
                            std::to_string(meta.format_version));
    }
    meta.personality = header.at("personality").get<std::string>();
    meta.side = ParseSide(header.at("side").get<std::string>());
    meta.obs_mode =
        ParseObservationMode(header.at("obs_mode").get<std::string>());
    meta.layer_sizes = header.at("layer_sizes").get<std::vector<int>>();
    meta.action_repeat = header.value("action_repeat", 1);
    if (meta.action_repeat < 1) {
      throw CheckpointError(path + ": action_repeat must be positive");
    }
    meta.frames_trained = header.at("frames_trained").get<int64_t>();
    meta.seed = header.at("seed").get<uint64_t>();
    meta.created_utc = header.at("created_utc").get<std::string>();
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(path + ": bad header: " + e.what());
  }

  try {
    ckpt.network = QFunction(meta.layer_sizes);
  } catch (const Error& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  auto params = ckpt.network.parameters();
  const size_t body_start = header_start + header_len;
  const size_t expected = params.size() * 4;
  if (data.size() - body_start != expected) {
    throw CheckpointError(path + ": parameter block has " +
                          std::to_string(data.size() - body_start) +
                          " bytes, expected " + std::to_string(expected));
  }
  const unsigned char* p = raw + body_start;
  for (float& v : params) {
    uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<uint32_t>(p[i]) << (8 * i);
    v = std::bit_cast<float>(bits);
    p += 4;
  }
  return ckpt;
}

void CheckCompatible(const CheckpointMeta& meta, Side side, bool mirror,
                     ObservationMode mode) {
  if (meta.obs_mode != mode) {
    throw CheckpointError("checkpoint expects " +
                          std::string(ObservationModeName(meta.obs_mode)) +
                          " observations, requested " +
                          std::string(ObservationModeName(mode)));
  }
  if (meta.layer_sizes.empty() ||
      meta.layer_sizes.front() != ObservationSize(mode) ||
      meta.layer_sizes.back() != kNumActions) {
    throw CheckpointError("checkpoint layer sizes do not fit the requested "
                          "observation/action shapes");
  }
  if (meta.side != side && !mirror) {
    throw CheckpointError("checkpoint was trained on the " +
                          std::string(SideName(meta.side)) +
                          " side; driving the " + std::string(SideName(side)) +
                          " paddle requires the mirror flag");
  }
}

}  // namespace persona_pong
