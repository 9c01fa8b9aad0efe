#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "persona_pong/arena.h"
#include "persona_pong/checkpoint.h"
#include "persona_pong/errors.h"
#include "persona_pong/rng.h"

using namespace persona_pong;
namespace fs = std::filesystem;

namespace {

fs::path TempDir() {
  fs::path dir = fs::temp_directory_path() / "persona_pong_checkpoint_test";
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

CheckpointMeta Meta(Side side) {
  CheckpointMeta m;
  m.personality = "id";
  m.side = side;
  m.layer_sizes = {9, 64, 64, 3};
  m.action_repeat = 4;
  m.frames_trained = 300000;
  m.seed = 77;
  m.created_utc = "2020-01-01T00:00:00Z";
  return m;
}

QFunction RandomNet(uint64_t seed) {
  QFunction net({9, 64, 64, 3});
  SplitMix64 rng(seed);
  net.InitUniform(rng);
  return net;
}

}  // namespace

TEST_CASE("round trip is bitwise exact") {
  const fs::path path = TempDir() / "round.ckpt";
  const QFunction net = RandomNet(1);
  SaveCheckpoint(path.string(), Meta(Side::kLeft), net);
  const Checkpoint back = LoadCheckpoint(path.string());
  CHECK(back.meta == Meta(Side::kLeft));
  REQUIRE(back.network.parameter_count() == net.parameter_count());
  const auto a = net.parameters();
  const auto b = back.network.parameters();
  CHECK(std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);

  const fs::path again = TempDir() / "again.ckpt";
  SaveCheckpoint(again.string(), back.meta, back.network);
  CHECK(Slurp(path) == Slurp(again));
}

TEST_CASE("file starts with the magic and a little-endian header length") {
  const fs::path path = TempDir() / "layout.ckpt";
  const QFunction net = RandomNet(2);
  SaveCheckpoint(path.string(), Meta(Side::kRight), net);
  const std::string bytes = Slurp(path);
  REQUIRE(bytes.size() > 14);
  CHECK(bytes.substr(0, 6) == "PPNG1\n");
  uint64_t len = 0;
  for (int i = 7; i >= 0; --i) {
    len = (len << 8) | static_cast<unsigned char>(bytes[6 + i]);
  }
  CHECK(bytes.size() == 14 + len + 4 * net.parameter_count());
  const std::string header = bytes.substr(14, len);
  for (const char* key : {"format_version", "personality", "side", "obs_mode",
                          "layer_sizes", "frames_trained", "seed",
                          "created_utc", "action_repeat"}) {
    CHECK(header.find(std::string("\"") + key + "\"") != std::string::npos);
  }
}

TEST_CASE("truncated and corrupted files are rejected") {
  const fs::path path = TempDir() / "whole.ckpt";
  SaveCheckpoint(path.string(), Meta(Side::kLeft), RandomNet(3));
  const std::string bytes = Slurp(path);
  for (size_t keep : {size_t{0}, size_t{4}, size_t{10}, size_t{40},
                      bytes.size() - 1}) {
    const fs::path cut = TempDir() / "cut.ckpt";
    std::ofstream(cut, std::ios::binary) << bytes.substr(0, keep);
    CHECK_THROWS_AS(LoadCheckpoint(cut.string()), CheckpointError);
  }
  std::string bad = bytes;
  bad[0] = 'X';
  const fs::path magic = TempDir() / "magic.ckpt";
  std::ofstream(magic, std::ios::binary) << bad;
  CHECK_THROWS_AS(LoadCheckpoint(magic.string()), CheckpointError);
  CHECK_THROWS_AS(LoadCheckpoint((TempDir() / "missing.ckpt").string()),
                  CheckpointError);
}

TEST_CASE("a left checkpoint drives the right paddle only when mirrored") {
  const CheckpointMeta left = Meta(Side::kLeft);
  CHECK_NOTHROW(
      CheckCompatible(left, Side::kLeft, false, ObservationMode::kCompact));
  CHECK_THROWS_AS(
      CheckCompatible(left, Side::kRight, false, ObservationMode::kCompact),
      CheckpointError);
  CHECK_NOTHROW(
      CheckCompatible(left, Side::kRight, true, ObservationMode::kCompact));
  CHECK_THROWS_AS(
      CheckCompatible(left, Side::kLeft, false, ObservationMode::kPixel),
      CheckpointError);

  const fs::path path = TempDir() / "id_l.ckpt";
  SaveCheckpoint(path.string(), left, RandomNet(4));
  AgentSpec spec{"ID_L", "", Side::kRight, PolicyKind::kCheckpoint,
                 path.string(), false};
  CHECK_THROWS_AS(LoadAgent(spec, ObservationMode::kCompact), CheckpointError);
  spec.mirror = true;
  const Agent agent = LoadAgent(spec, ObservationMode::kCompact);
  CHECK(agent.spec.personality == "id");
}

TEST_CASE("layer sizes must match the observation width") {
  CheckpointMeta m = Meta(Side::kLeft);
  m.layer_sizes = {10, 64, 64, 3};
  CHECK_THROWS_AS(
      CheckCompatible(m, Side::kLeft, false, ObservationMode::kCompact),
      CheckpointError);
}

TEST_CASE("timestamps honour SOURCE_DATE_EPOCH") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  CHECK(CurrentUtcTimestamp() == "1970-01-01T00:00:00Z");
  unsetenv("SOURCE_DATE_EPOCH");
  CHECK(CurrentUtcTimestamp().size() == 20u);
}

TEST_CASE("a header without action_repeat means one step per decision") {
  const fs::path path = TempDir() / "plain.ckpt";
  SaveCheckpoint(path.string(), Meta(Side::kLeft), RandomNet(5));
  const std::string bytes = Slurp(path);
  uint64_t len = 0;
  for (int i = 7; i >= 0; --i) {
    len = (len << 8) | static_cast<unsigned char>(bytes[6 + i]);
  }
  std::string header = bytes.substr(14, len);
  const std::string key = "\"action_repeat\":4,";
  const size_t at = header.find(key);
  REQUIRE(at != std::string::npos);
  header.erase(at, key.size());
  std::string out = bytes.substr(0, 6);
  for (int i = 0; i < 8; ++i) {
    out += static_cast<char>((header.size() >> (8 * i)) & 0xff);
  }
  out += header + bytes.substr(14 + len);
  const fs::path edited = TempDir() / "edited.ckpt";
  std::ofstream(edited, std::ios::binary) << out;
  CHECK(LoadCheckpoint(edited.string()).meta.action_repeat == 1);
}
