#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <limits>

#include "visco/error.hpp"
#include "visco/snapshot_io.hpp"

using namespace visco;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "visco_snapshot_test";
  std::filesystem::create_directories(dir);
  return dir;
}

State sample_state() {
  InitSpec spec;
  spec.variant = InitVariant::TaylorGreen;
  const Grid2 g(16, 3.5);
  State s = init(spec, g);
  s.F = curl_potential_F(random_stream(g, 3, 1), random_stream(g, 3, 2));
  s.t = 0.125;
  s.u.comp(1)[3] = -0.0;
  s.F.comp(2)[7] = std::numeric_limits<double>::denorm_min();
  return s;
}

}  // namespace

TEST(Snapshot, HeaderLayout) {
  const State s = sample_state();
  const auto bytes = encode_snapshot(s, {1.0, 0.05, 0.01});
  ASSERT_EQ(bytes.size(), 4 + 4 + 4 + 5 * 8 + 6 * 8 * 256u);
  EXPECT_EQ(std::memcmp(bytes.data(), "VEL2", 4), 0);
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[8], 16);  // n
  double L;
  std::memcpy(&L, bytes.data() + 12, 8);  // host is little-endian
  EXPECT_EQ(L, 3.5);
  double u0;
  std::memcpy(&u0, bytes.data() + 52, 8);
  EXPECT_EQ(u0, s.u.comp(0)[0]);
}

TEST(Snapshot, RoundTripIsBitExact) {
  const State s = sample_state();
  const ModelParams params{1.0, 0.05, 0.01};
  const auto path = temp_dir() / "a.vel2";
  write_snapshot(path, s, params);
  const Snapshot back = read_snapshot(path);
  EXPECT_EQ(back.state.t, s.t);
  EXPECT_EQ(back.params.eta, 0.05);
  EXPECT_EQ(back.state.grid().n(), 16);
  EXPECT_EQ(back.state.grid().length(), 3.5);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t p = 0; p < s.F.size(); ++p)
      ASSERT_EQ(std::memcmp(&back.state.F.comp(c)[p], &s.F.comp(c)[p], 8), 0);
  EXPECT_TRUE(std::signbit(back.state.u.comp(1)[3]));
  const auto path2 = temp_dir() / "b.vel2";
  write_snapshot(path2, back.state, back.params);
  EXPECT_EQ(read_file_bytes(path), read_file_bytes(path2));
}

TEST(Snapshot, RejectsCorruptInput) {
  auto bytes = encode_snapshot(sample_state(), {});
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_snapshot(bad), Error);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 1);
  try {
    decode_snapshot(truncated);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
  auto version = bytes;
  version[4] = 9;
  EXPECT_THROW(decode_snapshot(version), Error);
  EXPECT_THROW(read_snapshot(temp_dir() / "missing.vel2"), Error);
}
