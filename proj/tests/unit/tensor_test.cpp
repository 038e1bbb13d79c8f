#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "test_util.hpp"
#include "unseg/tensor.hpp"

namespace unseg {
namespace {

using testing::TempDir;

std::uint32_t u32_at(const std::vector<std::uint8_t>& b, std::size_t off) {
  return b[off] | (b[off + 1] << 8) | (b[off + 2] << 16) | (std::uint32_t(b[off + 3]) << 24);
}

TEST(FeatureTensor, TwoByThreeIsFiftyTwoBytes) {
  FeatureTensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto bytes = encode_feature_tensor(t);
  ASSERT_EQ(bytes.size(), 52u);
  EXPECT_EQ(std::memcmp(bytes.data(), "FTN1", 4), 0);
  EXPECT_EQ(u32_at(bytes, 4), 1u);
  EXPECT_EQ(u32_at(bytes, 8), 2u);
  EXPECT_EQ(bytes[12], 2);
  EXPECT_EQ(bytes[20], 3);
  float first;
  std::memcpy(&first, bytes.data() + 28, 4);
  EXPECT_EQ(first, 1.0f);
}

TEST(FeatureTensor, EmptyShapeIsTwentyBytes) {
  TempDir dir;
  FeatureTensor t({0}, {});
  write_feature_tensor(t, dir / "e.ftn");
  EXPECT_EQ(std::filesystem::file_size(dir / "e.ftn"), 20u);
  EXPECT_EQ(read_feature_tensor(dir / "e.ftn"), t);
}

TEST(FeatureTensor, RandomRoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> nd(1, 4), dim(1, 5);
  std::uniform_real_distribution<float> val(-1e6f, 1e6f);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::uint64_t> shape(nd(rng));
    std::size_t n = 1;
    for (auto& s : shape) {
      s = dim(rng);
      n *= s;
    }
    std::vector<float> data(n);
    for (auto& v : data) v = val(rng);
    FeatureTensor t(shape, data);
    const auto back = decode_feature_tensor(encode_feature_tensor(t));
    ASSERT_EQ(back, t);
    ASSERT_EQ(std::memcmp(back.data().data(), t.data().data(), n * sizeof(float)), 0);
  }
}

TEST(FeatureTensor, FileRoundTrip) {
  TempDir dir;
  FeatureTensor t({2, 2, 2}, {0.5f, -1, 2, 3, 4, 5, 6, 1e-30f});
  write_feature_tensor(t, dir / "t.ftn");
  EXPECT_EQ(read_feature_tensor(dir / "t.ftn"), t);
}

TEST(FeatureTensor, BadMagic) {
  auto bytes = encode_feature_tensor(FeatureTensor({1}, {1}));
  std::memcpy(bytes.data(), "XXXX", 4);
  EXPECT_ERRC(decode_feature_tensor(bytes), Errc::bad_magic);
}

TEST(FeatureTensor, UnsupportedDtype) {
  auto bytes = encode_feature_tensor(FeatureTensor({1}, {1}));
  bytes[4] = 2;
  EXPECT_ERRC(decode_feature_tensor(bytes), Errc::unsupported_dtype);
}

TEST(FeatureTensor, PayloadOneElementShort) {
  auto bytes = encode_feature_tensor(FeatureTensor({3}, {1, 2, 3}));
  bytes.resize(bytes.size() - 4);
  EXPECT_ERRC(decode_feature_tensor(bytes), Errc::truncated);
}

TEST(FeatureTensor, TrailingBytesAreTruncationErrors) {
  auto bytes = encode_feature_tensor(FeatureTensor({3}, {1, 2, 3}));
  bytes.push_back(0);
  EXPECT_ERRC(decode_feature_tensor(bytes), Errc::truncated);
}

TEST(FeatureTensor, HeaderCutShort) {
  auto bytes = encode_feature_tensor(FeatureTensor({3}, {1, 2, 3}));
  bytes.resize(14);
  EXPECT_ERRC(decode_feature_tensor(bytes), Errc::truncated);
}

TEST(FeatureTensor, NonFiniteRejectedOnReadAndWrite) {
  auto bytes = encode_feature_tensor(FeatureTensor({2}, {1, 2}));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bytes.data() + 24, &nan, 4);
  EXPECT_ERRC(decode_feature_tensor(bytes), Errc::non_finite);
  TempDir dir;
  FeatureTensor inf({1}, {std::numeric_limits<float>::infinity()});
  EXPECT_ERRC(write_feature_tensor(inf, dir / "x.ftn"), Errc::non_finite);
}

TEST(FeatureTensor, ShapeMustMatchData) {
  EXPECT_ERRC(FeatureTensor({2, 2}, {1, 2, 3}), Errc::invalid_argument);
}

TEST(FeatureTensor, MissingFileIsIoError) {
  TempDir dir;
  EXPECT_ERRC(read_feature_tensor(dir / "nope.ftn"), Errc::io);
}

TEST(FeatureTensor, RowsAndPixels) {
  FeatureTensor t({2, 2, 3}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  EXPECT_EQ(t.row(1)[0], 6.0f);
  EXPECT_EQ(t.pixel(1, 0)[2], 8.0f);
  EXPECT_EQ(t.pixel(0, 1)[0], 3.0f);
}

}  // namespace
}  // namespace unseg
