#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace unseg {

enum class DType : std::uint32_t { float32 = 1 };

// Dense row-major array of 32-bit floats. Holds proposal feature rows [n, D]
// and dense per-pixel feature maps [H, W, D].
class FeatureTensor {
 public:
  FeatureTensor() = default;
  // Throws Errc::invalid_argument if the element count disagrees with shape.
  FeatureTensor(std::vector<std::uint64_t> shape, std::vector<float> data);
  explicit FeatureTensor(std::vector<std::uint64_t> shape);

  DType dtype() const { return DType::float32; }
  const std::vector<std::uint64_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::uint64_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  // Row i of the tensor viewed as [shape[0], product(rest)].
  std::span<const float> row(std::size_t i) const;
  // Feature vector at (y, x) of an [H, W, D] map.
  std::span<const float> pixel(std::size_t y, std::size_t x) const;

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  std::vector<std::uint64_t> shape_;
  std::vector<float> data_;
};

std::uint64_t element_count(std::span<const std::uint64_t> shape);

// FTN1 container: "FTN1", u32 dtype, u32 ndim, ndim x u64 dims, payload.
// All integers and elements little-endian.
void write_feature_tensor(const FeatureTensor& t,
                          const std::filesystem::path& path);
FeatureTensor read_feature_tensor(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_feature_tensor(const FeatureTensor& t);
FeatureTensor decode_feature_tensor(std::span<const std::uint8_t> bytes);

}  // namespace unseg
