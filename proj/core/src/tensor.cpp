#include "unseg/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "unseg/error.hpp"

namespace unseg {
namespace {

constexpr char kMagic[4] = {'F', 'T', 'N', '1'};
constexpr std::size_t kFixedHeader = 12;  // magic + dtype + ndim

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void check_finite(std::span<const float> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw Error(Errc::non_finite,
                  "non-finite tensor element at flat index " + std::to_string(i));
    }
  }
}

}  // namespace

std::uint64_t element_count(std::span<const std::uint64_t> shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

FeatureTensor::FeatureTensor(std::vector<std::uint64_t> shape,
                             std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size()) {
    throw Error(Errc::invalid_argument,
                "tensor shape holds " + std::to_string(element_count(shape_)) +
                    " elements but data has " + std::to_string(data_.size()));
  }
}

FeatureTensor::FeatureTensor(std::vector<std::uint64_t> shape)
    : shape_(std::move(shape)), data_(element_count(shape_), 0.0f) {}

std::span<const float> FeatureTensor::row(std::size_t i) const {
  const std::size_t width =
      shape_.empty() || shape_[0] == 0 ? 0 : data_.size() / shape_[0];
  return std::span<const float>(data_).subspan(i * width, width);
}

std::span<const float> FeatureTensor::pixel(std::size_t y, std::size_t x) const {
  const std::size_t d = shape_.at(2);
  return std::span<const float>(data_).subspan((y * shape_[1] + x) * d, d);
}

std::vector<std::uint8_t> encode_feature_tensor(const FeatureTensor& t) {
  check_finite(t.data());
  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeader + 8 * t.ndim() + 4 * t.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(t.dtype()));
  put_u32(out, static_cast<std::uint32_t>(t.ndim()));
  for (auto d : t.shape()) put_u64(out, d);
  for (float f : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

FeatureTensor decode_feature_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFixedHeader) {
    throw Error(Errc::truncated, "FTN1 header truncated");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(Errc::bad_magic, "bad magic, expected FTN1");
  }
  const auto dtype = get_u32(bytes.data() + 4);
  if (dtype != static_cast<std::uint32_t>(DType::float32)) {
    throw Error(Errc::unsupported_dtype,
                "unsupported dtype code " + std::to_string(dtype));
  }
  const auto ndim = get_u32(bytes.data() + 8);
  const std::size_t header = kFixedHeader + 8ull * ndim;
  if (bytes.size() < header) {
    throw Error(Errc::truncated, "FTN1 shape header truncated");
  }
  std::vector<std::uint64_t> shape(ndim);
  for (std::uint32_t i = 0; i < ndim; ++i) {
    shape[i] = get_u64(bytes.data() + kFixedHeader + 8 * i);
  }
  const std::uint64_t count = element_count(shape);
  const std::uint64_t available = bytes.size() - header;
  if (count > available / 4 || count * 4 != available) {
    throw Error(Errc::truncated,
                "FTN1 payload declares " + std::to_string(count) +
                    " elements but " + std::to_string(available) +
                    " bytes are available");
  }
  std::vector<float> data(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes.data() + header + 4 * i));
  }
  check_finite(data);
  return FeatureTensor(std::move(shape), std::move(data));
}

void write_feature_tensor(const FeatureTensor& t,
                          const std::filesystem::path& path) {
  const auto bytes = encode_feature_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

FeatureTensor read_feature_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_feature_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace unseg
