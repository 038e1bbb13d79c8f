#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "unseg/image.hpp"
#include "unseg/manifest.hpp"
#include "unseg/tensor.hpp"

namespace unseg {

inline constexpr double kDefaultTheta = 0.5;
inline constexpr double kDefaultMinAreaFraction = 0.001;
inline constexpr int kDefaultCropSize = 256;

// Inclusive pixel box.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class Resampling { nearest, bilinear };

// Instructions for the feature extractor: cut `bbox` out of the source image
// and resample it to target_w x target_h.
struct CropSpec {
  std::string image_id;
  BBox bbox;
  int target_w = kDefaultCropSize;
  int target_h = kDefaultCropSize;
  Resampling image_resampling = Resampling::bilinear;
  Resampling mask_resampling = Resampling::nearest;

  friend bool operator==(const CropSpec&, const CropSpec&) = default;
};

struct ProposalRecord {
  std::string image_id;
  LabelMask binary_mask;  // values in {0, 1}
  BBox bbox;
  CropSpec crop;
  double area_fraction = 0.0;
  std::optional<FeatureTensor> feature;
};

struct SkipEntry {
  std::string image_id;
  std::string reason;
};

struct ProposalSet {
  std::vector<ProposalRecord> records;  // manifest order
  std::vector<SkipEntry> skipped;       // manifest order
};

// pixel = 1 iff intensity / 255 > theta. Throws for theta outside [0, 1].
LabelMask binarize_saliency(const SaliencyMap& saliency, double theta);

// Tight box around the nonzero pixels. Throws Errc::empty_proposal when the
// mask has no foreground.
BBox tight_bbox(const LabelMask& mask);

CropSpec make_crop_spec(const BBox& bbox, int target = kDefaultCropSize);

std::size_t foreground_count(const LabelMask& mask);

ProposalSet build_proposals(const DatasetManifest& manifest,
                            double theta = kDefaultTheta,
                            double min_area_fraction = kDefaultMinAreaFraction,
                            int target = kDefaultCropSize, int workers = 1);

void to_json(nlohmann::json& j, const BBox& b);
void to_json(nlohmann::json& j, const CropSpec& c);
void from_json(const nlohmann::json& j, CropSpec& c);
void to_json(nlohmann::json& j, const SkipEntry& s);

}  // namespace unseg
