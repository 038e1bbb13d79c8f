#include "unseg/proposals.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "unseg/error.hpp"
#include "unseg/parallel.hpp"

namespace unseg {

LabelMask binarize_saliency(const SaliencyMap& saliency, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(Errc::invalid_argument, "theta must lie in [0, 1]");
  }
  LabelMask mask(saliency.width, saliency.height);
  for (std::size_t i = 0; i < saliency.values.size(); ++i) {
    mask.labels[i] = saliency.values[i] / 255.0 > theta ? 1 : 0;
  }
  return mask;
}

BBox tight_bbox(const LabelMask& mask) {
  BBox box{mask.width, mask.height, -1, -1};
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) == 0) continue;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x);
      box.y1 = std::max(box.y1, y);
    }
  }
  if (box.x1 < 0) throw Error(Errc::empty_proposal, "mask has no foreground pixels");
  return box;
}

CropSpec make_crop_spec(const BBox& bbox, int target) {
  if (target < 1) throw Error(Errc::invalid_argument, "crop target must be >= 1");
  if (bbox.x0 < 0 || bbox.y0 < 0 || bbox.x1 < bbox.x0 || bbox.y1 < bbox.y0) {
    throw Error(Errc::invalid_argument, "invalid bounding box");
  }
  CropSpec spec;
  spec.bbox = bbox;
  spec.target_w = target;
  spec.target_h = target;
  return spec;
}

std::size_t foreground_count(const LabelMask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.labels.begin(), mask.labels.end(),
                    [](std::uint8_t v) { return v != 0; }));
}

ProposalSet build_proposals(const DatasetManifest& manifest, double theta,
                            double min_area_fraction, int target, int workers) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(Errc::invalid_argument, "theta must lie in [0, 1]");
  }
  if (!(min_area_fraction >= 0.0 && min_area_fraction <= 1.0)) {
    throw Error(Errc::invalid_argument, "min_area_fraction must lie in [0, 1]");
  }
  if (target < 1) throw Error(Errc::invalid_argument, "crop target must be >= 1");

  const auto& entries = manifest.entries;
  std::vector<std::optional<ProposalRecord>> records(entries.size());
  std::vector<std::string> reasons(entries.size());

  parallel_for(entries.size(), workers, [&](std::size_t i) {
    const auto& entry = entries[i];
    if (!entry.saliency_path) {
      reasons[i] = "no saliency_path in manifest";
      return;
    }
    SaliencyMap saliency;
    try {
      saliency = read_saliency(*entry.saliency_path);
    } catch (const Error& e) {
      reasons[i] = std::string("saliency unreadable: ") + e.what();
      return;
    }
    ProposalRecord rec;
    rec.image_id = entry.image_id;
    rec.binary_mask = binarize_saliency(saliency, theta);
    const auto fg = foreground_count(rec.binary_mask);
    if (fg == 0) {
      reasons[i] = "empty proposal mask";
      return;
    }
    rec.area_fraction = static_cast<double>(fg) / rec.binary_mask.pixel_count();
    if (rec.area_fraction < min_area_fraction) {
      reasons[i] = "area fraction below minimum";
      return;
    }
    rec.bbox = tight_bbox(rec.binary_mask);
    rec.crop = make_crop_spec(rec.bbox, target);
    rec.crop.image_id = entry.image_id;
    records[i] = std::move(rec);
  });

  ProposalSet out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (records[i]) {
      out.records.push_back(std::move(*records[i]));
    } else {
      out.skipped.push_back({entries[i].image_id, reasons[i]});
    }
  }
  return out;
}

namespace {
const char* resampling_name(Resampling r) {
  return r == Resampling::bilinear ? "bilinear" : "nearest";
}
Resampling parse_resampling(const std::string& s) {
  if (s == "bilinear") return Resampling::bilinear;
  if (s == "nearest") return Resampling::nearest;
  throw Error(Errc::malformed, "unknown resampling '" + s + "'");
}
}  // namespace

void to_json(nlohmann::json& j, const BBox& b) {
  j = nlohmann::json{{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}};
}

void to_json(nlohmann::json& j, const CropSpec& c) {
  j = nlohmann::json{{"image_id", c.image_id},
                     {"bbox", c.bbox},
                     {"target_w", c.target_w},
                     {"target_h", c.target_h},
                     {"image_resampling", resampling_name(c.image_resampling)},
                     {"mask_resampling", resampling_name(c.mask_resampling)}};
}

void from_json(const nlohmann::json& j, CropSpec& c) {
  c.image_id = j.at("image_id").get<std::string>();
  const auto& b = j.at("bbox");
  c.bbox = {b.at("x0").get<int>(), b.at("y0").get<int>(), b.at("x1").get<int>(),
            b.at("y1").get<int>()};
  c.target_w = j.at("target_w").get<int>();
  c.target_h = j.at("target_h").get<int>();
  c.image_resampling = parse_resampling(j.at("image_resampling").get<std::string>());
  c.mask_resampling = parse_resampling(j.at("mask_resampling").get<std::string>());
}

void to_json(nlohmann::json& j, const SkipEntry& s) {
  j = nlohmann::json{{"image_id", s.image_id}, {"reason", s.reason}};
}

}  // namespace unseg
