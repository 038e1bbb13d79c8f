#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "unseg/image.hpp"
#include "unseg/proposals.hpp"

namespace unseg::fixture {

// A small synthetic dataset: one axis-aligned object per image drawn from
// `categories` planted categories, with matching saliency maps, one proposal
// feature vector per image and dense feature maps at half resolution.
struct FixtureOptions {
  int images = 60;
  int categories = 3;
  int width = 48;
  int height = 48;
  int min_side = 12;
  int max_side = 32;
  int feature_dim = 16;
  int dense_dim = 16;
  int stride = 2;  // dense feature cell size in pixels
  double feature_separation = 4.0;
  double feature_noise = 0.3;
  double dense_separation = 2.0;
  double dense_noise = 0.5;
  std::uint64_t seed = 7;
};

struct FixtureImage {
  std::string image_id;
  int category = 0;  // 1-based class label
  BBox box;
};

struct Fixture {
  std::filesystem::path root;
  std::filesystem::path manifest;  // root/manifest.jsonl
  std::filesystem::path config;    // root/config.json, tuned for the fixture
  std::vector<FixtureImage> images;
  std::vector<std::string> class_names;
};

// Writes images/, saliency/, features/, dense/, gt/, manifest.jsonl,
// classes.txt and config.json under `root`. Deterministic in the seed.
Fixture write_fixture(const std::filesystem::path& root, const FixtureOptions& options = {});

// Ground-truth mask of one fixture image.
LabelMask fixture_mask(const FixtureImage& image, int width, int height);

}  // namespace unseg::fixture
