#include "fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "unseg/manifest.hpp"
#include "unseg/tensor.hpp"

namespace unseg::fixture {
namespace {

namespace fs = std::filesystem;

using Vec = std::vector<double>;

Vec unit_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = g(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

int even_in(std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo / 2, hi / 2);
  return 2 * d(rng);
}

std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

bool inside(const BBox& b, int x, int y) {
  return x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1;
}

}  // namespace

LabelMask fixture_mask(const FixtureImage& image, int width, int height) {
  LabelMask m(width, height);
  for (int y = image.box.y0; y <= image.box.y1; ++y) {
    for (int x = image.box.x0; x <= image.box.x1; ++x) {
      m.at(x, y) = static_cast<std::uint8_t>(image.category);
    }
  }
  return m;
}

Fixture write_fixture(const fs::path& root, const FixtureOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Vec> proto, dense_proto;
  for (int c = 0; c < o.categories; ++c) proto.push_back(unit_vector(rng, o.feature_dim));
  for (int c = 0; c <= o.categories; ++c) dense_proto.push_back(unit_vector(rng, o.dense_dim));

  for (const char* sub : {"images", "saliency", "features", "dense", "gt"}) {
    fs::create_directories(root / sub);
  }

  Fixture fx;
  fx.root = root;
  fx.manifest = root / "manifest.jsonl";
  fx.config = root / "config.json";
  fx.class_names.push_back("background");
  for (int c = 1; c <= o.categories; ++c) fx.class_names.push_back("shape" + std::to_string(c));

  DatasetManifest manifest;
  manifest.class_names = fx.class_names;
  const int fh = o.height / o.stride;
  const int fw = o.width / o.stride;

  for (int i = 0; i < o.images; ++i) {
    FixtureImage img;
    char id[32];
    std::snprintf(id, sizeof id, "img%04d", i);
    img.image_id = id;
    img.category = 1 + i % o.categories;
    const int w = even_in(rng, o.min_side, o.max_side);
    const int h = even_in(rng, o.min_side, o.max_side);
    img.box.x0 = even_in(rng, 0, o.width - w);
    img.box.y0 = even_in(rng, 0, o.height - h);
    img.box.x1 = img.box.x0 + w - 1;
    img.box.y1 = img.box.y0 + h - 1;

    const LabelMask gt = fixture_mask(img, o.width, o.height);
    write_mask(gt, root / "gt" / (img.image_id + ".png"));

    SaliencyMap sal{o.width, o.height, {}};
    RgbImage rgb{o.width, o.height, {}};
    std::uniform_int_distribution<int> hi(160, 255), lo(0, 100), jitter(-20, 20);
    for (int y = 0; y < o.height; ++y) {
      for (int x = 0; x < o.width; ++x) {
        const bool fg = inside(img.box, x, y);
        sal.values.push_back(static_cast<std::uint8_t>(fg ? hi(rng) : lo(rng)));
        for (int ch = 0; ch < 3; ++ch) {
          const int base = fg ? 60 + 60 * ((img.category + ch) % 3) : 128;
          rgb.pixels.push_back(clamp_byte(base + jitter(rng)));
        }
      }
    }
    write_saliency(sal, root / "saliency" / (img.image_id + ".png"));
    write_rgb_png(rgb, root / "images" / (img.image_id + ".png"));

    std::vector<float> feat;
    for (int d = 0; d < o.feature_dim; ++d) {
      feat.push_back(static_cast<float>(o.feature_separation * proto[img.category - 1][d] +
                                             o.feature_noise * gauss(rng)));
    }
    write_feature_tensor(FeatureTensor({static_cast<std::uint64_t>(o.feature_dim)}, std::move(feat)),
                         root / "features" / (img.image_id + ".ftn"));

    std::vector<float> dense;
    dense.reserve(static_cast<std::size_t>(fh) * fw * o.dense_dim);
    for (int y = 0; y < fh; ++y) {
      for (int x = 0; x < fw; ++x) {
        const int c = gt.at(x * o.stride, y * o.stride);
        for (int d = 0; d < o.dense_dim; ++d) {
          dense.push_back(static_cast<float>(o.dense_separation * dense_proto[c][d] +
                                                  o.dense_noise * gauss(rng)));
        }
      }
    }
    write_feature_tensor(FeatureTensor({static_cast<std::uint64_t>(fh), static_cast<std::uint64_t>(fw),
                                        static_cast<std::uint64_t>(o.dense_dim)},
                                       std::move(dense)),
                         root / "dense" / (img.image_id + ".ftn"));

    ManifestEntry e;
    e.image_id = img.image_id;
    e.image_path = root / "images" / (img.image_id + ".png");
    e.saliency_path = root / "saliency" / (img.image_id + ".png");
    e.feature_path = root / "features" / (img.image_id + ".ftn");
    e.dense_feature_path = root / "dense" / (img.image_id + ".ftn");
    e.gt_mask_path = root / "gt" / (img.image_id + ".png");
    manifest.entries.push_back(std::move(e));
    fx.images.push_back(img);
  }
  write_manifest(manifest, fx.manifest);

  nlohmann::json config = {
      {"train_manifest", "manifest.jsonl"},
      {"eval_manifest", "manifest.jsonl"},
      {"n_clusters", o.categories},
      {"n_components", o.categories},
      {"crop_size", 64},
      {"iterations", 2},
      {"selftrain", {{"learning_rate", 0.05}, {"epochs", {30, 15}}}},
      {"seed", 0},
      {"output_dir", "run"},
  };
  std::ofstream(fx.config) << config.dump(2) << '\n';
  return fx;
}

}  // namespace unseg::fixture
