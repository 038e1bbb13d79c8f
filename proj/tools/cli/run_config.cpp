#include "run_config.hpp"

#include <fstream>
#include <set>

#include "unseg/error.hpp"

namespace unseg::cli {
namespace {

namespace fs = std::filesystem;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_argument, "config: " + what);
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(Errc::invalid_argument, where + ": unknown key '" + key + "'");
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return fs::absolute(base / p).lexically_normal();
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void read_path(const nlohmann::json& j, const char* key, fs::path& out, const fs::path& base) {
  if (auto it = j.find(key); it != j.end()) out = resolve(it->get<std::string>(), base);
}

}  // namespace

TrainConfig SelfTrainSettings::round_config(int round, std::uint64_t seed, int workers) const {
  TrainConfig t;
  t.learning_rate = learning_rate;
  t.batch_images = batch_images;
  t.epochs = epochs.empty() ? 1 : epochs[std::min<std::size_t>(round, epochs.size() - 1)];
  t.crop_scale_min = crop_scale_min;
  t.crop_scale_max = crop_scale_max;
  t.optimizer = optimizer == "sgd" ? Optimizer::sgd : Optimizer::adam;
  t.seed = seed + static_cast<std::uint64_t>(round);
  t.workers = workers;
  return t;
}

void RunConfig::validate() const {
  require(theta >= 0.0 && theta <= 1.0, "theta must lie in [0, 1]");
  require(min_area_fraction >= 0.0 && min_area_fraction <= 1.0,
          "min_area_fraction must lie in [0, 1]");
  require(crop_size >= 1, "crop_size must be >= 1");
  require(k_neighbors >= 1, "k_neighbors must be >= 1");
  require(n_clusters >= 1 && n_clusters <= 254, "n_clusters must lie in [1, 254]");
  require(n_components >= 1, "n_components must be >= 1");
  require(n_init >= 1, "n_init must be >= 1");
  require(max_iter >= 1, "max_iter must be >= 1");
  require(filter_fraction >= 0.0 && filter_fraction < 1.0, "filter_fraction must lie in [0, 1)");
  require(dense_limit >= 1, "dense_limit must be >= 1");
  require(iterations >= 1, "iterations must be >= 1");
  require(eval_mode == "hungarian" || eval_mode == "majority",
          "eval_mode must be hungarian or majority");
  require(discovered_threshold >= 0.0 && discovered_threshold <= 1.0,
          "discovered_threshold must lie in [0, 1]");
  require(workers >= 1, "workers must be >= 1");
  const auto& s = selftrain;
  require(s.learning_rate > 0.0, "selftrain.learning_rate must be > 0");
  require(s.batch_images >= 1, "selftrain.batch_images must be >= 1");
  require(!s.epochs.empty(), "selftrain.epochs must not be empty");
  for (int e : s.epochs) require(e >= 1, "selftrain.epochs entries must be >= 1");
  require(s.crop_scale_min > 0.0 && s.crop_scale_min <= s.crop_scale_max && s.crop_scale_max <= 1.0,
          "selftrain.crop_scale must satisfy 0 < min <= max <= 1");
  require(s.optimizer == "adam" || s.optimizer == "sgd", "selftrain.optimizer must be adam or sgd");
  require(s.trainer == "internal" || s.trainer == "external",
          "selftrain.trainer must be internal or external");
  require(s.trainer == "internal" || (s.external && !s.external->command.empty()),
          "selftrain.external.command is required for the external trainer");
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json st = {{"learning_rate", c.selftrain.learning_rate},
                       {"batch_images", c.selftrain.batch_images},
                       {"epochs", c.selftrain.epochs},
                       {"crop_scale", {c.selftrain.crop_scale_min, c.selftrain.crop_scale_max}},
                       {"optimizer", c.selftrain.optimizer},
                       {"trainer", c.selftrain.trainer}};
  if (c.selftrain.external) st["external"] = *c.selftrain.external;
  return {{"train_manifest", c.train_manifest.string()},
          {"extend_manifest", c.extend_manifest.string()},
          {"eval_manifest", c.eval_manifest.string()},
          {"theta", c.theta},
          {"min_area_fraction", c.min_area_fraction},
          {"crop_size", c.crop_size},
          {"k_neighbors", c.k_neighbors},
          {"n_clusters", c.n_clusters},
          {"n_components", c.n_components},
          {"n_init", c.n_init},
          {"max_iter", c.max_iter},
          {"filter_fraction", c.filter_fraction},
          {"dense_limit", c.dense_limit},
          {"selftrain", st},
          {"iterations", c.iterations},
          {"seed", c.seed},
          {"output_dir", c.output_dir.string()},
          {"eval_mode", c.eval_mode},
          {"class_map", c.class_map.string()},
          {"include_background", c.include_background},
          {"discovered_threshold", c.discovered_threshold},
          {"workers", c.workers}};
}

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base) {
  RunConfig c;
  try {
    if (!j.is_object()) throw Error(Errc::malformed, "config must be a JSON object");
    reject_unknown(j,
                   {"train_manifest", "extend_manifest", "eval_manifest", "theta",
                    "min_area_fraction", "crop_size", "k_neighbors", "n_clusters", "n_components",
                    "n_init", "max_iter", "filter_fraction", "dense_limit", "selftrain",
                    "iterations", "seed", "output_dir", "eval_mode", "class_map",
                    "include_background", "discovered_threshold", "workers"},
                   "config");
    read_path(j, "train_manifest", c.train_manifest, base);
    read_path(j, "extend_manifest", c.extend_manifest, base);
    read_path(j, "eval_manifest", c.eval_manifest, base);
    read(j, "theta", c.theta);
    read(j, "min_area_fraction", c.min_area_fraction);
    read(j, "crop_size", c.crop_size);
    read(j, "k_neighbors", c.k_neighbors);
    read(j, "n_clusters", c.n_clusters);
    read(j, "n_components", c.n_components);
    read(j, "n_init", c.n_init);
    read(j, "max_iter", c.max_iter);
    read(j, "filter_fraction", c.filter_fraction);
    read(j, "dense_limit", c.dense_limit);
    read(j, "iterations", c.iterations);
    read(j, "seed", c.seed);
    read_path(j, "output_dir", c.output_dir, base);
    read(j, "eval_mode", c.eval_mode);
    read_path(j, "class_map", c.class_map, base);
    read(j, "include_background", c.include_background);
    read(j, "discovered_threshold", c.discovered_threshold);
    read(j, "workers", c.workers);
    if (auto it = j.find("selftrain"); it != j.end()) {
      const auto& s = *it;
      reject_unknown(s,
                     {"learning_rate", "batch_images", "epochs", "crop_scale", "optimizer",
                      "trainer", "external"},
                     "config.selftrain");
      auto& st = c.selftrain;
      read(s, "learning_rate", st.learning_rate);
      read(s, "batch_images", st.batch_images);
      if (auto e = s.find("epochs"); e != s.end()) {
        st.epochs = e->is_array() ? e->get<std::vector<int>>() : std::vector<int>{e->get<int>()};
      }
      if (auto cs = s.find("crop_scale"); cs != s.end()) {
        const auto range = cs->get<std::vector<double>>();
        if (range.size() != 2) throw Error(Errc::invalid_argument, "crop_scale needs [min, max]");
        st.crop_scale_min = range[0];
        st.crop_scale_max = range[1];
      }
      read(s, "optimizer", st.optimizer);
      read(s, "trainer", st.trainer);
      if (auto ex = s.find("external"); ex != s.end()) {
        auto contract = ex->get<ExternalTrainerContract>();
        contract.workspace = resolve(contract.workspace, base);
        st.external = contract;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, path.string() + ": " + e.what());
  }
  return run_config_from_json(j, fs::absolute(path).parent_path());
}

}  // namespace unseg::cli
