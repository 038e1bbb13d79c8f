#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unseg/external_trainer.hpp"
#include "unseg/head.hpp"

namespace unseg::cli {

struct SelfTrainSettings {
  double learning_rate = 6e-5;
  int batch_images = 56;
  std::vector<int> epochs{10, 5};  // per round; the last entry repeats
  double crop_scale_min = 1.0;
  double crop_scale_max = 1.0;
  std::string optimizer = "adam";
  std::string trainer = "internal";  // internal | external
  std::optional<ExternalTrainerContract> external;

  TrainConfig round_config(int round, std::uint64_t seed, int workers) const;
};

struct RunConfig {
  std::filesystem::path train_manifest;
  std::filesystem::path extend_manifest;
  std::filesystem::path eval_manifest;
  double theta = 0.5;
  double min_area_fraction = 0.001;
  int crop_size = 256;
  int k_neighbors = 30;
  int n_clusters = 20;
  int n_components = 20;
  int n_init = 10;
  int max_iter = 300;
  double filter_fraction = 0.2;
  int dense_limit = 4096;
  SelfTrainSettings selftrain;
  int iterations = 2;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "run";
  std::string eval_mode = "hungarian";
  std::filesystem::path class_map;
  bool include_background = true;
  double discovered_threshold = 0.2;
  int workers = 1;

  // Throws Errc::invalid_argument naming the first offending field.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
// Unknown keys are rejected. Relative paths resolve against `base`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace unseg::cli
