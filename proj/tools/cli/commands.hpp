#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "unseg/report.hpp"

namespace unseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;

int exit_code_for(const std::exception& e);

struct StageOptions {
  bool force = false;
  // discover: unused; selftrain: pseudo-mask directory; eval: predictions.
  std::optional<std::filesystem::path> input_dir;
  // eval: images without a prediction count as all background instead of
  // failing.
  bool missing_as_background = false;
};

struct StageResult {
  std::filesystem::path dir;
  bool up_to_date = false;  // complete output with the same config existed
};

// Each command writes into <output_dir>/<stage>/ with metadata.json (config
// snapshot, seed, version, wall time, status) and config.json (replayable).
// A complete stage with an identical config is left untouched; a different
// config needs force. Input problems raise unseg::Error; the stage is then
// marked failed and partial outputs stay in place.
StageResult cmd_propose(const RunConfig& config, const StageOptions& options = {});
StageResult cmd_discover(const RunConfig& config, const StageOptions& options = {});
StageResult cmd_selftrain(const RunConfig& config, const StageOptions& options = {});
StageResult cmd_eval(const RunConfig& config, const StageOptions& options = {});
// Same as eval with the ground truth remapped through config.class_map,
// which is mandatory here.
StageResult cmd_transfer_eval(const RunConfig& config, const StageOptions& options = {});

struct SweepOptions {
  std::string param;                // filter_fraction, n_clusters, ...
  std::vector<std::string> values;  // as typed; also used in directory names
  std::vector<std::string> stages{"discover", "selftrain", "eval"};
  bool force = false;
};

// Runs the stages once per value under <output_dir>/sweep/<param>/<value>/
// and writes summary.json and summary.txt next to them.
StageResult cmd_sweep(const RunConfig& config, const SweepOptions& options);

std::vector<std::string> sweep_parameters();

}  // namespace unseg::cli
