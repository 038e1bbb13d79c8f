#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "unseg/image.hpp"
#include "unseg/selftrain.hpp"

namespace unseg {

// A segmentation trainer run as a subprocess against a workspace:
//
//   <workspace>/images/<id>.png        source images
//   <workspace>/pseudomasks/<id>.png   training masks (subset of images)
//   <workspace>/predictions/<id>.png   written by the command, one per image
//
// The command runs under /bin/sh -c with WORKSPACE and NUM_CLASSES in the
// environment; "{workspace}" and "{num_classes}" in the template are
// substituted as well. Output goes to <workspace>/trainer.log.
struct ExternalTrainerContract {
  std::string command;
  std::filesystem::path workspace;
  double timeout_seconds = 24 * 3600.0;
  std::vector<int> success_exit_codes{0};
};

void to_json(nlohmann::json& j, const ExternalTrainerContract& c);
void from_json(const nlohmann::json& j, ExternalTrainerContract& c);

struct TrainerImage {
  std::string image_id;
  std::filesystem::path image_path;
};

// Materializes the workspace, runs the command and validates predictions/.
// Returns the predictions directory. Failures raise Errc::trainer_failure
// (exit status, with the log tail), Errc::timeout, or Errc::validation naming
// every offending image id.
std::filesystem::path run_external_trainer(const ExternalTrainerContract& contract,
                                           const std::vector<TrainerImage>& images,
                                           const MaskSet& pseudo_masks, int num_classes);

}  // namespace unseg
