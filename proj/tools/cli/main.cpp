#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "commands.hpp"
#include "fixture.hpp"
#include "unseg/error.hpp"

namespace {

namespace fs = std::filesystem;
using unseg::cli::RunConfig;

struct Overrides {
  std::string config;
  std::optional<std::string> train, extend, eval, output, mode, class_map, optimizer, trainer;
  std::optional<double> theta, filter_fraction, lr, min_area;
  std::optional<int> k, clusters, components, n_init, iterations, batch_images, workers, crop_size;
  std::optional<std::uint64_t> seed;
  std::vector<int> epochs;
  bool exclude_background = false;
  bool force = false;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--train", train, "train manifest (JSON lines)");
    app->add_option("--extend", extend, "extra images for later self-training rounds");
    app->add_option("--eval-manifest", eval, "evaluation manifest");
    app->add_option("-o,--output", output, "run directory");
    app->add_option("--theta", theta, "saliency threshold in [0, 1]");
    app->add_option("--min-area", min_area, "minimum proposal area fraction");
    app->add_option("--crop-size", crop_size, "proposal crop side in pixels");
    app->add_option("--k-neighbors", k, "neighbours in the affinity graph");
    app->add_option("--n-clusters", clusters, "number of clusters");
    app->add_option("--n-components", components, "spectral embedding dimension");
    app->add_option("--n-init", n_init, "k-means restarts");
    app->add_option("--filter-fraction", filter_fraction, "fraction dropped per cluster");
    app->add_option("--iterations", iterations, "self-training rounds");
    app->add_option("--epochs", epochs, "epochs per round (last value repeats)");
    app->add_option("--lr", lr, "self-training learning rate");
    app->add_option("--batch-images", batch_images, "images per training batch");
    app->add_option("--optimizer", optimizer, "adam or sgd");
    app->add_option("--trainer", trainer, "internal or external");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--mode", mode, "matching: hungarian or majority");
    app->add_option("--class-map", class_map, "class map JSON for transfer evaluation");
    app->add_flag("--exclude-background", exclude_background, "leave background out of mIoU");
    app->add_option("--workers", workers, "worker threads");
    app->add_flag("--force", force, "overwrite a completed stage");
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : unseg::cli::load_run_config(config);
    auto path = [](const std::optional<std::string>& v, fs::path& out) {
      if (v) out = fs::absolute(*v);
    };
    path(train, c.train_manifest);
    path(extend, c.extend_manifest);
    path(eval, c.eval_manifest);
    path(output, c.output_dir);
    path(class_map, c.class_map);
    if (theta) c.theta = *theta;
    if (min_area) c.min_area_fraction = *min_area;
    if (crop_size) c.crop_size = *crop_size;
    if (k) c.k_neighbors = *k;
    if (clusters) c.n_clusters = *clusters;
    if (components) c.n_components = *components;
    if (n_init) c.n_init = *n_init;
    if (filter_fraction) c.filter_fraction = *filter_fraction;
    if (iterations) c.iterations = *iterations;
    if (!epochs.empty()) c.selftrain.epochs = epochs;
    if (lr) c.selftrain.learning_rate = *lr;
    if (batch_images) c.selftrain.batch_images = *batch_images;
    if (optimizer) c.selftrain.optimizer = *optimizer;
    if (trainer) c.selftrain.trainer = *trainer;
    if (seed) c.seed = *seed;
    if (mode) c.eval_mode = *mode;
    if (exclude_background) c.include_background = false;
    if (workers) c.workers = *workers;
    c.output_dir = fs::absolute(c.output_dir);
    c.validate();
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised object category discovery and segmentation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", UNSEG_VERSION);

  Overrides ov;
  std::optional<std::string> input_dir;
  bool missing_as_background = false;
  unseg::cli::SweepOptions sweep;
  std::string fixture_dir;
  unseg::fixture::FixtureOptions fixture;

  auto* propose = app.add_subcommand("propose", "saliency proposals and crop specs only");
  auto* discover = app.add_subcommand("discover", "proposals, clustering and pseudo-masks");
  auto* selftrain = app.add_subcommand("selftrain", "iterative self-training on pseudo-masks");
  auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
  auto* transfer = app.add_subcommand("transfer-eval", "eval with ground truth remapped by a class map");
  auto* sweep_cmd = app.add_subcommand("sweep", "repeat the pipeline over parameter values");
  auto* make_fixture = app.add_subcommand("make-fixture", "write a synthetic dataset");

  for (auto* sub : {propose, discover, selftrain, eval, transfer, sweep_cmd}) ov.attach(sub);
  selftrain->add_option("--pseudomasks", input_dir, "pseudo-mask directory");
  for (auto* sub : {eval, transfer}) {
    sub->add_option("--predictions", input_dir, "prediction mask directory");
    sub->add_flag("--missing-as-background", missing_as_background,
                  "score images without a prediction as all background");
  }
  sweep_cmd->add_option("--param", sweep.param, "parameter to vary")
      ->required()
      ->check(CLI::IsMember(unseg::cli::sweep_parameters()));
  sweep_cmd->add_option("--values", sweep.values, "values to try")->required()->delimiter(',');
  sweep_cmd->add_option("--stages", sweep.stages, "stages per point")
      ->delimiter(',')
      ->check(CLI::IsMember({"discover", "selftrain", "eval"}));
  make_fixture->add_option("dir", fixture_dir, "output directory")->required();
  make_fixture->add_option("--images", fixture.images, "number of images");
  make_fixture->add_option("--categories", fixture.categories, "planted categories");
  make_fixture->add_option("--seed", fixture.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? unseg::cli::kExitOk : unseg::cli::kExitInput;
  }

  try {
    if (make_fixture->parsed()) {
      const auto fx = unseg::fixture::write_fixture(fs::absolute(fixture_dir), fixture);
      std::cout << fx.config.string() << '\n';
      return unseg::cli::kExitOk;
    }
    const RunConfig config = ov.resolve();
    unseg::cli::StageOptions so;
    so.force = ov.force;
    if (input_dir) so.input_dir = fs::absolute(*input_dir);
    so.missing_as_background = missing_as_background;
    if (propose->parsed()) unseg::cli::cmd_propose(config, so);
    if (discover->parsed()) unseg::cli::cmd_discover(config, so);
    if (selftrain->parsed()) unseg::cli::cmd_selftrain(config, so);
    if (eval->parsed()) unseg::cli::cmd_eval(config, so);
    if (transfer->parsed()) unseg::cli::cmd_transfer_eval(config, so);
    if (sweep_cmd->parsed()) {
      sweep.force = ov.force;
      std::cout << unseg::cli::cmd_sweep(config, sweep).dir.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return unseg::cli::exit_code_for(e);
  }
  return unseg::cli::kExitOk;
}
