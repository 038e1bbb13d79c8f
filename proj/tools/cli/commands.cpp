#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "unseg/discovery.hpp"
#include "unseg/error.hpp"
#include "unseg/external_trainer.hpp"
#include "unseg/manifest.hpp"
#include "unseg/matching.hpp"
#include "unseg/overlap.hpp"
#include "unseg/parallel.hpp"
#include "unseg/proposals.hpp"
#include "unseg/selftrain.hpp"
#include "unseg/stats.hpp"
#include "unseg/transfer.hpp"

#ifndef UNSEG_VERSION
#define UNSEG_VERSION "0.0.0"
#endif

namespace unseg::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_jsonl(const std::vector<json>& rows, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  for (const auto& r : rows) out << r.dump() << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::malformed, path.string() + ": " + e.what());
  }
}

// Joins per-image problems into one error so that every offending id is
// reported at once.
void raise_collected(const std::vector<std::string>& problems, const std::string& stage,
                     Errc code = Errc::validation) {
  if (problems.empty()) return;
  std::ostringstream msg;
  msg << stage << ": " << problems.size() << " problem(s)";
  for (const auto& p : problems) msg << "\n  " << p;
  throw Error(code, msg.str());
}

// Config fields that cannot change a stage's output.
json stage_snapshot(const RunConfig& config, const json& inputs) {
  json j = to_json(config);
  j.erase("workers");
  j["inputs"] = inputs;
  return j;
}

class Stage {
 public:
  Stage(const RunConfig& config, std::string name, const json& inputs, bool force)
      : name_(std::move(name)),
        dir_(config.output_dir / name_),
        snapshot_(stage_snapshot(config, inputs)),
        config_(to_json(config)),
        seed_(config.seed),
        start_(std::chrono::steady_clock::now()) {
    const fs::path meta = dir_ / "metadata.json";
    if (fs::exists(meta) && !force) {
      const json old = read_json(meta);
      if (old.value("status", "") == "complete") {
        if (old.value("snapshot", json()) == snapshot_) {
          up_to_date_ = true;
          return;
        }
        throw Error(Errc::invalid_argument,
                    dir_.string() + " holds a completed " + name_ +
                        " run with a different config; pass --force to overwrite");
      }
    }
    if (fs::exists(dir_)) fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_json(config_, dir_ / "config.json");
    write_metadata("running", {}, {});
  }

  bool up_to_date() const { return up_to_date_; }
  const fs::path& dir() const { return dir_; }

  void complete(const json& summary) { write_metadata("complete", {}, summary); }
  void fail(const std::string& error) { write_metadata("failed", error, {}); }

 private:
  void write_metadata(const std::string& status, const std::string& error, const json& summary) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json meta = {{"command", name_},
                 {"version", UNSEG_VERSION},
                 {"status", status},
                 {"seed", seed_},
                 {"started_at", started_at_},
                 {"wall_time_seconds", wall},
                 {"config", config_},
                 {"snapshot", snapshot_}};
    if (!error.empty()) {
      meta["error"] = error;
      meta["partial"] = true;
    }
    if (!summary.is_null()) meta["summary"] = summary;
    write_json(meta, dir_ / "metadata.json");
  }

  std::string name_;
  fs::path dir_;
  json snapshot_;
  json config_;
  std::uint64_t seed_;
  std::string started_at_ = utc_now();
  std::chrono::steady_clock::time_point start_;
  bool up_to_date_ = false;
};

template <typename Fn>
StageResult run_stage(const RunConfig& config, const std::string& name, const json& inputs,
                      bool force, Fn&& body) {
  config.validate();
  Stage stage(config, name, inputs, force);
  if (stage.up_to_date()) {
    std::cerr << name << ": " << stage.dir().string() << " is up to date\n";
    return {stage.dir(), true};
  }
  try {
    stage.complete(body(stage.dir()));
  } catch (const std::exception& e) {
    stage.fail(e.what());
    throw;
  }
  return {stage.dir(), false};
}

DatasetManifest require_manifest(const fs::path& path, const char* field) {
  if (path.empty()) {
    throw Error(Errc::invalid_argument, std::string("config: ") + field + " is not set");
  }
  return load_manifest(path);
}

json proposal_json(const ProposalRecord& r) {
  return {{"image_id", r.image_id},
          {"bbox", r.bbox},
          {"area_fraction", r.area_fraction},
          {"width", r.binary_mask.width},
          {"height", r.binary_mask.height}};
}

ProposalSet write_proposals(const RunConfig& config, const DatasetManifest& manifest,
                            const fs::path& dir) {
  ProposalSet ps = build_proposals(manifest, config.theta, config.min_area_fraction,
                                   config.crop_size, config.workers);
  std::vector<json> proposals, skipped;
  json crops = json::array();
  for (const auto& r : ps.records) {
    proposals.push_back(proposal_json(r));
    crops.push_back(r.crop);
  }
  for (const auto& s : ps.skipped) skipped.push_back(s);
  write_jsonl(proposals, dir / "proposals.jsonl");
  write_json(crops, dir / "crops.json");
  write_jsonl(skipped, dir / "skip_log.jsonl");
  return ps;
}

Eigen::MatrixXd load_proposal_features(const DatasetManifest& manifest, const ProposalSet& ps) {
  std::vector<std::string> problems;
  std::vector<FeatureTensor> rows(ps.records.size());
  std::uint64_t dim = 0;
  for (std::size_t i = 0; i < ps.records.size(); ++i) {
    const auto& id = ps.records[i].image_id;
    const ManifestEntry* e = manifest.find(id);
    if (!e || !e->feature_path) {
      problems.push_back(id + ": no feature_path in the manifest");
      continue;
    }
    try {
      rows[i] = read_feature_tensor(*e->feature_path);
    } catch (const Error& err) {
      problems.push_back(id + ": " + err.what());
      continue;
    }
    const auto& t = rows[i];
    const bool vector_shape = t.ndim() == 1 || (t.ndim() == 2 && t.dim(0) == 1);
    if (!vector_shape || t.size() == 0) {
      problems.push_back(id + ": proposal feature must have shape [D] or [1, D]");
      continue;
    }
    if (dim == 0) dim = t.size();
    if (t.size() != dim) {
      problems.push_back(id + ": feature dimension " + std::to_string(t.size()) + " differs from " +
                         std::to_string(dim));
    }
  }
  raise_collected(problems, "discover");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::uint64_t d = 0; d < dim; ++d) m(i, d) = rows[i].data()[d];
  }
  return m;
}

std::string mask_file(const std::string& id) { return id + ".png"; }

void write_masks(const std::vector<std::pair<std::string, LabelMask>>& masks, const fs::path& dir,
                 int workers) {
  fs::create_directories(dir);
  parallel_for(masks.size(), workers, [&](std::size_t i) {
    write_mask(masks[i].second, dir / mask_file(masks[i].first));
  });
}

// Image resolution for an entry: the image itself, else its ground truth.
ImageSize entry_size(const ManifestEntry& e) {
  try {
    return read_image_size(e.image_path);
  } catch (const Error&) {
    if (!e.gt_mask_path) throw;
    return read_image_size(*e.gt_mask_path);
  }
}

std::vector<DenseSample> load_dense(const DatasetManifest& manifest, std::vector<std::string>& problems,
                                    int workers) {
  std::vector<DenseSample> out(manifest.entries.size());
  std::vector<std::string> errs(manifest.entries.size());
  parallel_for(manifest.entries.size(), workers, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    auto& s = out[i];
    s.image_id = e.image_id;
    if (!e.dense_feature_path) {
      errs[i] = e.image_id + ": no dense_feature_path in the manifest";
      return;
    }
    try {
      s.features = read_feature_tensor(*e.dense_feature_path);
      if (s.features.ndim() != 3) {
        errs[i] = e.image_id + ": dense features must have shape [H, W, D]";
        return;
      }
      const auto size = entry_size(e);
      s.width = size.width;
      s.height = size.height;
    } catch (const Error& err) {
      errs[i] = e.image_id + ": " + err.what();
    }
  });
  for (auto& e : errs) {
    if (!e.empty()) problems.push_back(std::move(e));
  }
  return out;
}

std::vector<DenseSample> load_dense_all(const DatasetManifest& manifest, int workers) {
  std::vector<std::string> problems;
  auto out = load_dense(manifest, problems, workers);
  raise_collected(problems, "selftrain");
  return out;
}

MaskSet load_mask_dir(const fs::path& dir, const std::vector<DenseSample>& samples) {
  MaskSet masks;
  for (const auto& s : samples) {
    const fs::path p = dir / mask_file(s.image_id);
    if (fs::exists(p)) masks.emplace(s.image_id, read_mask(p));
  }
  return masks;
}

json loss_json(const TrainResult& r) {
  return {{"epoch_loss", r.epoch_loss}, {"step_loss", r.step_loss}};
}

std::vector<TrainerImage> trainer_images(const std::vector<const DatasetManifest*>& manifests) {
  std::vector<TrainerImage> images;
  std::set<std::string> seen;
  for (const auto* m : manifests) {
    for (const auto& e : m->entries) {
      if (seen.insert(e.image_id).second) images.push_back({e.image_id, e.image_path});
    }
  }
  return images;
}

// Classes with an IoU and a mean relative size (fraction of the image area
// covered when present) feed the size-IoU rank correlation.
json size_iou_json(const EvalReport& report, const std::vector<double>& size_sum,
                   const std::vector<std::size_t>& size_count, bool include_background) {
  std::vector<double> sizes, ious;
  json rows = json::array();
  for (const auto& c : report.classes) {
    if (c.class_id == 0 && !include_background) continue;
    if (c.class_id == 0 || !c.defined || size_count[c.class_id] == 0) continue;
    const double size = size_sum[c.class_id] / static_cast<double>(size_count[c.class_id]);
    sizes.push_back(size);
    ious.push_back(c.iou);
    rows.push_back({{"class_id", c.class_id}, {"mean_relative_size", size}, {"iou", c.iou}});
  }
  json out = {{"classes", rows}, {"spearman", nullptr}};
  try {
    out["spearman"] = spearman(sizes, ious);
  } catch (const Error&) {
    // fewer than three classes or constant input: left null
  }
  return out;
}

json evaluate(const RunConfig& config, const StageOptions& options, const fs::path& out_dir,
              bool transfer) {
  const DatasetManifest manifest = require_manifest(config.eval_manifest, "eval_manifest");
  const fs::path pred_dir = options.input_dir ? *options.input_dir
                                              : config.output_dir / "selftrain" / "predictions";
  if (!fs::is_directory(pred_dir)) {
    throw Error(Errc::io, "predictions directory not found: " + pred_dir.string() +
                              " (run selftrain or pass --predictions)");
  }

  std::optional<ClassMap> class_map;
  if (!config.class_map.empty()) class_map = ClassMap::load(config.class_map);
  if (transfer && !class_map) {
    throw Error(Errc::invalid_argument, "transfer-eval needs a class_map");
  }

  const int k = config.n_clusters + 1;
  std::vector<LabelMask> gts(manifest.entries.size()), preds(manifest.entries.size());
  std::vector<std::string> problems;
  int max_gt = 0;
  std::size_t missing = 0;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (!e.gt_mask_path) {
      problems.push_back(e.image_id + ": no gt_mask_path in the manifest");
      continue;
    }
    try {
      gts[i] = read_mask(*e.gt_mask_path);
      if (class_map) gts[i] = transfer_remap(gts[i], *class_map);
      const fs::path p = pred_dir / mask_file(e.image_id);
      if (fs::exists(p)) {
        preds[i] = read_mask(p);
      } else if (options.missing_as_background) {
        preds[i] = LabelMask(gts[i].width, gts[i].height);
        ++missing;
      } else {
        problems.push_back(e.image_id + ": no prediction in " + pred_dir.string());
        continue;
      }
      if (preds[i].width != gts[i].width || preds[i].height != gts[i].height) {
        problems.push_back(e.image_id + ": prediction size differs from the ground truth");
      }
      for (auto v : gts[i].labels) {
        if (v != kIgnoreLabel) max_gt = std::max<int>(max_gt, v);
      }
    } catch (const Error& err) {
      problems.push_back(e.image_id + ": " + err.what());
    }
  }
  raise_collected(problems, "eval");

  std::vector<std::string> names;
  if (class_map) {
    names = class_map->target_names();
  } else {
    names = manifest.class_names;
  }
  const int c = class_map ? class_map->target_classes()
                          : (names.empty() ? max_gt + 1 : static_cast<int>(names.size()));

  OverlapTable table(c, k);
  std::vector<double> size_sum(c, 0.0);
  std::vector<std::size_t> size_count(c, 0);
  for (std::size_t i = 0; i < gts.size(); ++i) {
    try {
      table.add(preds[i], gts[i]);
    } catch (const Error& err) {
      problems.push_back(manifest.entries[i].image_id + ": " + err.what());
      continue;
    }
    std::vector<std::size_t> counts(c, 0);
    for (auto v : gts[i].labels) {
      if (v != kIgnoreLabel) ++counts[v];
    }
    for (int cls = 0; cls < c; ++cls) {
      if (counts[cls] == 0) continue;
      size_sum[cls] += static_cast<double>(counts[cls]) / static_cast<double>(gts[i].pixel_count());
      ++size_count[cls];
    }
  }
  raise_collected(problems, "eval", Errc::label_out_of_range);

  const Matching matching = match(table, parse_match_mode(config.eval_mode));
  EvalOptions eo;
  eo.include_background = config.include_background;
  eo.discovered_threshold = config.discovered_threshold;
  const EvalReport report = make_report(table, matching, names, eo);

  json rj = report_json(report);
  rj["images"] = manifest.entries.size();
  rj["missing_predictions"] = missing;
  rj["size_iou"] = size_iou_json(report, size_sum, size_count, config.include_background);
  write_json(rj, out_dir / "report.json");
  const std::string text = report_text(report);
  std::ofstream(out_dir / "report.txt", std::ios::binary) << text;
  std::cout << text;
  return {{"miou", report.miou},
          {"discovered", report.discovered},
          {"has_cluster", report.has_cluster},
          {"classes", c},
          {"predictions", k}};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case Errc::eigensolver:
      case Errc::trainer_failure:
      case Errc::timeout:
        return kExitInternal;
      default:
        return kExitInput;
    }
  }
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return kExitInput;
  return kExitInternal;
}

StageResult cmd_propose(const RunConfig& config, const StageOptions& options) {
  return run_stage(config, "proposals", {}, options.force, [&](const fs::path& dir) {
    const DatasetManifest manifest = require_manifest(config.train_manifest, "train_manifest");
    const ProposalSet ps = write_proposals(config, manifest, dir);
    std::cerr << "proposals: " << ps.records.size() << " kept, " << ps.skipped.size()
              << " skipped\n";
    return json{{"proposals", ps.records.size()}, {"skipped", ps.skipped.size()}};
  });
}

StageResult cmd_discover(const RunConfig& config, const StageOptions& options) {
  return run_stage(config, "discover", {}, options.force, [&](const fs::path& dir) {
    const DatasetManifest manifest = require_manifest(config.train_manifest, "train_manifest");
    const ProposalSet ps = write_proposals(config, manifest, dir);
    const Eigen::MatrixXd features = load_proposal_features(manifest, ps);

    DiscoveryOptions opts;
    opts.k_neighbors = config.k_neighbors;
    opts.n_components = config.n_components;
    opts.filter_fraction = config.filter_fraction;
    opts.kmeans.n_clusters = config.n_clusters;
    opts.kmeans.n_init = config.n_init;
    opts.kmeans.max_iter = config.max_iter;
    opts.kmeans.seed = config.seed;
    opts.kmeans.workers = config.workers;
    opts.spectral.dense_limit = static_cast<std::size_t>(config.dense_limit);
    opts.spectral.seed = config.seed;
    const DiscoveryResult r = discover_categories(ps.records, features, opts);

    std::vector<std::string> ids;
    std::vector<json> rows;
    for (std::size_t i = 0; i < ps.records.size(); ++i) {
      ids.push_back(ps.records[i].image_id);
      rows.push_back({{"image_id", ps.records[i].image_id},
                      {"cluster_id", r.model.assignments[i]},
                      {"distance", r.model.distances[i]},
                      {"kept", static_cast<bool>(r.filter.keep[i])}});
    }
    write_jsonl(rows, dir / "assignments.jsonl");
    write_json(cluster_report_json(r.filter, ids), dir / "cluster_report.json");

    std::vector<std::pair<std::string, LabelMask>> masks;
    for (const auto& pm : r.pseudo_masks) masks.emplace_back(pm.image_id, pm.mask);
    write_masks(masks, dir / "pseudomasks", config.workers);

    std::vector<float> embedding;
    for (Eigen::Index i = 0; i < r.embedding.vectors.rows(); ++i) {
      for (Eigen::Index j = 0; j < r.embedding.vectors.cols(); ++j) {
        embedding.push_back(static_cast<float>(r.embedding.vectors(i, j)));
      }
    }
    write_feature_tensor(FeatureTensor({static_cast<std::uint64_t>(r.embedding.vectors.rows()),
                                        static_cast<std::uint64_t>(r.embedding.vectors.cols())},
                                       std::move(embedding)),
                         dir / "embedding.ftn");

    std::cerr << "discover: " << ps.records.size() << " proposals, " << ps.skipped.size()
              << " skipped, " << r.filter.kept_indices.size() << " pseudo-masks\n";
    return json{{"proposals", ps.records.size()},
                {"skipped", ps.skipped.size()},
                {"pseudo_masks", r.filter.kept_indices.size()},
                {"inertia", r.model.inertia},
                {"k_used", r.graph.k_used},
                {"components", r.embedding.components}};
  });
}

StageResult cmd_selftrain(const RunConfig& config, const StageOptions& options) {
  const fs::path mask_dir = options.input_dir ? fs::absolute(*options.input_dir)
                                              : config.output_dir / "discover" / "pseudomasks";
  return run_stage(
      config, "selftrain", {{"pseudomasks", mask_dir.string()}}, options.force,
      [&](const fs::path& dir) {
        if (!fs::is_directory(mask_dir)) {
          throw Error(Errc::io, "pseudo-mask directory not found: " + mask_dir.string() +
                                    " (run discover or pass --pseudomasks)");
        }
        const DatasetManifest train = require_manifest(config.train_manifest, "train_manifest");
        DatasetManifest extend, eval;
        if (!config.extend_manifest.empty()) extend = load_manifest(config.extend_manifest);
        if (!config.eval_manifest.empty()) eval = load_manifest(config.eval_manifest);
        const int num_classes = config.n_clusters;
        const auto& st = config.selftrain;
        json rounds = json::array();
        std::vector<std::pair<std::string, LabelMask>> final_masks;

        if (st.trainer == "external") {
          const auto images = trainer_images({&train, &extend, &eval});
          std::set<std::string> train_ids;
          for (const auto& m : {std::cref(train), std::cref(extend)}) {
            for (const auto& e : m.get().entries) train_ids.insert(e.image_id);
          }
          MaskSet current;
          for (const auto& e : train.entries) {
            const fs::path p = mask_dir / mask_file(e.image_id);
            if (fs::exists(p)) current.emplace(e.image_id, read_mask(p));
          }
          if (current.empty()) throw Error(Errc::invalid_argument, "no train image has a pseudo-mask");
          for (int round = 0; round < config.iterations; ++round) {
            const fs::path iter = dir / ("iter_" + std::to_string(round + 1));
            ExternalTrainerContract contract = *st.external;
            contract.workspace =
                (contract.workspace.empty() ? iter / "workspace" : contract.workspace / iter.filename());
            const fs::path preds = run_external_trainer(contract, images, current, num_classes);
            final_masks.clear();
            MaskSet next;
            for (const auto& img : images) {
              LabelMask m = read_mask(preds / mask_file(img.image_id));
              if (train_ids.count(img.image_id)) next.emplace(img.image_id, m);
              final_masks.emplace_back(img.image_id, std::move(m));
            }
            write_masks(final_masks, iter / "masks", config.workers);
            current = std::move(next);
            rounds.push_back({{"round", round + 1}, {"workspace", contract.workspace.string()}});
            std::cerr << "selftrain: round " << round + 1 << " done (external)\n";
          }
        } else {
          const auto train_samples = load_dense_all(train, config.workers);
          const auto extend_samples = load_dense_all(extend, config.workers);
          const MaskSet pseudo = load_mask_dir(mask_dir, train_samples);
          std::vector<TrainConfig> configs;
          for (int r = 0; r < config.iterations; ++r) {
            configs.push_back(st.round_config(r, config.seed, config.workers));
          }
          const auto results = self_train(train_samples, pseudo, extend_samples, num_classes, configs);
          for (std::size_t r = 0; r < results.size(); ++r) {
            const fs::path iter = dir / ("iter_" + std::to_string(r + 1));
            write_masks(results[r].masks, iter / "masks", config.workers);
            save_head(results[r].teacher.model, iter / "model");
            write_json(loss_json(results[r].teacher), iter / "loss_trace.json");
            const auto& loss = results[r].teacher.epoch_loss;
            rounds.push_back({{"round", r + 1},
                              {"epochs", configs[r].epochs},
                              {"final_loss", loss.empty() ? 0.0 : loss.back()}});
            std::cerr << "selftrain: round " << r + 1 << " final loss "
                      << (loss.empty() ? 0.0 : loss.back()) << '\n';
          }
          final_masks = results.back().masks;
          const HeadModel& model = results.back().teacher.model;
          std::set<std::string> have;
          for (const auto& [id, m] : final_masks) have.insert(id);
          DatasetManifest todo;
          for (const auto& e : eval.entries) {
            if (!have.count(e.image_id)) todo.entries.push_back(e);
          }
          const auto eval_samples = load_dense_all(todo, config.workers);
          std::vector<std::pair<std::string, LabelMask>> extra(eval_samples.size());
          parallel_for(eval_samples.size(), config.workers, [&](std::size_t i) {
            const auto& s = eval_samples[i];
            extra[i] = {s.image_id, predict_mask(model, s.features, s.width, s.height)};
          });
          final_masks.insert(final_masks.end(), extra.begin(), extra.end());
        }
        write_masks(final_masks, dir / "predictions", config.workers);
        return json{{"rounds", rounds}, {"predictions", final_masks.size()}};
      });
}

StageResult cmd_eval(const RunConfig& config, const StageOptions& options) {
  json inputs = {{"predictions", options.input_dir ? fs::absolute(*options.input_dir).string() : ""},
                 {"missing_as_background", options.missing_as_background}};
  return run_stage(config, "eval", inputs, options.force, [&](const fs::path& dir) {
    return evaluate(config, options, dir, false);
  });
}

StageResult cmd_transfer_eval(const RunConfig& config, const StageOptions& options) {
  json inputs = {{"predictions", options.input_dir ? fs::absolute(*options.input_dir).string() : ""},
                 {"missing_as_background", options.missing_as_background}};
  return run_stage(config, "transfer_eval", inputs, options.force, [&](const fs::path& dir) {
    return evaluate(config, options, dir, true);
  });
}

std::vector<std::string> sweep_parameters() {
  return {"filter_fraction", "n_clusters", "n_components", "k_neighbors",
          "theta",           "seed",       "iterations",   "n_init"};
}

StageResult cmd_sweep(const RunConfig& config, const SweepOptions& options) {
  const auto params = sweep_parameters();
  if (std::find(params.begin(), params.end(), options.param) == params.end()) {
    throw Error(Errc::invalid_argument, "sweep: unknown parameter '" + options.param + "'");
  }
  if (options.values.empty()) throw Error(Errc::invalid_argument, "sweep: no values given");
  const std::set<std::string> known{"discover", "selftrain", "eval"};
  for (const auto& s : options.stages) {
    if (!known.count(s)) throw Error(Errc::invalid_argument, "sweep: unknown stage '" + s + "'");
  }
  auto has = [&](const char* s) {
    return std::find(options.stages.begin(), options.stages.end(), s) != options.stages.end();
  };

  const fs::path root = config.output_dir / "sweep" / options.param;
  fs::create_directories(root);
  json rows = json::array();
  std::ostringstream text;
  text << options.param << "\tmIoU\tdiscovered\n";
  for (const auto& value : options.values) {
    json patch = to_json(config);
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      if (options.param == "filter_fraction" || options.param == "theta") {
        patch[options.param] = v;
      } else {
        patch[options.param] = static_cast<std::int64_t>(v);
        if (static_cast<double>(patch[options.param].get<std::int64_t>()) != v) {
          throw std::invalid_argument(value);
        }
      }
    } catch (const std::logic_error&) {
      throw Error(Errc::invalid_argument, "sweep: bad value '" + value + "' for " + options.param);
    }
    RunConfig point = run_config_from_json(patch);
    point.output_dir = root / value;
    StageOptions so;
    so.force = options.force;
    if (has("discover")) cmd_discover(point, so);
    if (has("selftrain")) cmd_selftrain(point, so);
    json row = {{"value", value}, {"run_dir", point.output_dir.string()}};
    if (has("eval")) {
      StageOptions eo = so;
      if (!has("selftrain")) {
        eo.input_dir = point.output_dir / "discover" / "pseudomasks";
        eo.missing_as_background = true;
      }
      cmd_eval(point, eo);
      const json report = read_json(point.output_dir / "eval" / "report.json");
      row["miou"] = report["miou"];
      row["discovered"] = report["discovered"];
      char line[128];
      std::snprintf(line, sizeof line, "%s\t%.4f\t%d\n", value.c_str(),
                    report["miou"].get<double>(), report["discovered"].get<int>());
      text << line;
    }
    rows.push_back(row);
  }
  write_json({{"param", options.param}, {"stages", options.stages}, {"points", rows}},
             root / "summary.json");
  std::ofstream(root / "summary.txt", std::ios::binary) << text.str();
  return {root, false};
}

}  // namespace unseg::cli
