#include "unseg/head.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "unseg/error.hpp"
#include "unseg/kmeans.hpp"
#include "unseg/parallel.hpp"

namespace unseg {
namespace {

struct Window {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
};

void check_feature_map(const FeatureTensor& f, int dim) {
  if (f.ndim() != 3) {
    throw Error(Errc::dimension_mismatch, "dense features must be [H, W, D]");
  }
  if (dim >= 0 && static_cast<int>(f.dim(2)) != dim) {
    throw Error(Errc::dimension_mismatch, "feature dimension " + std::to_string(f.dim(2)) +
                                              " does not match model dimension " +
                                              std::to_string(dim));
  }
}

std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng()) * static_cast<double>(n)));
}

// Gradient contribution of one window of one map, summed (not averaged).
void accumulate_window(const HeadModel& model, const FeatureTensor& f, const LabelMask& mask,
                       const Window& win, std::uint8_t ignore, LossGradient& acc) {
  const int classes = model.num_classes + 1;
  Eigen::VectorXd logits(classes);
  Eigen::VectorXd x(model.dim);
  for (int y = win.y0; y < win.y0 + win.h; ++y) {
    for (int xx = win.x0; xx < win.x0 + win.w; ++xx) {
      const auto label = mask.at(xx, y);
      if (label == ignore) continue;
      const auto feat = f.pixel(y, xx);
      for (int d = 0; d < model.dim; ++d) x[d] = feat[d];
      logits.noalias() = model.weights * x + model.bias;
      const double mx = logits.maxCoeff();
      double z = 0.0;
      for (int c = 0; c < classes; ++c) {
        logits[c] = std::exp(logits[c] - mx);
        z += logits[c];
      }
      logits /= z;  // probabilities
      acc.loss += -std::log(std::max(logits[label], std::numeric_limits<double>::min()));
      logits[label] -= 1.0;
      acc.grad_weights.noalias() += logits * x.transpose();
      acc.grad_bias += logits;
      ++acc.pixels;
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(Errc::invalid_argument, "learning_rate must be > 0");
  if (epochs < 1) throw Error(Errc::invalid_argument, "epochs must be >= 1");
  if (batch_images < 1) throw Error(Errc::invalid_argument, "batch_images must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw Error(Errc::invalid_argument, "invalid adaptive-moment parameters");
  }
  if (!(crop_scale_min > 0.0 && crop_scale_min <= crop_scale_max && crop_scale_max <= 1.0)) {
    throw Error(Errc::invalid_argument, "crop scales must satisfy 0 < min <= max <= 1");
  }
}

HeadModel HeadModel::zeros(int num_classes, int dim) {
  if (num_classes < 1 || num_classes > kMaxClasses - 1) {
    throw Error(Errc::invalid_argument, "class count must lie in [1, 253]");
  }
  if (dim < 1) throw Error(Errc::invalid_argument, "feature dimension must be >= 1");
  HeadModel m;
  m.num_classes = num_classes;
  m.dim = dim;
  m.weights = Eigen::MatrixXd::Zero(num_classes + 1, dim);
  m.bias = Eigen::VectorXd::Zero(num_classes + 1);
  return m;
}

int HeadModel::predict(std::span<const float> feature) const {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c <= num_classes; ++c) {
    double s = bias[c];
    for (int d = 0; d < dim; ++d) s += weights(c, d) * feature[d];
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

LossGradient loss_and_gradient(const HeadModel& model, const Eigen::MatrixXd& features,
                               std::span<const int> targets) {
  if (features.cols() != model.dim || static_cast<std::size_t>(features.rows()) != targets.size()) {
    throw Error(Errc::dimension_mismatch, "features and targets disagree with the model");
  }
  LossGradient g;
  g.grad_weights = Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
  g.grad_bias = Eigen::VectorXd::Zero(model.bias.size());
  const int classes = model.num_classes + 1;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const int y = targets[i];
    if (y < 0 || y >= classes) throw Error(Errc::label_out_of_range, "target out of range");
    Eigen::VectorXd p = model.weights * features.row(i).transpose() + model.bias;
    p = (p.array() - p.maxCoeff()).exp();
    p /= p.sum();
    g.loss += -std::log(p[y]);
    p[y] -= 1.0;
    g.grad_weights.noalias() += p * features.row(i);
    g.grad_bias += p;
  }
  g.pixels = targets.size();
  if (g.pixels > 0) {
    const double inv = 1.0 / static_cast<double>(g.pixels);
    g.loss *= inv;
    g.grad_weights *= inv;
    g.grad_bias *= inv;
  }
  return g;
}

TrainResult train_head(std::span<const FeatureTensor> features, std::span<const LabelMask> masks,
                       int num_classes, const TrainConfig& config) {
  config.validate();
  if (features.size() != masks.size()) {
    throw Error(Errc::dimension_mismatch, "one mask per feature map is required");
  }
  if (features.empty()) throw Error(Errc::invalid_argument, "no training images");
  check_feature_map(features[0], -1);
  const int dim = static_cast<int>(features[0].dim(2));
  std::size_t labelled = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    check_feature_map(features[i], dim);
    const auto& m = masks[i];
    if (m.height != static_cast<int>(features[i].dim(0)) ||
        m.width != static_cast<int>(features[i].dim(1))) {
      throw Error(Errc::dimension_mismatch,
                  "mask " + std::to_string(i) + " is " + std::to_string(m.width) + "x" +
                      std::to_string(m.height) + " but its feature map is " +
                      std::to_string(features[i].dim(1)) + "x" + std::to_string(features[i].dim(0)));
    }
    for (auto v : m.labels) {
      if (v == config.ignore_label) continue;
      if (v > num_classes) {
        throw Error(Errc::label_out_of_range, "mask " + std::to_string(i) + " holds label " +
                                                  std::to_string(v) + " > " +
                                                  std::to_string(num_classes));
      }
      ++labelled;
    }
  }
  if (labelled == 0) throw Error(Errc::invalid_argument, "all pixels are ignored");

  TrainResult result;
  result.model = HeadModel::zeros(num_classes, dim);
  auto& model = result.model;
  Eigen::MatrixXd m_w = Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
  Eigen::MatrixXd v_w = m_w;
  Eigen::VectorXd m_b = Eigen::VectorXd::Zero(model.bias.size());
  Eigen::VectorXd v_b = m_b;
  std::mt19937_64 rng(config.seed);
  const bool subwindows = config.crop_scale_min < 1.0;
  long step = 0;

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[bounded(rng, i)]);
    double epoch_loss = 0.0;
    std::size_t epoch_pixels = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_images)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_images));
      std::vector<Window> windows(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const auto& f = features[order[b]];
        Window w{0, 0, static_cast<int>(f.dim(1)), static_cast<int>(f.dim(0))};
        if (subwindows) {
          const double scale = config.crop_scale_min +
                               uniform01(rng()) * (config.crop_scale_max - config.crop_scale_min);
          const double side = std::sqrt(scale);
          const int ww = std::max(1, static_cast<int>(std::lround(side * w.w)));
          const int hh = std::max(1, static_cast<int>(std::lround(side * w.h)));
          w.x0 = static_cast<int>(bounded(rng, static_cast<std::size_t>(w.w - ww + 1)));
          w.y0 = static_cast<int>(bounded(rng, static_cast<std::size_t>(w.h - hh + 1)));
          w.w = ww;
          w.h = hh;
        }
        windows[b - start] = w;
      }
      // Per-image partial sums, reduced in batch order for reproducibility.
      std::vector<LossGradient> parts(end - start);
      parallel_for(parts.size(), config.workers, [&](std::size_t t) {
        auto& acc = parts[t];
        acc.grad_weights = Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
        acc.grad_bias = Eigen::VectorXd::Zero(model.bias.size());
        const auto idx = order[start + t];
        accumulate_window(model, features[idx], masks[idx], windows[t], config.ignore_label, acc);
      });
      LossGradient total;
      total.grad_weights = Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
      total.grad_bias = Eigen::VectorXd::Zero(model.bias.size());
      for (const auto& p : parts) {
        total.loss += p.loss;
        total.grad_weights += p.grad_weights;
        total.grad_bias += p.grad_bias;
        total.pixels += p.pixels;
      }
      if (total.pixels == 0) continue;
      const double inv = 1.0 / static_cast<double>(total.pixels);
      const double batch_loss = total.loss * inv;
      total.grad_weights *= inv;
      total.grad_bias *= inv;
      result.step_loss.push_back(batch_loss);
      epoch_loss += total.loss;
      epoch_pixels += total.pixels;

      ++step;
      if (config.optimizer == Optimizer::sgd) {
        model.weights -= config.learning_rate * total.grad_weights;
        model.bias -= config.learning_rate * total.grad_bias;
      } else {
        const double b1 = config.beta1;
        const double b2 = config.beta2;
        m_w = b1 * m_w + (1.0 - b1) * total.grad_weights;
        v_w = b2 * v_w + (1.0 - b2) * total.grad_weights.cwiseAbs2();
        m_b = b1 * m_b + (1.0 - b1) * total.grad_bias;
        v_b = b2 * v_b + (1.0 - b2) * total.grad_bias.cwiseAbs2();
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
        model.weights.array() -= config.learning_rate * (m_w.array() / c1) /
                                 ((v_w.array() / c2).sqrt() + config.epsilon);
        model.bias.array() -= config.learning_rate * (m_b.array() / c1) /
                              ((v_b.array() / c2).sqrt() + config.epsilon);
      }
    }
    result.epoch_loss.push_back(epoch_pixels ? epoch_loss / static_cast<double>(epoch_pixels)
                                             : 0.0);
  }
  if (!model.weights.allFinite() || !model.bias.allFinite()) {
    throw Error(Errc::non_finite, "training diverged to non-finite parameters");
  }
  return result;
}

LabelMask predict_mask(const HeadModel& model, const FeatureTensor& features, int width,
                       int height) {
  check_feature_map(features, model.dim);
  const int h = static_cast<int>(features.dim(0));
  const int w = static_cast<int>(features.dim(1));
  LabelMask grid(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      grid.at(x, y) = static_cast<std::uint8_t>(model.predict(features.pixel(y, x)));
    }
  }
  return resize_nearest(grid, width, height);
}

void save_head(const HeadModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto rows = static_cast<std::uint64_t>(model.weights.rows());
  const auto cols = static_cast<std::uint64_t>(model.weights.cols());
  std::vector<float> w(rows * cols);
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) w[r * cols + c] = static_cast<float>(model.weights(r, c));
  }
  std::vector<float> b(rows);
  for (std::uint64_t r = 0; r < rows; ++r) b[r] = static_cast<float>(model.bias[r]);
  write_feature_tensor(FeatureTensor({rows, cols}, std::move(w)), dir / "weights.ftn");
  write_feature_tensor(FeatureTensor({rows}, std::move(b)), dir / "bias.ftn");
}

HeadModel load_head(const std::filesystem::path& dir) {
  const auto w = read_feature_tensor(dir / "weights.ftn");
  const auto b = read_feature_tensor(dir / "bias.ftn");
  if (w.ndim() != 2 || b.ndim() != 1 || b.dim(0) != w.dim(0)) {
    throw Error(Errc::dimension_mismatch, "inconsistent head model files in " + dir.string());
  }
  auto model = HeadModel::zeros(static_cast<int>(w.dim(0)) - 1, static_cast<int>(w.dim(1)));
  for (std::uint64_t r = 0; r < w.dim(0); ++r) {
    for (std::uint64_t c = 0; c < w.dim(1); ++c) model.weights(r, c) = w.data()[r * w.dim(1) + c];
    model.bias[r] = b.data()[r];
  }
  return model;
}

}  // namespace unseg
