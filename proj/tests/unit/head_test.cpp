#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "unseg/head.hpp"

namespace unseg {
namespace {

using testing::TempDir;

TEST(Loss, ZeroModelSinglePixelGradient) {
  const HeadModel m = HeadModel::zeros(1, 1);
  Eigen::MatrixXd f(1, 1);
  f << 1.0;
  const std::vector<int> y{1};
  const auto lg = loss_and_gradient(m, f, y);
  EXPECT_NEAR(lg.loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(lg.grad_bias(0), 0.5, 1e-15);
  EXPECT_NEAR(lg.grad_bias(1), -0.5, 1e-15);
  EXPECT_NEAR(lg.grad_weights(0, 0), 0.5, 1e-15);
  EXPECT_EQ(lg.pixels, 1u);
}

double loss_at(const HeadModel& m, const Eigen::MatrixXd& f, const std::vector<int>& y) {
  return loss_and_gradient(m, f, y).loss;
}

TEST(Loss, FiniteDifferenceAgreement) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> classes(1, 4), dims(1, 6);
  const double h = 1e-4;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    HeadModel m = HeadModel::zeros(classes(rng), dims(rng));
    for (int i = 0; i < m.weights.size(); ++i) m.weights.data()[i] = g(rng);
    for (int i = 0; i < m.bias.size(); ++i) m.bias(i) = g(rng);
    Eigen::MatrixXd f(5, m.dim);
    for (int i = 0; i < f.size(); ++i) f.data()[i] = g(rng);
    std::uniform_int_distribution<int> label(0, m.num_classes);
    std::vector<int> y(5);
    for (auto& v : y) v = label(rng);
    const auto lg = loss_and_gradient(m, f, y);
    for (int i = 0; i < m.weights.size(); ++i) {
      HeadModel p = m, q = m;
      p.weights.data()[i] += h;
      q.weights.data()[i] -= h;
      const double fd = (loss_at(p, f, y) - loss_at(q, f, y)) / (2 * h);
      const double a = lg.grad_weights.data()[i];
      worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Loss, TargetOutOfRange) {
  const HeadModel m = HeadModel::zeros(2, 1);
  EXPECT_ERRC(loss_and_gradient(m, Eigen::MatrixXd::Ones(1, 1), std::vector<int>{3}),
              Errc::label_out_of_range);
  EXPECT_ERRC(loss_and_gradient(m, Eigen::MatrixXd::Ones(1, 2), std::vector<int>{0}),
              Errc::dimension_mismatch);
}

TEST(Predict, BackgroundBiasGivesBackground) {
  HeadModel m = HeadModel::zeros(3, 2);
  m.bias(0) = 10.0;
  const FeatureTensor f({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(predict_mask(m, f, 2, 2).labels, (std::vector<std::uint8_t>{0, 0, 0, 0}));
}

TEST(Predict, OneHotIdentity) {
  HeadModel m = HeadModel::zeros(3, 4);
  m.weights = Eigen::MatrixXd::Identity(4, 4);
  std::vector<float> data;
  for (int k : {2, 0, 3, 1}) {
    for (int d = 0; d < 4; ++d) data.push_back(d == k ? 1.0f : 0.0f);
  }
  const FeatureTensor f({1, 4, 4}, data);
  EXPECT_EQ(predict_mask(m, f, 4, 1).labels, (std::vector<std::uint8_t>{2, 0, 3, 1}));
}

TEST(Predict, TiesGoToLowestClass) {
  const HeadModel m = HeadModel::zeros(4, 1);
  const float x = 1.0f;
  EXPECT_EQ(m.predict(std::span<const float>(&x, 1)), 0);
}

TEST(Predict, UpsamplesByNearestNeighbour) {
  HeadModel m = HeadModel::zeros(1, 1);
  m.weights(1, 0) = 1.0;
  const FeatureTensor f({1, 2, 1}, {-1, 1});
  EXPECT_EQ(predict_mask(m, f, 4, 2).labels, (std::vector<std::uint8_t>{0, 0, 1, 1, 0, 0, 1, 1}));
  EXPECT_ERRC(predict_mask(HeadModel::zeros(1, 3), f, 2, 1), Errc::dimension_mismatch);
}

// Two linearly separable classes along the first feature axis.
struct Separable {
  std::vector<FeatureTensor> features;
  std::vector<LabelMask> masks;
};

Separable separable(int images, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  std::bernoulli_distribution coin(0.5);
  Separable s;
  for (int i = 0; i < images; ++i) {
    LabelMask m(6, 5);
    std::vector<float> data;
    for (auto& v : m.labels) {
      v = coin(rng);
      data.push_back(static_cast<float>((v ? 2.0 : -2.0) + g(rng)));
      data.push_back(static_cast<float>(g(rng)));
    }
    s.features.emplace_back(std::vector<std::uint64_t>{5, 6, 2}, data);
    s.masks.push_back(m);
  }
  return s;
}

TEST(Train, SeparableReachesFullAccuracy) {
  const auto s = separable(8, 2);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 50;
  const auto r = train_head(s.features, s.masks, 1, cfg);
  for (std::size_t i = 0; i < s.features.size(); ++i) {
    EXPECT_EQ(predict_mask(r.model, s.features[i], 6, 5), s.masks[i]);
  }
  for (double l : r.step_loss) EXPECT_TRUE(std::isfinite(l));
  EXPECT_EQ(r.epoch_loss.size(), 50u);
  EXPECT_NEAR(r.epoch_loss.front(), std::log(2.0), 1e-12);
}

TEST(Train, FullBatchGradientDescentIsMonotone) {
  const auto s = separable(6, 3);
  TrainConfig cfg;
  cfg.optimizer = Optimizer::sgd;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 200;
  cfg.batch_images = 6;
  const auto r = train_head(s.features, s.masks, 1, cfg);
  for (std::size_t i = 1; i < r.epoch_loss.size(); ++i) {
    ASSERT_LE(r.epoch_loss[i], r.epoch_loss[i - 1]);
  }
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Train, DeterministicAndWorkerIndependent) {
  const auto s = separable(10, 4);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 5;
  cfg.batch_images = 3;
  cfg.seed = 17;
  const auto a = train_head(s.features, s.masks, 1, cfg);
  const auto b = train_head(s.features, s.masks, 1, cfg);
  cfg.workers = 4;
  const auto c = train_head(s.features, s.masks, 1, cfg);
  EXPECT_EQ(a.model.weights, b.model.weights);
  EXPECT_EQ(a.model.weights, c.model.weights);
  EXPECT_EQ(a.step_loss, c.step_loss);
}

TEST(Train, InvariantToPixelPresentationOrder) {
  const auto s = separable(4, 5);
  std::mt19937_64 rng(6);
  std::vector<FeatureTensor> pf;
  std::vector<LabelMask> pm;
  std::vector<std::vector<int>> perms;
  for (std::size_t i = 0; i < s.features.size(); ++i) {
    std::vector<int> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<float> data;
    LabelMask m(6, 5);
    for (int p = 0; p < 30; ++p) {
      const auto src = s.features[i].row(0).data() + perm[p] * 2;
      data.push_back(src[0]);
      data.push_back(src[1]);
      m.labels[p] = s.masks[i].labels[perm[p]];
    }
    pf.emplace_back(std::vector<std::uint64_t>{5, 6, 2}, data);
    pm.push_back(m);
    perms.push_back(perm);
  }
  TrainConfig cfg;
  cfg.learning_rate = 0.02;
  cfg.epochs = 10;
  cfg.batch_images = 2;
  const auto a = train_head(s.features, s.masks, 1, cfg);
  const auto b = train_head(pf, pm, 1, cfg);
  EXPECT_LT((a.model.weights - b.model.weights).cwiseAbs().maxCoeff(), 1e-9);
  for (std::size_t i = 0; i < pf.size(); ++i) {
    const auto ma = predict_mask(a.model, s.features[i], 6, 5);
    const auto mb = predict_mask(b.model, pf[i], 6, 5);
    for (int p = 0; p < 30; ++p) EXPECT_EQ(mb.labels[p], ma.labels[perms[i][p]]);
  }
}

TEST(Train, IgnoredPixelsDoNotContribute) {
  auto s = separable(3, 7);
  TrainConfig cfg;
  cfg.learning_rate = 0.02;
  cfg.epochs = 3;
  const auto base = train_head(s.features, s.masks, 1, cfg);
  // Same pixels plus an ignored border column of garbage features.
  std::vector<FeatureTensor> wide;
  std::vector<LabelMask> wide_masks;
  for (std::size_t i = 0; i < s.features.size(); ++i) {
    std::vector<float> data;
    LabelMask m(7, 5, kIgnoreLabel);
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 7; ++x) {
        if (x < 6) {
          const auto px = s.features[i].pixel(y, x);
          data.insert(data.end(), px.begin(), px.end());
          m.at(x, y) = s.masks[i].at(x, y);
        } else {
          data.push_back(100.0f);
          data.push_back(-100.0f);
        }
      }
    }
    wide.emplace_back(std::vector<std::uint64_t>{5, 7, 2}, data);
    wide_masks.push_back(m);
  }
  const auto r = train_head(wide, wide_masks, 1, cfg);
  EXPECT_LT((r.model.weights - base.model.weights).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Train, Errors) {
  const auto s = separable(2, 8);
  TrainConfig cfg;
  std::vector<LabelMask> wrong{LabelMask(3, 3), LabelMask(3, 3)};
  EXPECT_ERRC(train_head(s.features, wrong, 1, cfg), Errc::dimension_mismatch);
  std::vector<LabelMask> ignored{LabelMask(6, 5, kIgnoreLabel), LabelMask(6, 5, kIgnoreLabel)};
  EXPECT_ERRC(train_head(s.features, ignored, 1, cfg), Errc::invalid_argument);
  std::vector<LabelMask> high{LabelMask(6, 5, 3), LabelMask(6, 5, 0)};
  EXPECT_ERRC(train_head(s.features, high, 1, cfg), Errc::label_out_of_range);
  cfg.learning_rate = 0.0;
  EXPECT_ERRC(train_head(s.features, s.masks, 1, cfg), Errc::invalid_argument);
  cfg.learning_rate = 1e-3;
  cfg.epochs = 0;
  EXPECT_ERRC(train_head(s.features, s.masks, 1, cfg), Errc::invalid_argument);
}

TEST(Train, SubwindowsStayDeterministic) {
  const auto s = separable(6, 9);
  TrainConfig cfg;
  cfg.learning_rate = 0.02;
  cfg.epochs = 4;
  cfg.crop_scale_min = 0.3;
  cfg.crop_scale_max = 0.8;
  const auto a = train_head(s.features, s.masks, 1, cfg);
  const auto b = train_head(s.features, s.masks, 1, cfg);
  EXPECT_EQ(a.model.weights, b.model.weights);
}

TEST(Head, SaveLoad) {
  TempDir dir;
  HeadModel m = HeadModel::zeros(2, 3);
  m.weights.setRandom();
  m.bias.setRandom();
  save_head(m, dir / "model");
  const auto back = load_head(dir / "model");
  EXPECT_EQ(back.num_classes, 2);
  EXPECT_EQ(back.dim, 3);
  EXPECT_LT((back.weights - m.weights).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((back.bias - m.bias).cwiseAbs().maxCoeff(), 1e-6);
}

}  // namespace
}  // namespace unseg
