#include "oracles.hpp"
#include "test_util.hpp"
#include "unseg/matching.hpp"

namespace unseg {
namespace {

double assignment_value(const Eigen::MatrixXd& m, const std::vector<int>& a) {
  double v = 0.0;
  for (int i = 0; i < m.rows(); ++i) v += m(i, a[i]);
  return v;
}

TEST(Assignment, TwoByTwo) {
  Eigen::MatrixXd m(2, 2);
  m << 0.3, 0.7, 0.6, 0.4;
  EXPECT_EQ(linear_assignment(-m), (std::vector<int>{1, 0}));
}

TEST(Assignment, IdentityOnDominantDiagonal) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(5, 5);
  EXPECT_EQ(linear_assignment(-m), (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Assignment, AgreesWithBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::MatrixXd m(6, 6);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    const auto a = linear_assignment(-m);
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    ASSERT_EQ(sorted, (std::vector<int>{0, 1, 2, 3, 4, 5}));
    EXPECT_NEAR(assignment_value(m, a), testing::brute_force_max_assignment(m), 1e-12);
  }
}

TEST(Assignment, Errors) {
  EXPECT_ERRC(linear_assignment(Eigen::MatrixXd::Zero(2, 3)), Errc::invalid_argument);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_ERRC(linear_assignment(m), Errc::non_finite);
  EXPECT_TRUE(linear_assignment(Eigen::MatrixXd(0, 0)).empty());
}

OverlapTable random_table(std::mt19937_64& rng, int c, int k) {
  std::vector<LabelMask> preds, gts;
  for (int i = 0; i < 3; ++i) {
    preds.push_back(testing::random_mask(rng, 7, 6, k));
    gts.push_back(testing::random_mask(rng, 7, 6, c));
  }
  return accumulate_overlaps(preds, gts, c, k);
}

TEST(Hungarian, PinsBackgroundAndMaximizesForeground) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_table(rng, 5, 5);
    const auto m = hungarian_match(t);
    EXPECT_EQ(m.map[0], 0);
    Eigen::MatrixXd fg(4, 4);
    for (int p = 0; p < 4; ++p) {
      for (int c = 0; c < 4; ++c) fg(p, c) = t.iou(c + 1, p + 1);
    }
    EXPECT_NEAR(matched_iou_total(t, m), testing::brute_force_max_assignment(fg), 1e-12);
  }
}

TEST(Hungarian, RecoversPermutedLabels) {
  std::mt19937_64 rng(13);
  std::vector<LabelMask> preds, gts;
  const std::vector<std::uint8_t> perm{0, 3, 1, 2};
  for (int i = 0; i < 4; ++i) {
    auto gt = testing::random_mask(rng, 8, 8, 4);
    auto pred = gt;
    for (auto& v : pred.labels) v = perm[v];
    gts.push_back(gt);
    preds.push_back(pred);
  }
  const auto m = hungarian_match(accumulate_overlaps(preds, gts, 4, 4));
  for (int c = 0; c < 4; ++c) EXPECT_EQ(m.map[perm[c]], c);
}

TEST(Hungarian, RequiresEqualCounts) {
  std::mt19937_64 rng(14);
  try {
    hungarian_match(random_table(rng, 3, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
    EXPECT_NE(std::string(e.what()).find("majority"), std::string::npos);
  }
}

TEST(Majority, NeverBelowHungarian) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = random_table(rng, 4, 4);
    EXPECT_GE(matched_iou_total(t, majority_vote(t)) + 1e-12,
              matched_iou_total(t, hungarian_match(t)));
  }
}

TEST(Majority, MergesOverclusters) {
  OverlapTable t(3, 5);
  LabelMask gt(6, 1), pred(6, 1);
  gt.labels = {0, 1, 1, 2, 2, 2};
  pred.labels = {0, 1, 2, 3, 4, 4};
  t.add(pred, gt);
  const auto m = majority_vote(t);
  EXPECT_EQ(m.mode, MatchMode::majority);
  EXPECT_EQ(m.map, (std::vector<int>{0, 1, 1, 2, 2}));
}

TEST(Majority, BackgroundCanWin) {
  OverlapTable t(2, 3);
  LabelMask gt(4, 1), pred(4, 1);
  gt.labels = {0, 0, 0, 1};
  pred.labels = {0, 2, 2, 1};
  t.add(pred, gt);
  EXPECT_EQ(majority_vote(t).map, (std::vector<int>{0, 1, 0}));
}

TEST(MatchMode, Parse) {
  EXPECT_EQ(parse_match_mode("hungarian"), MatchMode::hungarian);
  EXPECT_EQ(parse_match_mode("majority"), MatchMode::majority);
  EXPECT_EQ(to_string(MatchMode::majority), "majority");
  EXPECT_ERRC(parse_match_mode("greedy"), Errc::invalid_argument);
}

}  // namespace
}  // namespace unseg
