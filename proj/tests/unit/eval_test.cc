#include "swrm/eval.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.h"
#include "swrm/errors.h"

namespace swrm {
namespace {

TEST(Metrics, WorkedExample) {
  const std::vector<double> preds = {1, -1, 0, 2}, labels = {1, 1, 0, -1};
  const MetricsReport r = compute_metrics(preds, labels);
  // Has0 signs: pred [+,-,+,+], gold [+,+,+,-].
  EXPECT_DOUBLE_EQ(r.has0_acc, 0.5);
  EXPECT_DOUBLE_EQ(r.mae_x100, 125.0);
  EXPECT_DOUBLE_EQ(r.mae, 1.25);
  EXPECT_EQ(r.has0_count, 4u);
  EXPECT_EQ(r.non0_count, 3u);
  // Non0 keeps samples 0, 1, 3: pred [+,-,+], gold [+,+,-].
  EXPECT_NEAR(r.non0_acc, 1.0 / 3.0, 1e-15);
  const auto o = testing::oracle_metrics(preds, labels);
  EXPECT_NEAR(r.has0_f1, o.has0_f1, 1e-12);
  EXPECT_NEAR(r.non0_f1, o.non0_f1, 1e-12);
  EXPECT_NEAR(r.corr, o.corr, 1e-12);
}

TEST(Metrics, PerfectPredictions) {
  const std::vector<double> y = {-2.4, -0.2, 0.0, 0.6, 3.0};
  const MetricsReport r = compute_metrics(y, y);
  EXPECT_EQ(r.has0_acc, 1.0);
  EXPECT_EQ(r.has0_f1, 1.0);
  EXPECT_EQ(r.non0_acc, 1.0);
  EXPECT_EQ(r.non0_f1, 1.0);
  EXPECT_EQ(r.mae_x100, 0.0);
  EXPECT_NEAR(r.corr, 1.0, 1e-12);
}

TEST(Metrics, ZeroPredictionCountsAsPositive) {
  const std::vector<double> preds = {0.0, 0.0}, labels = {1.0, -1.0};
  const MetricsReport r = compute_metrics(preds, labels);
  EXPECT_DOUBLE_EQ(r.non0_acc, 0.5);
  EXPECT_DOUBLE_EQ(r.has0_acc, 0.5);
}

TEST(Metrics, AllZeroLabelsLeaveNon0Empty) {
  const std::vector<double> preds = {0.5, -0.5}, labels = {0.0, 0.0};
  const MetricsReport r = compute_metrics(preds, labels);
  EXPECT_EQ(r.non0_count, 0u);
  EXPECT_EQ(r.non0_acc, 0.0);
  EXPECT_DOUBLE_EQ(r.has0_acc, 0.5);
}

TEST(Metrics, BadInputThrows) {
  const std::vector<double> a = {1.0, 2.0}, b = {1.0};
  EXPECT_THROW(compute_metrics(a, b), MetricError);
  EXPECT_THROW(compute_metrics(std::vector<double>{}, std::vector<double>{}), MetricError);
  const std::vector<double> nan = {std::nan(""), 1.0};
  EXPECT_THROW(compute_metrics(nan, a), MetricError);
}

TEST(WeightedF1, Examples) {
  EXPECT_DOUBLE_EQ(weighted_f1({true, false}, {true, false}), 1.0);
  EXPECT_DOUBLE_EQ(weighted_f1({false, true}, {true, false}), 0.0);
  // One class never predicted: its F1 is 0.
  // gold [+,+,-], pred all +: F1(+) = 0.8 with support 2, F1(-) = 0.
  EXPECT_NEAR(weighted_f1({true, true, true}, {true, true, false}), 2.0 * 0.8 / 3.0, 1e-15);
}

TEST(Pearson, ConstantSideIsZero) {
  const std::vector<double> a = {1, 1, 1}, b = {1, 2, 3};
  EXPECT_EQ(pearson(a, b), 0.0);
  const std::vector<double> c = {3, 2, 1};
  EXPECT_NEAR(pearson(b, c), -1.0, 1e-15);
}

class MetricsProperty : public ::testing::Test {
 protected:
  std::mt19937_64 rng{31};
  std::vector<double> draw(std::size_t n, bool allow_zero = true) {
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<double> v(n);
    for (auto& x : v) {
      x = std::round(u(rng) * 5) / 5;
      if (!allow_zero && x == 0) x = 0.2;
    }
    return v;
  }
};

TEST_F(MetricsProperty, AgreesWithOracle) {
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    const auto p = draw(n), y = draw(n);
    const MetricsReport r = compute_metrics(p, y);
    const auto o = testing::oracle_metrics(p, y);
    ASSERT_NEAR(r.has0_acc, o.has0_acc, 1e-12);
    ASSERT_NEAR(r.has0_f1, o.has0_f1, 1e-12);
    ASSERT_NEAR(r.non0_acc, o.non0_acc, 1e-12);
    ASSERT_NEAR(r.non0_f1, o.non0_f1, 1e-12);
    ASSERT_NEAR(r.mae_x100, o.mae_x100, 1e-9);
    ASSERT_NEAR(r.corr, o.corr, 1e-9);
    ASSERT_GE(r.has0_count, r.non0_count);
    ASSERT_GE(r.has0_acc, 0.0);
    ASSERT_LE(r.has0_acc, 1.0);
    ASSERT_GE(r.corr, -1.0 - 1e-12);
    ASSERT_LE(r.corr, 1.0 + 1e-12);
  }
}

TEST_F(MetricsProperty, PermutationInvariant) {
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    auto p = draw(n), y = draw(n);
    const MetricsReport a = compute_metrics(p, y);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> p2, y2;
    for (auto i : idx) {
      p2.push_back(p[i]);
      y2.push_back(y[i]);
    }
    const MetricsReport b = compute_metrics(p2, y2);
    ASSERT_NEAR(a.has0_acc, b.has0_acc, 1e-12);
    ASSERT_NEAR(a.non0_f1, b.non0_f1, 1e-12);
    ASSERT_NEAR(a.mae_x100, b.mae_x100, 1e-9);
    ASSERT_NEAR(a.corr, b.corr, 1e-9);
  }
}

TEST_F(MetricsProperty, MaeTranslationAndCorrAffineInvariance) {
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 30;
    const auto p = draw(n), y = draw(n);
    const MetricsReport a = compute_metrics(p, y);
    const double c = 0.75, scale = 2.5;
    std::vector<double> ps, ys, pa;
    for (std::size_t i = 0; i < n; ++i) {
      ps.push_back(p[i] + c);
      ys.push_back(y[i] + c);
      pa.push_back(scale * p[i] - 1.0);
    }
    ASSERT_NEAR(compute_metrics(ps, ys).mae_x100, a.mae_x100, 1e-9);
    ASSERT_NEAR(compute_metrics(pa, y).corr, a.corr, 1e-9);
  }
}

TEST(Stratified, Examples) {
  const std::vector<double> preds = {1, -1, 1, 1, 0}, labels = {1, 1, -1, 1, 0};
  const std::vector<bool> err = {true, true, false, false, false};
  const StratifiedRates r = stratified_misclassification(preds, labels, err);
  ASSERT_TRUE(r.with_error && r.without_error);
  EXPECT_DOUBLE_EQ(*r.with_error, 0.5);
  EXPECT_DOUBLE_EQ(*r.without_error, 0.5);
  const std::vector<bool> none = {false, false, false, false, false};
  EXPECT_FALSE(stratified_misclassification(preds, labels, none).with_error.has_value());
}

TEST(Average, FieldWiseMean) {
  MetricsReport a, b;
  a.has0_acc = 0.5;
  b.has0_acc = 1.0;
  a.corr = -0.2;
  b.corr = 0.4;
  const MetricsReport both[] = {a, b};
  const MetricsReport m = average(both);
  EXPECT_DOUBLE_EQ(m.has0_acc, 0.75);
  EXPECT_DOUBLE_EQ(m.corr, 0.1);
  EXPECT_THROW(average(std::span<const MetricsReport>()), MetricError);
}

TEST(Json, RoundTrip) {
  const std::vector<double> preds = {1, -1, 0, 2}, labels = {1, 1, 0, -1};
  const MetricsReport r = compute_metrics(preds, labels);
  const MetricsReport back = metrics_from_json(metrics_to_json(r));
  EXPECT_EQ(back.has0_acc, r.has0_acc);
  EXPECT_EQ(back.non0_f1, r.non0_f1);
  EXPECT_EQ(back.corr, r.corr);
  EXPECT_EQ(back.non0_count, r.non0_count);
  EXPECT_EQ(metrics_to_json(back), metrics_to_json(r));
}

TEST(Table, HeaderAndPercentages) {
  MetricsReport r;
  r.has0_acc = 0.8125;
  r.mae_x100 = 91.5;
  const NamedReport rows[] = {{"swrm", r}};
  const std::string t = format_metrics_table(rows);
  for (const char* col : {"Has0-Acc", "Has0-F1", "Non0-Acc", "Non0-F1", "MAE", "Corr", "swrm"}) {
    EXPECT_NE(t.find(col), std::string::npos) << col;
  }
  EXPECT_NE(t.find("81.25"), std::string::npos) << t;
}

}  // namespace
}  // namespace swrm
