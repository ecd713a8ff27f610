#include "swrm/refiner.h"

#include <gtest/gtest.h>

#include <random>

#include "oracles.h"
#include "swrm/errors.h"
#include "swrm/model.h"

namespace swrm {
namespace {

using testing::dot;
using testing::logistic;

Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

struct Fixture {
  RefinerDims dims{4, 4, 2, 3, 5};
  Rng rng{5};
  RefinerParams params{dims, rng};
  EncoderStates states;

  explicit Fixture(Eigen::Index n = 7) {
    states.h_l = gaussian(n, dims.d_h_l, rng);
    states.h_v = gaussian(n, dims.d_h_v, rng);
    states.h_a = gaussian(n, dims.d_h_a, rng);
    states.h_va = gaussian(n, dims.d_h_va, rng);
    // Give the biases something to do.
    params.b1.value(0, 0) = 0.3;
    params.b2.value(0, 0) = -0.2;
    params.b3.value(0, 0) = 0.1;
  }

  RowVector gate_input(std::size_t s) const {
    const auto i = static_cast<Eigen::Index>(s);
    RowVector v(dims.d_h_l + dims.d_h_v + dims.d_h_a + dims.d_h_va);
    v << states.h_l.row(i), states.h_v.row(i), states.h_a.row(i), states.h_va.row(i);
    return v;
  }
  RowVector context(std::size_t s) const {
    const auto i = static_cast<Eigen::Index>(s);
    RowVector v(dims.d_h_v + dims.d_h_a + dims.d_h_va);
    v << states.h_v.row(i), states.h_a.row(i), states.h_va.row(i);
    return v;
  }
};

TEST(RefinerParams, ShapesFollowDims) {
  Fixture f;
  EXPECT_EQ(f.params.w1.value.cols(), 4 + 2 + 3 + 5);
  EXPECT_EQ(f.params.w2.value.cols(), 4 + 2 + 3 + 5);
  EXPECT_EQ(f.params.w3.value.cols(), 8);
  EXPECT_EQ(f.params.b1.value.size(), 1);
}

TEST(ContextEncoders, PresetWidthsAndRowCounts) {
  const ModelConfig preset = preset_config("mosi-speechbrain");
  EXPECT_EQ(preset.d_h_v, 16);
  EXPECT_EQ(preset.d_h_a, 32);
  EXPECT_EQ(preset.d_h_va, 48);
  Rng rng(3);
  const TextEncoder text(8, 16, rng);
  const ContextEncoders enc(5, 4, preset.d_h_v, preset.d_h_a, preset.d_h_va, rng);
  const EncoderStates st = encode_contexts(text, enc, Matrix::Zero(7, 8), Matrix::Zero(7, 5),
                                           Matrix::Zero(7, 4));
  EXPECT_EQ(st.h_l.rows(), 7);
  EXPECT_EQ(st.h_l.cols(), 8);
  EXPECT_EQ(st.h_v.cols(), 16);
  EXPECT_EQ(st.h_a.cols(), 32);
  EXPECT_EQ(st.h_va.cols(), 48);
  EXPECT_EQ(st.h_va.rows(), 7);
  EXPECT_TRUE(st.h_l.allFinite() && st.h_v.allFinite() && st.h_a.allFinite() &&
              st.h_va.allFinite());
  EXPECT_THROW(encode_contexts(text, enc, Matrix::Zero(7, 8), Matrix::Zero(6, 5),
                               Matrix::Zero(7, 4)),
               ConfigError);
  EXPECT_THROW(encode_contexts(text, enc, Matrix::Zero(7, 8), Matrix::Zero(7, 3),
                               Matrix::Zero(7, 4)),
               ConfigError);
}

TEST(GateFilter, ClosedGateIsIdentity) {
  Fixture f;
  const RowVector x = gaussian(1, 4, f.rng);
  const GateResult g = gate_filter(f.states, 2, x, 0, f.params);
  EXPECT_EQ(g.r_v, x);
  EXPECT_GT(g.g_v, 0.0);
  EXPECT_LT(g.g_v, 1.0);
}

TEST(GateFilter, ZeroPreActivationGivesHalf) {
  Fixture f;
  f.params.w1.value.setZero();
  f.params.b1.value.setZero();
  const RowVector x = (RowVector(4) << 2, -4, 6, 0).finished();
  const GateResult g = gate_filter(f.states, 0, x, 1, f.params);
  EXPECT_DOUBLE_EQ(g.g_v, 0.5);
  EXPECT_TRUE(g.r_v.isApprox(x * 0.5));
}

TEST(GateFilter, MatchesScalarOracle) {
  Fixture f;
  for (std::size_t s = 0; s < 7; ++s) {
    const RowVector x = gaussian(1, 4, f.rng);
    const double want = logistic(dot(f.params.w1.value.row(0), f.gate_input(s)) +
                                 f.params.b1.value(0, 0));
    const GateResult g = gate_filter(f.states, s, x, 1, f.params);
    EXPECT_NEAR(g.g_v, want, 1e-12);
    EXPECT_LT((g.r_v - (1.0 - want) * x).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CandidateAttention, EqualScoresAreUniform) {
  Fixture f;
  f.params.w2.value.setZero();
  const Matrix cands = gaussian(5, 4, f.rng);
  const AttentionResult a = candidate_attention(cands, f.states, 3, f.params);
  for (Eigen::Index t = 0; t < 5; ++t) EXPECT_NEAR(a.weights(t), 0.2, 1e-15);
  EXPECT_TRUE(a.r_e.isApprox(cands.colwise().mean()));
}

TEST(CandidateAttention, LogTwoScoreGivesHalf) {
  Fixture f;
  // Score depends only on the first embedding coordinate.
  f.params.w2.value.setZero();
  f.params.w2.value(0, 0) = 1.0;
  Matrix cands = Matrix::Zero(3, 4);
  cands(0, 0) = std::log(2.0);
  const AttentionResult a = candidate_attention(cands, f.states, 0, f.params);
  EXPECT_NEAR(a.weights(0), 0.5, 1e-15);
  EXPECT_NEAR(a.weights(1), 0.25, 1e-15);
  EXPECT_NEAR(a.weights(2), 0.25, 1e-15);
}

TEST(CandidateAttention, MatchesOracleAndStaysInHull) {
  Fixture f;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index k = 1 + trial % 6;
    const Matrix cands = gaussian(k, 4, f.rng) * 2.0;
    const std::size_t s = static_cast<std::size_t>(trial % 7);
    RowVector scores(k);
    for (Eigen::Index t = 0; t < k; ++t) {
      RowVector in(4 + f.context(s).size());
      in << cands.row(t), f.context(s);
      scores(t) = dot(f.params.w2.value.row(0), in) + f.params.b2.value(0, 0);
    }
    const RowVector want = testing::softmax(scores);
    const AttentionResult a = candidate_attention(cands, f.states, s, f.params);
    EXPECT_LT((a.weights - want).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(a.weights.sum(), 1.0, 1e-12);
    EXPECT_GE(a.weights.minCoeff(), 0.0);
    for (Eigen::Index c = 0; c < 4; ++c) {
      EXPECT_LE(a.r_e(c), cands.col(c).maxCoeff() + 1e-12);
      EXPECT_GE(a.r_e(c), cands.col(c).minCoeff() - 1e-12);
    }
  }
}

TEST(CandidateAttention, EmptyCandidatesRejected) {
  Fixture f;
  EXPECT_THROW(candidate_attention(Matrix(0, 4), f.states, 0, f.params), std::invalid_argument);
}

TEST(Aggregate, ClosedGateReturnsRv) {
  Fixture f;
  const RowVector r_e = gaussian(1, 4, f.rng), r_v = gaussian(1, 4, f.rng),
                  mask = gaussian(1, 4, f.rng);
  const AggregateResult a = aggregate(r_e, 0.7, 0, r_v, mask, f.params);
  EXPECT_EQ(a.r_l, r_v);
}

TEST(Aggregate, HalfGateAveragesCandidateAndMask) {
  Fixture f;
  f.params.w3.value.setZero();
  f.params.b3.value.setZero();
  const RowVector r_e = RowVector::Constant(4, 2.0), mask = RowVector::Zero(4),
                  r_v = RowVector::Constant(4, 1.0);
  const AggregateResult a = aggregate(r_e, 0.5, 1, r_v, mask, f.params);
  EXPECT_DOUBLE_EQ(a.g_mask, 0.5);
  EXPECT_TRUE(a.r_add.isApprox(RowVector::Constant(4, 1.0)));
  EXPECT_TRUE(a.r_l.isApprox(RowVector::Constant(4, 1.5)));
}

TEST(Aggregate, MatchesScalarOracle) {
  Fixture f;
  const RowVector r_e = gaussian(1, 4, f.rng), r_v = gaussian(1, 4, f.rng),
                  mask = gaussian(1, 4, f.rng);
  RowVector in(8);
  in << r_e, mask;
  const double g = logistic(dot(f.params.w3.value.row(0), in) + f.params.b3.value(0, 0));
  const double g_v = 0.37;
  const AggregateResult a = aggregate(r_e, g_v, 1, r_v, mask, f.params);
  EXPECT_NEAR(a.g_mask, g, 1e-12);
  const RowVector r_add = g * r_e + (1 - g) * mask;
  EXPECT_LT((a.r_add - r_add).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.r_l - (g_v * r_add + r_v)).cwiseAbs().maxCoeff(), 1e-12);
}

DetectionResult detection_at(std::size_t s, int p, std::size_t k) {
  DetectionResult d;
  d.position = s;
  d.gate_mask = p;
  d.k = k;
  for (std::size_t t = 0; t < k; ++t) {
    d.candidate_set.candidates.push_back({"c" + std::to_string(t), 1.0 / (t + 2.0)});
  }
  d.candidate_set.position = s;
  return d;
}

TEST(RefineSequence, OnlyDetectedRowChanges) {
  Fixture f;
  const Matrix x_l = gaussian(7, 4, f.rng);
  const Matrix cands = gaussian(3, 4, f.rng);
  const RowVector mask = RowVector::Zero(4);
  for (std::size_t s = 0; s < 7; ++s) {
    const RefinementResult r =
        refine_sequence(x_l, detection_at(s, 1, 3), f.states, cands, mask, f.params);
    ASSERT_EQ(r.z_l.rows(), 7);
    for (Eigen::Index i = 0; i < 7; ++i) {
      if (i == static_cast<Eigen::Index>(s)) {
        EXPECT_NE(RowVector(r.z_l.row(i)), RowVector(x_l.row(i)));
      } else {
        EXPECT_EQ(RowVector(r.z_l.row(i)), RowVector(x_l.row(i)));
      }
    }
    ASSERT_EQ(r.traces.size(), 1u);
    const auto& tr = r.traces[0];
    EXPECT_EQ(tr.position, s);
    EXPECT_EQ(tr.candidates.size(), 3u);
    EXPECT_EQ(tr.r_l, RowVector(r.z_l.row(static_cast<Eigen::Index>(s))));
    // Composition agrees with the individual stages.
    const GateResult g = gate_filter(f.states, s, x_l.row(static_cast<Eigen::Index>(s)), 1,
                                     f.params);
    const AttentionResult a = candidate_attention(cands, f.states, s, f.params);
    const AggregateResult agg = aggregate(a.r_e, g.g_v, 1, g.r_v, mask, f.params);
    EXPECT_LT((agg.r_l - tr.r_l).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RefineSequence, ClosedGateLeavesSequenceUntouched) {
  Fixture f;
  const Matrix x_l = gaussian(7, 4, f.rng);
  const RefinementResult r = refine_sequence(x_l, detection_at(2, 0, 3), f.states,
                                             gaussian(3, 4, f.rng), RowVector::Zero(4), f.params);
  EXPECT_EQ(r.z_l, x_l);
}

TEST(RefineSequence, ZeroInputsStayFinite) {
  Fixture f;
  f.states.h_l.setZero();
  f.states.h_v.setZero();
  f.states.h_a.setZero();
  f.states.h_va.setZero();
  const RefinementResult r = refine_sequence(Matrix::Zero(7, 4), detection_at(6, 1, 2),
                                             f.states, Matrix::Zero(2, 4), RowVector::Zero(4),
                                             f.params);
  EXPECT_TRUE(r.z_l.allFinite());
  EXPECT_EQ(r.traces[0].attention_weights, (RowVector(2) << 0.5, 0.5).finished());
}

TEST(RefineSequence, NoAttentionUsesMaskEmbedding) {
  Fixture f;
  const Matrix x_l = gaussian(7, 4, f.rng);
  const RowVector mask = gaussian(1, 4, f.rng);
  Ablations ab;
  ab.no_attention = true;
  const RefinementResult r = refine_sequence(x_l, detection_at(1, 1, 3), f.states,
                                             gaussian(3, 4, f.rng), mask, f.params, ab);
  const auto& tr = r.traces[0];
  EXPECT_EQ(tr.attention_weights.size(), 0);
  EXPECT_FALSE(tr.g_mask.has_value());
  EXPECT_EQ(tr.r_add, mask);
  EXPECT_LT((tr.r_l - (tr.g_v * mask + tr.r_v)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RefineSequence, NoPositionRefinesEveryRow) {
  Fixture f;
  const Matrix x_l = gaussian(7, 4, f.rng);
  const RowVector mask = gaussian(1, 4, f.rng);
  Ablations ab;
  ab.no_position = true;
  const RefinementResult r =
      refine_sequence(x_l, DetectionResult{}, f.states, Matrix(0, 4), mask, f.params, ab);
  ASSERT_EQ(r.traces.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    const auto& tr = r.traces[i];
    const RowVector x = x_l.row(static_cast<Eigen::Index>(i));
    EXPECT_LT((tr.r_l - (tr.g_v * mask + (1 - tr.g_v) * x)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RefineSequence, PositionOutsideSentenceThrows) {
  Fixture f;
  EXPECT_THROW(refine_sequence(Matrix::Zero(7, 4), detection_at(7, 1, 2), f.states,
                               Matrix::Zero(2, 4), RowVector::Zero(4), f.params),
               std::out_of_range);
}

}  // namespace
}  // namespace swrm
