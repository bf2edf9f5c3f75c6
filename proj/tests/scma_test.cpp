#include <gtest/gtest.h>

#include <cmath>

#include "fssam/error.hpp"
#include "fssam/ppg.hpp"
#include "fssam/scma.hpp"
#include "support/random_inputs.hpp"

namespace fssam {
namespace {

struct Inputs {
  FeatureMap query;
  Memory disc;
  std::vector<Memory> supports;
};

Inputs random_inputs(Rng& rng, int h, int w, int c, int shots) {
  Inputs in;
  in.query = testing::random_features(rng, h, w, c);
  in.disc = encode_memory(testing::random_features(rng, h, w, c), testing::random_soft_mask(rng, h, w));
  for (int s = 0; s < shots; ++s) {
    in.supports.push_back(encode_memory(testing::random_features(rng, h, w, c),
                                        testing::random_binary_mask(rng, h, w)));
  }
  return in;
}

TEST(CalibrationBias, WorkedExample) {
  const auto b = calibration_bias(std::vector<double>{1.0, 0.2}, std::vector<double>{1.0, 0.1}, 10);
  EXPECT_EQ(b[0], 0.0);
  EXPECT_NEAR(b[1], -7.0, 1e-12);
}

TEST(CalibrationBias, FullSupportSimilarityGivesNoBias) {
  const auto b = calibration_bias(std::vector<double>{0.0, 0.3, 1.0}, std::vector<double>(3, 1.0), 10);
  for (double v : b) EXPECT_EQ(v, 0.0);
}

TEST(Projections, IdentityWhenWidthMatches) {
  const ProjectionSet p = make_projections(4, 4, 99);
  EXPECT_EQ(p.query, Matrix::identity(4));
  EXPECT_EQ(p.output, Matrix::identity(4));
}

TEST(Projections, SeededAndOrthonormal) {
  const ProjectionSet a = make_projections(6, 3, 5);
  const ProjectionSet b = make_projections(6, 3, 5);
  const ProjectionSet c = make_projections(6, 3, 6);
  EXPECT_EQ(a.key, b.key);
  EXPECT_NE(a.key, c.key);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double dot = 0;
      for (std::size_t r = 0; r < 6; ++r) dot += a.key(r, i) * a.key(r, j);
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-12);
    }
  }
  EXPECT_THROW(make_projections(0, 3, 1), Error);
}

TEST(CrossAttention, BiasNonPositiveAndRowsSumToOne) {
  Rng rng(10);
  AttentionStackConfig cfg;
  const ProjectionSet proj = make_projections(4, 4, 0);
  for (int t = 0; t < 30; ++t) {
    const Inputs in = random_inputs(rng, 3, 4, 4, rng.uniform_int(1, 3));
    const auto out = calibrated_cross_attention(in.query, in.disc, in.supports, proj, cfg);
    EXPECT_LE(out.diagnostics.max_bias, 0.0);
    EXPECT_LE(out.diagnostics.max_row_sum_error, 1e-6);
    EXPECT_TRUE(out.diagnostics.calibrated);
  }
}

TEST(CrossAttention, ZeroAlphaMatchesPlainAttention) {
  Rng rng(11);
  AttentionStackConfig cfg;
  cfg.alpha = 0.0;
  const ProjectionSet proj = make_projections(5, 3, 7);
  const Inputs in = random_inputs(rng, 4, 4, 5, 2);
  const auto a = calibrated_cross_attention(in.query, in.disc, in.supports, proj, cfg);
  const auto b = memory_cross_attention(in.query, in.disc, proj, cfg);
  EXPECT_EQ(a.features, b.features);
}

TEST(CrossAttention, SupportSimilarityOfOneMatchesPlainAttention) {
  Rng rng(12);
  AttentionStackConfig cfg;
  cfg.support_similarity_override = std::vector<double>(16, 1.0);
  const ProjectionSet proj = make_projections(3, 3, 0);
  const Inputs in = random_inputs(rng, 4, 4, 3, 1);
  const auto a = calibrated_cross_attention(in.query, in.disc, in.supports, proj, cfg);
  const auto b = memory_cross_attention(in.query, in.disc, proj, cfg);
  EXPECT_EQ(a.features, b.features);
}

TEST(CrossAttention, OverrideLengthIsChecked) {
  Rng rng(12);
  AttentionStackConfig cfg;
  cfg.support_similarity_override = std::vector<double>(3, 1.0);
  const Inputs in = random_inputs(rng, 2, 2, 3, 1);
  EXPECT_THROW(calibrated_cross_attention(in.query, in.disc, in.supports,
                                          make_projections(3, 3, 0), cfg),
               Error);
}

TEST(CrossAttention, ZeroOutputProjectionReturnsInput) {
  Rng rng(13);
  ProjectionSet proj = make_projections(4, 2, 3);
  proj.output = Matrix(2, 4, 0.0);
  const Inputs in = random_inputs(rng, 3, 3, 4, 1);
  const auto out = calibrated_cross_attention(in.query, in.disc, in.supports, proj, {});
  EXPECT_EQ(out.features, in.query);
}

TEST(CrossAttention, MissingSupportThrows) {
  Rng rng(14);
  const Inputs in = random_inputs(rng, 2, 2, 2, 1);
  try {
    calibrated_cross_attention(in.query, in.disc, {}, make_projections(2, 2, 0), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingSupport);
  }
}

TEST(CrossAttention, KeptScoresAreConsistent) {
  Rng rng(15);
  AttentionStackConfig cfg;
  cfg.keep_scores = true;
  const Inputs in = random_inputs(rng, 3, 3, 3, 1);
  const auto out =
      calibrated_cross_attention(in.query, in.disc, in.supports, make_projections(3, 3, 0), cfg);
  const auto& d = out.diagnostics;
  ASSERT_TRUE(d.pre_scores && d.post_scores && d.attention);
  for (std::size_t i = 0; i < d.pre_scores->data().size(); ++i) {
    EXPECT_LE(d.post_scores->data()[i], d.pre_scores->data()[i]);
  }
  const Matrix sm = row_softmax(*d.post_scores);
  for (std::size_t i = 0; i < sm.data().size(); ++i) {
    EXPECT_NEAR(sm.data()[i], d.attention->data()[i], 1e-12);
  }
}

TEST(CrossAttention, GlobalAxisAlsoBiasesDownward) {
  Rng rng(16);
  AttentionStackConfig cfg;
  cfg.norm_axis = NormAxis::Global;
  const Inputs in = random_inputs(rng, 3, 4, 3, 2);
  const auto out =
      calibrated_cross_attention(in.query, in.disc, in.supports, make_projections(3, 3, 0), cfg);
  EXPECT_LE(out.diagnostics.max_bias, 0.0);
  EXPECT_LT(out.diagnostics.min_bias, 0.0);
}

TEST(AttentionStack, CountsSupportPassesPerLayer) {
  Rng rng(17);
  for (int k : {1, 2, 5}) {
    const Inputs in = random_inputs(rng, 2, 3, 3, k);
    AttentionStackConfig cfg;
    cfg.layers = 3;
    const auto stack = make_projection_stack(3, 3, 3, 0);
    const StackOutput out = attention_stack(in.query, in.disc, in.supports, stack, cfg, true);
    ASSERT_EQ(out.layers.size(), 3u);
    EXPECT_EQ(out.support_cosine_passes, extra_similarity_count(k, 3));
    for (const auto& layer : out.layers) EXPECT_EQ(layer.support_cosine_passes, static_cast<std::size_t>(k));
    const StackOutput plain = attention_stack(in.query, in.disc, in.supports, stack, cfg, false);
    EXPECT_EQ(plain.support_cosine_passes, 0u);
  }
  EXPECT_THROW(extra_similarity_count(0), Error);
}

TEST(AttentionStack, LayerCountMustMatchProjections) {
  Rng rng(18);
  const Inputs in = random_inputs(rng, 2, 2, 2, 1);
  AttentionStackConfig cfg;
  cfg.layers = 4;
  EXPECT_THROW(attention_stack(in.query, in.disc, in.supports, make_projection_stack(2, 2, 2, 0),
                               cfg, true),
               Error);
}

}  // namespace
}  // namespace fssam
