// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fssam/cli.hpp"
#include "fssam/config.hpp"
#include "fssam/datagen.hpp"
#include "fssam/error.hpp"
#include "fssam/fssf.hpp"
#include "fssam/imr.hpp"
#include "fssam/pipeline.hpp"
#include "fssam/ppg.hpp"
#include "fssam/scma.hpp"
#include "support/golden_cases.hpp"
#include "support/random_inputs.hpp"

namespace fssam {
namespace {

namespace fs = std::filesystem;
using testing::random_binary_mask;
using testing::random_features;
using testing::random_soft_mask;

// Collects failed sub-checks; a criterion passes when none failed.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ |= !ok;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  bool ok() const { return !failed_; }
  std::string summary() const {
    std::string s = std::to_string(checks_) + " checks";
    if (!notes_.empty()) s += "; " + notes_;
    for (const auto& f : failures_) s += "\n      failed: " + f;
    return s;
  }

 private:
  std::size_t checks_ = 0;
  bool failed_ = false;
  std::vector<std::string> failures_;
  std::string notes_;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// Distractor-heavy benchmark shared by the ablation and score-statistics criteria.
SynthSpec benchmark_spec() {
  SynthSpec s;
  s.height = 32;
  s.width = 32;
  s.channels = 16;
  s.episodes = 200;
  s.shots = 1;
  s.noise_sigma = 0.1;
  s.distractors = 2;
  s.distractor_affinity = 0.3;
  s.intra_class_gap = 1.0;
  s.feature_scale = 2.0;
  s.seed = 2024;
  return s;
}

PipelineConfig benchmark_config() {
  PipelineConfig c;
  c.memory_gain = 0.3;
  c.threshold = 0.3;
  return c;
}

const std::vector<Episode>& benchmark_episodes() {
  static const std::vector<Episode> episodes = generate(benchmark_spec()).plain_episodes();
  return episodes;
}

// ---------------------------------------------------------------------------

void criterion_golden(Checker& c) {
  for (const auto& g : testing::golden_checks()) {
    c.expect(g.passes(), g.name + ": got " + fmt("%.12g", g.actual) + ", oracle " +
                             fmt("%.12g", g.expected));
  }

  SynthSpec s = benchmark_spec();
  s.episodes = 100;
  const SyntheticSet set = generate(s);
  c.expect(set.stats.min_distractor_cosine >= 0.8,
           "distractor pixel cosine " + fmt("%.4f", set.stats.min_distractor_cosine));
  c.note("min distractor cosine " + fmt("%.4f", set.stats.min_distractor_cosine));

  // Calibration should switch distractor pixels from FG to BG. The fixture is
  // the first 5 benchmark episodes; at this affinity the distractors only
  // partly match the target class. On 16x16 crops the direction reverses, see
  // README.
  SynthSpec fixture_spec = benchmark_spec();
  fixture_spec.episodes = 5;
  const SyntheticSet fixture = generate(fixture_spec);
  PipelineConfig cfg = benchmark_config();
  const auto proj = make_pipeline_projections(fixture_spec.channels, cfg);
  std::size_t fg_plain = 0, fg_calibrated = 0;
  for (const auto& se : fixture.episodes) {
    for (bool calibrated : {false, true}) {
      cfg.use_scma_calibration = calibrated;
      const SoftMask pred = run_episode(se.episode, cfg, proj).prediction;
      std::size_t n = 0;
      for (std::size_t p = 0; p < pred.pixels(); ++p) {
        n += pred[p] == 1.0f && se.query_distractors[p] == 1.0f;
      }
      (calibrated ? fg_calibrated : fg_plain) += n;
    }
  }
  c.expect(fg_calibrated < fg_plain, "distractor pixels predicted FG: plain " +
                                         std::to_string(fg_plain) + ", calibrated " +
                                         std::to_string(fg_calibrated));
  c.note("distractor FG pixels " + std::to_string(fg_plain) + " -> " +
         std::to_string(fg_calibrated));
}

// Query equals support; FG pixels share one vector, BG pixels an orthogonal one.
Episode identity_episode(Rng& rng, int h, int w, int ch) {
  std::vector<double> u(static_cast<std::size_t>(ch)), v(u.size());
  for (double& x : u) x = rng.gaussian();
  for (double& x : v) x = rng.gaussian();
  double uu = 0, uv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += u[i] * u[i];
    uv += u[i] * v[i];
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= uv / uu * u[i];
  const SoftMask mask = random_binary_mask(rng, h, w);
  std::vector<float> data(mask.pixels() * u.size());
  for (std::size_t p = 0; p < mask.pixels(); ++p) {
    const auto& src = mask[p] == 1.0f ? u : v;
    for (std::size_t i = 0; i < u.size(); ++i) data[p * u.size() + i] = static_cast<float>(src[i]);
  }
  Episode ep;
  ep.query = FeatureMap(h, w, ch, std::move(data));
  ep.query_mask = mask;
  ep.supports.push_back({ep.query, mask});
  return ep;
}

void criterion_ppg(Checker& c) {
  Rng rng(derive_seed(2, 0));
  for (int t = 0; t < 1000; ++t) {
    const int h = rng.uniform_int(1, 16), w = rng.uniform_int(2, 16), ch = rng.uniform_int(1, 8);
    const FeatureMap q = random_features(rng, h, w, ch);
    const FeatureMap s = random_features(rng, h, w, ch);
    const PriorDetail d = make_priors(q, s, random_binary_mask(rng, h, w));
    bool in_range = true, disc_inside = true;
    for (std::size_t p = 0; p < q.pixels(); ++p) {
      for (const SoftMask* m : {&d.priors.fg, &d.priors.bg, &d.priors.disc}) {
        in_range &= (*m)[p] >= 0.0f && (*m)[p] <= 1.0f;
      }
      if (d.priors.disc[p] > 0.0f) {
        disc_inside &= d.fg_normalized.values[p] > d.bg_normalized.values[p];
        disc_inside &= d.priors.fg[p] > d.priors.bg[p];
      }
    }
    c.expect(in_range, "priors in [0,1], input " + std::to_string(t));
    c.expect(disc_inside, "disc support inside fg > bg, input " + std::to_string(t));

    const Episode id = identity_episode(rng, h, w, std::max(ch, 2));
    const PriorSet ip = make_priors(id.query, id.supports[0].features, id.supports[0].mask).priors;
    c.expect(ip.fg == id.query_mask && ip.disc == id.query_mask,
             "identity episode prior equals mask, input " + std::to_string(t));
  }
}

void criterion_imr(Checker& c) {
  Rng rng(derive_seed(3, 0));
  for (int t = 0; t < 1000; ++t) {
    const int h = rng.uniform_int(1, 12), w = rng.uniform_int(2, 12), ch = rng.uniform_int(1, 8);
    const int k = std::vector<int>{1, 2, 5}[static_cast<std::size_t>(t % 3)];
    const double gain = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
    const FeatureMap q = random_features(rng, h, w, ch);
    const SoftMask fg_prior = random_soft_mask(rng, h, w);
    const SoftMask disc_prior = random_soft_mask(rng, h, w);
    const Memory fg = encode_memory(q, fg_prior, gain);
    const Memory disc = encode_memory(q, disc_prior, gain);
    std::vector<Memory> supports;
    for (int s = 0; s < k; ++s) {
      supports.push_back(encode_memory(random_features(rng, h, w, ch), random_binary_mask(rng, h, w), gain));
    }

    const RefinementResult none = refine(disc, disc_prior, fg, supports, 0);
    c.expect(none.disc_prior == disc_prior && none.disc_memory == disc, "n = 0 is the identity");

    const RefinementResult r = refine(disc, disc_prior, fg, supports, 4);
    c.expect(r.trace.cosine_passes == similarity_op_count(4, k) && r.trace.cosine_passes == 4u * (k + 1),
             "cosine passes for n = 4");
    const SoftMask* previous = &disc_prior;
    for (std::size_t n = 0; n < r.trace.steps.size(); ++n) {
      const RefinementStep& step = r.trace.steps[n];
      bool suppress_ok = true, bounded = true, monotone = true;
      for (std::size_t p = 0; p < disc_prior.pixels(); ++p) {
        if (!step.degenerate) suppress_ok &= step.fusion_weight[p] <= step.query_affinity[p];
        const float lo = std::min(disc_prior[p], fg_prior[p]);
        const float hi = std::max(disc_prior[p], fg_prior[p]);
        bounded &= step.prior[p] >= lo && step.prior[p] <= hi;
        if (fg_prior[p] >= disc_prior[p]) monotone &= step.prior[p] >= (*previous)[p];
      }
      const std::string at = "input " + std::to_string(t) + " step " + std::to_string(n + 1);
      c.expect(suppress_ok, "suppression never increases A_QQ, " + at);
      c.expect(bounded, "prior within [min, max] of (disc, fg), " + at);
      c.expect(monotone, "prior non-decreasing where fg >= disc, " + at);
      previous = &step.prior;
    }
  }

  Rng small(derive_seed(3, 1));
  for (int k : {1, 2, 5}) {
    const FeatureMap q = random_features(small, 4, 4, 3);
    const Memory fg = encode_memory(q, random_soft_mask(small, 4, 4));
    const SoftMask dp = random_soft_mask(small, 4, 4);
    const Memory disc = encode_memory(q, dp);
    std::vector<Memory> supports;
    for (int s = 0; s < k; ++s) {
      supports.push_back(encode_memory(random_features(small, 4, 4, 3), random_binary_mask(small, 4, 4)));
    }
    for (int n = 0; n <= 4; ++n) {
      const auto passes = refine(disc, dp, fg, supports, n).trace.cosine_passes;
      c.expect(passes == static_cast<std::size_t>(n * (k + 1)),
               "counter n=" + std::to_string(n) + " k=" + std::to_string(k) + " gave " +
                   std::to_string(passes));
    }
  }
}

void criterion_scma(Checker& c) {
  Rng rng(derive_seed(4, 0));
  for (int t = 0; t < 500; ++t) {
    const int h = rng.uniform_int(1, 8), w = rng.uniform_int(2, 8), ch = rng.uniform_int(1, 8);
    const int width = rng.uniform() < 0.5 ? ch : rng.uniform_int(1, 8);
    const int k = std::vector<int>{1, 2, 5}[static_cast<std::size_t>(t % 3)];
    const FeatureMap q = random_features(rng, h, w, ch);
    const Memory disc = encode_memory(random_features(rng, h, w, ch), random_soft_mask(rng, h, w));
    std::vector<Memory> supports;
    for (int s = 0; s < k; ++s) {
      supports.push_back(encode_memory(random_features(rng, h, w, ch), random_binary_mask(rng, h, w)));
    }
    const ProjectionSet proj = make_projections(ch, width, static_cast<std::uint64_t>(t));
    AttentionStackConfig cfg;
    cfg.norm_axis = t % 2 == 0 ? NormAxis::PerRow : NormAxis::Global;
    cfg.keep_scores = true;
    const std::string at = "input " + std::to_string(t);

    const AttentionOutput cal = calibrated_cross_attention(q, disc, supports, proj, cfg);
    bool bias_ok = cal.diagnostics.max_bias <= 0.0;
    const auto& pre = cal.diagnostics.pre_scores->data();
    const auto& post = cal.diagnostics.post_scores->data();
    for (std::size_t i = 0; i < pre.size(); ++i) bias_ok &= post[i] <= pre[i];
    c.expect(bias_ok, "calibration bias <= 0, " + at);
    c.expect(cal.diagnostics.max_row_sum_error <= 1e-6, "softmax rows sum to 1, " + at);
    c.expect(cal.diagnostics.support_cosine_passes == static_cast<std::size_t>(k),
             "extra similarity counter = k, " + at);

    cfg.keep_scores = false;
    const AttentionOutput plain = memory_cross_attention(q, disc, proj, cfg);
    AttentionStackConfig zero_alpha = cfg;
    zero_alpha.alpha = 0.0;
    c.expect(calibrated_cross_attention(q, disc, supports, proj, zero_alpha).features == plain.features,
             "alpha = 0 bit-equals plain attention, " + at);
    AttentionStackConfig ones = cfg;
    ones.support_similarity_override = std::vector<double>(q.pixels(), 1.0);
    c.expect(calibrated_cross_attention(q, disc, supports, proj, ones).features == plain.features,
             "A_SQ = 1 bit-equals uncalibrated, " + at);

    ProjectionSet zeroed = proj;
    zeroed.output = Matrix(proj.output.rows(), proj.output.cols(), 0.0);
    c.expect(calibrated_cross_attention(q, disc, supports, zeroed, cfg).features == q,
             "zero output projection returns the input, " + at);

    if (t % 10 == 0) {
      AttentionStackConfig stack_cfg = cfg;
      stack_cfg.layers = 3;
      stack_cfg.width = width;
      const auto stack = make_projection_stack(ch, width, 3, static_cast<std::uint64_t>(t));
      const StackOutput out = attention_stack(q, disc, supports, stack, stack_cfg, true);
      bool per_layer = out.layers.size() == 3;
      for (const auto& l : out.layers) per_layer &= l.support_cosine_passes == static_cast<std::size_t>(k);
      c.expect(per_layer && out.support_cosine_passes == extra_similarity_count(k, 3),
               "per-layer counter in a 3-layer stack, " + at);
    }
  }
}

void criterion_kshot(Checker& c) {
  SynthSpec s = benchmark_spec();
  s.height = 16;
  s.width = 16;
  s.episodes = 100;
  const auto episodes = generate(s).plain_episodes();
  const PipelineConfig cfg = benchmark_config();
  const auto proj = make_pipeline_projections(s.channels, cfg);
  for (const Episode& ep : episodes) {
    const EpisodeOutput one = run_episode(ep, cfg, proj);
    for (int k : {2, 5}) {
      Episode copies = ep;
      copies.supports.assign(static_cast<std::size_t>(k), ep.supports[0]);
      const EpisodeOutput many = run_episode(copies, cfg, proj);
      c.expect(many.prediction == one.prediction && many.diagnostics.score == one.diagnostics.score,
               "episode " + std::to_string(ep.id) + " k=" + std::to_string(k));
    }
  }
}

void criterion_identity(Checker& c) {
  SynthSpec s;
  s.height = 32;
  s.width = 32;
  s.channels = 16;
  s.episodes = 100;
  s.noise_sigma = 0.0;
  s.orthogonal_classes = true;
  s.seed = 6;
  const auto episodes = generate(s).plain_episodes();
  PipelineConfig cfg;
  cfg.head = PredictionHead::Prior;
  const MetricsReport m = evaluate(episodes, cfg, make_pipeline_projections(16, cfg));
  c.expect(m.miou == 1.0, "mIoU = " + fmt("%.17g", m.miou));
  c.note("mIoU " + fmt("%.6f", m.miou) + ", FB-IoU " + fmt("%.6f", m.fb_iou));
}

// Measured margins on the seeded benchmark, rounded down and frozen as
// regression floors: +0.0206, +0.1686, +0.1650, +0.0170, +0.1856.
constexpr double kMinImrGain = 0.015;
constexpr double kMinScmaGain = 0.15;
constexpr double kMinFullOverImr = 0.15;
constexpr double kMinFullOverScma = 0.015;
constexpr double kMinFullOverPpg = 0.15;

void criterion_ablation(Checker& c) {
  const auto& episodes = benchmark_episodes();
  const PipelineConfig cfg = benchmark_config();
  const AblationReport r = ablation_suite(episodes, cfg, make_pipeline_projections(16, cfg));
  const double ppg = r.entries[0].report.miou;
  const double imr = r.entries[1].report.miou;
  const double scma = r.entries[2].report.miou;
  const double full = r.entries[3].report.miou;
  c.expect(imr - ppg >= kMinImrGain, "PPG <= PPG+IMR");
  c.expect(scma - ppg >= kMinScmaGain, "PPG <= PPG+SCMA");
  c.expect(full - imr >= kMinFullOverImr, "full >= PPG+IMR");
  c.expect(full - scma >= kMinFullOverScma, "full >= PPG+SCMA");
  c.expect(full - ppg >= 0.02, "full - PPG >= 0.02");
  c.expect(full - ppg >= kMinFullOverPpg, "full - PPG above frozen floor");
  c.note("mIoU PPG " + fmt("%.4f", ppg) + ", +IMR " + fmt("%.4f", imr) + ", +SCMA " +
         fmt("%.4f", scma) + ", full " + fmt("%.4f", full));
}

void criterion_stats(Checker& c) {
  const auto& episodes = benchmark_episodes();
  const PipelineConfig cfg = benchmark_config();
  const auto stats = calibration_stats(episodes, cfg, make_pipeline_projections(16, cfg));
  c.expect(stats.size() == static_cast<std::size_t>(cfg.attention_layers), "one entry per layer");
  for (const auto& s : stats) {
    c.expect(s.pairs > 0 && s.mean_post < s.mean_pre,
             "layer " + std::to_string(s.layer + 1) + ": pre " + fmt("%.4f", s.mean_pre) +
                 ", post " + fmt("%.4f", s.mean_post));
    c.note("L" + std::to_string(s.layer + 1) + " " + fmt("%.1f%%", s.reduction_percent()));
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void criterion_determinism(Checker& c) {
  const fs::path root = fs::temp_directory_path() / "fssam_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  SynthSpec s = benchmark_spec();
  s.episodes = 40;
  write_text_file(root / "spec.json", to_json(s).dump(2));
  write_text_file(root / "config.json", to_json(benchmark_config()).dump(2));

  auto cli = [&](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    c.expect(code == 0, args[0] + " exited " + std::to_string(code) + ": " + err.str());
  };
  cli({"gen", "--spec", (root / "spec.json").string(), "--out", (root / "a").string()});
  cli({"gen", "--spec", (root / "spec.json").string(), "--out", (root / "b").string()});
  c.expect(slurp(root / "a" / "manifest.json") == slurp(root / "b" / "manifest.json") &&
               slurp(root / "a" / "ep00007" / "query.fssf") ==
                   slurp(root / "b" / "ep00007" / "query.fssf"),
           "generated sets identical");

  const std::vector<std::pair<std::string, std::string>> runs{
      {"a", "1"}, {"b", "1"}, {"a", "4"}, {"b", "0"}};
  std::vector<std::string> reports;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path out = root / ("report" + std::to_string(i) + ".json");
    cli({"eval", "--episodes", (root / runs[i].first).string(), "--config",
         (root / "config.json").string(), "--threads", runs[i].second, "--out", out.string()});
    reports.push_back(slurp(out));
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    c.expect(!reports[i].empty() && reports[i] == reports[0],
             "report " + std::to_string(i) + " (threads " + runs[i].second + ") differs");
  }
  c.note(std::to_string(reports.size()) + " reports of " + std::to_string(reports[0].size()) +
         " bytes");
  fs::remove_all(root);
}

ErrorCode decode_code(const std::vector<std::uint8_t>& bytes) {
  try {
    fssf::decode(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;  // decode succeeded; never an expected code here
}

void criterion_io(Checker& c) {
  const fs::path root = fs::temp_directory_path() / "fssam_acceptance_io";
  fs::remove_all(root);
  fs::create_directories(root);
  Rng rng(derive_seed(10, 0));
  for (int t = 0; t < 100; ++t) {
    const int h = rng.uniform_int(1, 20), w = rng.uniform_int(1, 20), ch = rng.uniform_int(1, 12);
    const fs::path path = root / ("t" + std::to_string(t) + ".fssf");
    if (t % 2 == 0) {
      const FeatureMap f = random_features(rng, h, w, ch, 100.0);
      fssf::write_file(path, f);
      const FeatureMap back = fssf::read_features(path);
      c.expect(back.shape() == f.shape() && back.channels() == f.channels() &&
                   std::memcmp(back.data().data(), f.data().data(), f.data().size_bytes()) == 0,
               "feature round trip " + std::to_string(t));
    } else {
      const SoftMask m = random_soft_mask(rng, h, w);
      fssf::write_file(path, m);
      const SoftMask back = fssf::read_mask(path);
      c.expect(back.shape() == m.shape() &&
                   std::memcmp(back.data().data(), m.data().data(), m.data().size_bytes()) == 0,
               "mask round trip " + std::to_string(t));
    }
  }

  const auto good = fssf::encode(FeatureMap(2, 2, 2, {1, 2, 3, 4, 5, 6, 7, 8}));
  auto expect_code = [&](std::vector<std::uint8_t> bytes, ErrorCode code, const char* what) {
    c.expect(decode_code(bytes) == code, std::string(what) + " -> " + std::string(to_string(code)));
  };
  auto bad = good;
  std::memcpy(bad.data(), "XXXX", 4);
  expect_code(bad, ErrorCode::BadMagic, "magic XXXX");
  bad = good;
  bad[4] = 2;
  expect_code(bad, ErrorCode::UnsupportedVersion, "version 2");
  bad = good;
  bad[6] = 5;
  expect_code(bad, ErrorCode::UnsupportedKind, "kind 5");
  expect_code({good.begin(), good.end() - 3}, ErrorCode::TruncatedPayload, "short payload");
  expect_code({good.begin(), good.begin() + 7}, ErrorCode::TruncatedPayload, "short header");
  bad = good;
  bad.insert(bad.end(), {0, 0, 0, 0});
  expect_code(bad, ErrorCode::TrailingData, "extra bytes");
  auto mask = fssf::encode(SoftMask(1, 2, {0.0f, 1.0f}));
  const float over = 1.5f;
  std::memcpy(mask.data() + fssf::kHeaderSize + 4, &over, 4);
  expect_code(mask, ErrorCode::MaskRangeViolation, "mask value 1.5");
  bad = good;
  const float inf = INFINITY;
  std::memcpy(bad.data() + fssf::kHeaderSize, &inf, 4);
  expect_code(bad, ErrorCode::NonFinite, "infinite feature");
  try {
    fssf::read_file(root / "absent.fssf");
    c.expect(false, "missing file");
  } catch (const Error& e) {
    c.expect(e.code() == ErrorCode::Io, "missing file -> Io");
  }
  fs::remove_all(root);
}

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<void(Checker&)> run;
};

}  // namespace
}  // namespace fssam

int main() {
  using namespace fssam;
  const std::vector<Criterion> criteria{
      {1, "formula golden tests", 5, criterion_golden},
      {2, "PPG invariants on 1000 random inputs", 30, criterion_ppg},
      {3, "IMR invariants on 1000 random inputs", 60, criterion_imr},
      {4, "SCMA invariants on 500 random inputs", 60, criterion_scma},
      {5, "k-shot collapse for k in {2, 5}", 30, criterion_kshot},
      {6, "identity benchmark mIoU = 1", 30, criterion_identity},
      {7, "directional ablation ordering", 300, criterion_ablation},
      {8, "calibration lowers FG-to-BG scores per layer", 120, criterion_stats},
      {9, "byte-identical eval reports", 120, criterion_determinism},
      {10, "FSSF round trip and error taxonomy", 10, criterion_io},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    Checker checker;
    const auto start = std::chrono::steady_clock::now();
    std::string crash;
    try {
      cr.run(checker);
    } catch (const std::exception& e) {
      crash = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < cr.budget_seconds;
    const bool pass = crash.empty() && checker.ok() && in_budget;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %d: %s [%.1fs / %.0fs budget] (%s)\n", pass ? "PASS" : "FAIL", cr.id,
                cr.title, secs, cr.budget_seconds, checker.summary().c_str());
    if (!crash.empty()) std::printf("      exception: %s\n", crash.c_str());
    if (!in_budget) std::printf("      over the runtime budget\n");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
