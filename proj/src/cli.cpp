#include "fssam/cli.hpp"

#include <filesystem>
#include <optional>

#include "CLI11.hpp"

#include "fssam/config.hpp"
#include "fssam/datagen.hpp"
#include "fssam/episode_store.hpp"
#include "fssam/error.hpp"
#include "fssam/fssf.hpp"
#include "fssam/imr.hpp"
#include "fssam/ppg.hpp"
#include "fssam/report.hpp"

namespace fssam {

namespace fs = std::filesystem;

namespace {

struct GenArgs {
  std::string spec;
  std::string out;
};

struct PairArgs {
  std::string query;
  std::string support;
  std::string mask;
  std::string out;
  int iters = 3;
  double gain = 0.0;
  double epsilon = kDefaultEpsilon;
};

struct RunArgs {
  std::string episodes;
  std::string config;
  std::string out;
  bool no_imr = false;
  bool no_scma = false;
  std::optional<int> iters;
  std::optional<double> alpha;
  std::optional<int> shots;
  std::optional<int> threads;
  std::optional<std::string> head;
};

void add_run_options(CLI::App* cmd, RunArgs& a, bool ablation_flags) {
  cmd->add_option("--episodes", a.episodes, "Episode directory written by `gen`")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--config", a.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "JSON report path");
  if (ablation_flags) {
    cmd->add_flag("--no-imr", a.no_imr, "Disable iterative memory refinement");
    cmd->add_flag("--no-scma", a.no_scma, "Disable support calibration");
  }
  cmd->add_option("--iters", a.iters, "IMR iterations")->check(CLI::NonNegativeNumber);
  cmd->add_option("--alpha", a.alpha, "Calibration strength")->check(CLI::NonNegativeNumber);
  cmd->add_option("--shots", a.shots, "Use only the first k supports")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", a.threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--head", a.head, "Prediction head")->check(CLI::IsMember({"fused", "prior"}));
}

PipelineConfig resolve_config(const RunArgs& a) {
  PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_pipeline_config(a.config);
  if (a.no_imr) cfg.use_imr = false;
  if (a.no_scma) cfg.use_scma_calibration = false;
  if (a.iters) cfg.imr_iterations = *a.iters;
  if (a.alpha) cfg.alpha = *a.alpha;
  if (a.threads) cfg.threads = *a.threads;
  if (a.head) cfg.head = *a.head == "prior" ? PredictionHead::Prior : PredictionHead::Fused;
  cfg.validate();
  return cfg;
}

std::vector<Episode> load_episodes(const RunArgs& a) {
  StoredSet set = read_episode_set(a.episodes);
  if (set.episodes.empty()) throw Error(ErrorCode::EmptyInput, a.episodes + " holds no episodes");
  if (a.shots) return limit_shots(set.episodes, *a.shots);
  return std::move(set.episodes);
}

// The thread count is left out so reports do not depend on it.
nlohmann::ordered_json config_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j = to_json(cfg);
  j.erase("threads");
  return j;
}

void write_report(const std::string& path, const nlohmann::ordered_json& doc, std::ostream& out) {
  if (path.empty()) return;
  write_text_file(path, doc.dump(2) + "\n");
  out << "report written to " << path << "\n";
}

void write_mask_pair(const fs::path& dir, const std::string& stem, const SoftMask& mask) {
  fssf::write_file(dir / (stem + ".fssf"), mask);
  write_pgm(dir / (stem + ".pgm"), mask);
}

int run_gen(const GenArgs& a, std::ostream& out) {
  const SynthSpec spec = load_synth_spec(a.spec);
  const SyntheticSet set = generate(spec);
  write_episode_set(a.out, set, spec);
  out << "wrote " << set.episodes.size() << " episodes to " << a.out << " ("
      << set.stats.distractor_pixels << " distractor pixels";
  if (set.stats.dropped_distractors > 0) {
    out << ", " << set.stats.dropped_distractors << " distractors dropped";
  }
  out << ")\n";
  return 0;
}

int run_prior(const PairArgs& a, std::ostream& out) {
  const FeatureMap query = fssf::read_features(a.query);
  const FeatureMap support = fssf::read_features(a.support);
  const SoftMask mask = fssf::read_mask(a.mask);
  const PriorDetail d = make_priors(query, support, mask, a.epsilon);
  fs::create_directories(a.out);
  write_mask_pair(a.out, "fg", d.priors.fg);
  write_mask_pair(a.out, "bg", d.priors.bg);
  write_mask_pair(a.out, "disc", d.priors.disc);
  out << "priors written to " << a.out;
  if (d.bg_fallback) out << " (support has no background; BG prototype is zero)";
  out << "\n";
  return 0;
}

int run_refine(const PairArgs& a, std::ostream& out) {
  const FeatureMap query = fssf::read_features(a.query);
  const FeatureMap support = fssf::read_features(a.support);
  const SoftMask mask = fssf::read_mask(a.mask);
  const PriorSet priors = make_priors(query, support, mask, a.epsilon).priors;
  const Memory fg = encode_memory(query, priors.fg, a.gain);
  const Memory disc = encode_memory(query, priors.disc, a.gain);
  const std::vector<Memory> supports{encode_memory(support, mask, a.gain)};
  const RefinementResult r = refine(disc, priors.disc, fg, supports, a.iters, a.epsilon);

  fs::create_directories(a.out);
  write_mask_pair(a.out, "prior_iter0", priors.disc);
  for (std::size_t i = 0; i < r.trace.steps.size(); ++i) {
    const auto& step = r.trace.steps[i];
    const std::string n = std::to_string(i + 1);
    write_mask_pair(a.out, "prior_iter" + n, step.prior);
    write_mask_pair(a.out, "weight_iter" + n, step.fusion_weight);
    if (step.degenerate) out << "iteration " << n << ": empty Disc prior, step skipped\n";
  }
  out << r.trace.steps.size() << " iterations, " << r.trace.cosine_passes
      << " cosine passes; snapshots in " << a.out << "\n";
  return 0;
}

int run_eval(const RunArgs& a, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(a);
  const std::vector<Episode> episodes = load_episodes(a);
  const auto projections = make_pipeline_projections(episodes.front().query.channels(), cfg);
  const MetricsReport report = evaluate(episodes, cfg, projections);
  out << format_table(report);
  nlohmann::ordered_json doc;
  doc["config"] = config_json(cfg);
  doc["metrics"] = to_json(report);
  write_report(a.out.empty() ? "report.json" : a.out, doc, out);
  return 0;
}

int run_ablate(const RunArgs& a, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(a);
  const std::vector<Episode> episodes = load_episodes(a);
  const auto projections = make_pipeline_projections(episodes.front().query.channels(), cfg);
  const AblationReport report = ablation_suite(episodes, cfg, projections);
  out << format_table(report);
  nlohmann::ordered_json doc;
  doc["config"] = config_json(cfg);
  doc["variants"] = to_json(report);
  write_report(a.out, doc, out);
  return 0;
}

int run_stats(const RunArgs& a, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(a);
  const std::vector<Episode> episodes = load_episodes(a);
  const auto projections = make_pipeline_projections(episodes.front().query.channels(), cfg);
  const auto stats = calibration_stats(episodes, cfg, projections);
  out << format_table(stats);
  nlohmann::ordered_json doc;
  doc["config"] = config_json(cfg);
  doc["layers"] = to_json(stats);
  write_report(a.out, doc, out);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Few-shot segmentation matching on dense feature maps", "fssam"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic episode set");
  gen_cmd->add_option("--spec", gen.spec, "Generator spec (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  PairArgs prior;
  auto* prior_cmd = app.add_subcommand("prior", "Compute FG/BG/Disc priors for one pair");
  PairArgs refine_args;
  auto* refine_cmd = app.add_subcommand("refine", "Run refinement and dump per-iteration priors");
  for (auto [cmd, args] : {std::pair{prior_cmd, &prior}, std::pair{refine_cmd, &refine_args}}) {
    cmd->add_option("--query", args->query, "Query feature file (FSSF)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--support", args->support, "Support feature file (FSSF)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--mask", args->mask, "Support mask file (FSSF)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args->out, "Output directory")->required();
    cmd->add_option("--eps", args->epsilon, "Cosine denominator guard")
        ->check(CLI::PositiveNumber);
  }
  refine_cmd->add_option("--iters", refine_args.iters, "Iterations")
      ->check(CLI::NonNegativeNumber);
  refine_cmd->add_option("--gain", refine_args.gain, "Memory encoder mask gain")
      ->check(CLI::NonNegativeNumber);

  RunArgs eval_args, ablate_args, stats_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate the pipeline on an episode set");
  add_run_options(eval_cmd, eval_args, true);
  auto* ablate_cmd = app.add_subcommand("ablate", "Run the four-variant ablation");
  add_run_options(ablate_cmd, ablate_args, false);
  auto* stats_cmd = app.add_subcommand("stats", "Per-layer calibration score summary");
  add_run_options(stats_cmd, stats_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen, out);
    if (*prior_cmd) return run_prior(prior, out);
    if (*refine_cmd) return run_refine(refine_args, out);
    if (*eval_cmd) return run_eval(eval_args, out);
    if (*ablate_cmd) return run_ablate(ablate_args, out);
    if (*stats_cmd) return run_stats(stats_args, out);
  } catch (const Error& e) {
    err << "fssam: " << e.what() << "\n";
    return kExitFailure;
  } catch (const fs::filesystem_error& e) {
    err << "fssam: Io: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"fssam"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fssam
