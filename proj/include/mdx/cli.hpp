#pragma once

// `mdx-eval` command line. run() never calls exit(); it returns
// 0 on success, 1 for validation/metric/domain errors and 2 for usage errors.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdx/analysis.hpp"
#include "mdx/harness.hpp"
#include "mdx/manifest.hpp"
#include "mdx/metrics.hpp"
#include "mdx/oracle.hpp"
#include "mdx/parallel.hpp"
#include "mdx/score_io.hpp"
#include "mdx/song_audio.hpp"
#include "mdx/synthetic.hpp"
#include "mdx/table_io.hpp"
#include "mdx/wav.hpp"

namespace mdx::cli {

namespace detail {

// Effective configuration, printed as "# key = value" lines before results.
class ConfigBlock {
 public:
  explicit ConfigBlock(std::string command) : command_(std::move(command)) {}
  template <typename T>
  ConfigBlock& add(const std::string& key, const T& value) {
    std::ostringstream ss;
    ss << value;
    entries_.emplace_back(key, ss.str());
    return *this;
  }
  void print(std::ostream& out) const {
    out << "# mdx-eval " << command_ << "\n";
    for (const auto& [k, v] : entries_) out << "# " << k << " = " << v << "\n";
  }

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
  return s;
}

struct ValidateArgs {
  std::string manifest;
  double tolerance = kDefaultMixtureTolerance;
  std::size_t jobs = default_jobs();
};

struct ScoreArgs {
  std::string manifest, estimates, system, leaderboard = "B", training_data;
  std::vector<int> rounds = {1, 2, 3};
  std::uint64_t seed = 0;
  double epsilon = 1e-7;
  std::string out_csv, out_json, metrics_table;
  bool include_demo = false;
  std::size_t jobs = default_jobs();
};

struct RankArgs {
  std::vector<std::string> scores;
  std::string leaderboard = "B";
  int decimals = 3;
  std::string out_csv;
};

struct OracleArgs {
  std::string manifest, kind, out;
  std::size_t fft = 4096, hop = 1024, context = 0;
  double regularization = 1e-10, exponent = 2.0;
  bool eligible_only = false;
  std::size_t jobs = default_jobs();
};

struct SuiteArgs {
  std::string reference, estimate;
  double epsilon = 1e-7;
};

struct AnalyzeArgs {
  std::string table, kind = "pearson", system, stem, out_csv;
  double threshold = 0.9;
};

struct PlanArgs {
  std::string manifest, out;
  std::uint64_t seed = 0;
};

struct SynthArgs {
  std::string out, panning = "spread";
  std::size_t songs = 6, demo = 0;
  double seconds = 10.0;
  int sample_rate = 44100;
  std::uint64_t seed = 0;
  long silent_bass_song = -1;
};

inline int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  auto m = load_manifest(a.manifest);
  ConfigBlock("validate").add("manifest", a.manifest).add("tolerance", format_sig6(a.tolerance)).add("jobs", a.jobs).print(out);
  std::vector<ValidationReport> reports(m.songs.size());
  auto errors = parallel_for(m.songs.size(), a.jobs, [&](std::size_t i) {
    reports[i] = validate_song_audio(m.songs[i], a.tolerance);
  });
  bool ok = true;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (errors[i]) {
      ok = false;
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        out << m.songs[i].song_id << ": ERROR " << e.what() << "\n";
      }
      continue;
    }
    ok = ok && reports[i].passed();
    out << reports[i].summary() << "\n";
  }
  out << (ok ? "all songs passed" : "validation failed") << "\n";
  return ok ? 0 : 1;
}

inline int cmd_score(const ScoreArgs& a, std::ostream& out) {
  auto m = load_manifest(a.manifest);
  SubmissionDescriptor sub{a.system, parse_leaderboard(a.leaderboard), a.training_data, a.estimates};
  MetricConfig cfg;
  cfg.epsilon = a.epsilon;
  ConfigBlock("score")
      .add("manifest", a.manifest)
      .add("estimates", a.estimates)
      .add("system", a.system)
      .add("leaderboard", a.leaderboard)
      .add("training_data", a.training_data)
      .add("rounds", join_ints(a.rounds))
      .add("seed", a.seed)
      .add("epsilon", format_sig6(a.epsilon))
      .add("include_demo", a.include_demo ? "true" : "false")
      .add("out_csv", a.out_csv)
      .add("out_json", a.out_json)
      .add("metrics_table", a.metrics_table)
      .add("jobs", a.jobs)
      .print(out);
  RoundPlan plan = plan_rounds(m, a.seed);
  std::set<int> rounds(a.rounds.begin(), a.rounds.end());
  EvaluationOptions opts;
  opts.jobs = a.jobs;
  opts.include_demo = a.include_demo;
  auto scores = evaluate_submission(sub, m, plan, rounds, cfg, opts);
  const std::string csv = scores_to_csv(scores);
  out << csv;
  if (!a.out_csv.empty()) write_text_file(a.out_csv, csv);
  if (!a.out_json.empty()) write_text_file(a.out_json, scores_to_json(scores));

  if (!a.metrics_table.empty()) {
    std::vector<std::map<StemKind, std::map<MetricKey, double>>> suites(scores.size());
    auto errors = parallel_for(scores.size(), a.jobs, [&](std::size_t i) {
      const SongEntry& e = *m.find(scores[i].song_id);
      auto refs = load_reference_stems(e);
      auto ests = load_estimates(sub, e.song_id);
      for (StemKind k : kAllStems) suites[i][k] = metric_suite(refs.at(k), ests.at(k), cfg);
    });
    for (auto& ep : errors)
      if (ep) std::rethrow_exception(ep);
    MetricTable table;
    for (std::size_t i = 0; i < scores.size(); ++i)
      for (StemKind k : kAllStems)
        table.add_suite({a.system, scores[i].song_id, std::string(stem_name(k))}, suites[i][k]);
    write_text_file(a.metrics_table, table.to_csv());
  }
  return 0;
}

inline int cmd_rank(const RankArgs& a, std::ostream& out) {
  const Leaderboard lb = parse_leaderboard(a.leaderboard);
  ConfigBlock("rank").add("scores", join(a.scores)).add("leaderboard", a.leaderboard).add("decimals", a.decimals).add("out_csv", a.out_csv).print(out);
  std::vector<SongScore> all;
  for (const auto& f : a.scores) {
    auto s = load_scores(f);
    all.insert(all.end(), s.begin(), s.end());
  }
  auto entries = rank(group_by_system(all), lb);
  out << format_leaderboard(entries, a.decimals);
  if (!a.out_csv.empty()) write_text_file(a.out_csv, leaderboard_to_csv(entries, a.decimals));
  return 0;
}

inline OracleKind parse_oracle_kind(const std::string& s) {
  if (s == "swf") return OracleKind::Swf;
  if (s == "mwf") return OracleKind::Mwf;
  if (s == "baseline") return OracleKind::Baseline;
  throw UsageError("--kind must be swf, mwf or baseline");
}

inline int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  const OracleKind kind = parse_oracle_kind(a.kind);
  auto m = load_manifest(a.manifest);
  OracleConfig cfg;
  cfg.fft_size = a.fft;
  cfg.hop = a.hop;
  cfg.mwf_regularization = a.regularization;
  cfg.mask_exponent = a.exponent;
  cfg.covariance_context = a.context;
  cfg.validate();
  ConfigBlock("oracle")
      .add("manifest", a.manifest)
      .add("kind", a.kind)
      .add("out", a.out)
      .add("fft", a.fft)
      .add("hop", a.hop)
      .add("mwf_regularization", format_sig6(a.regularization))
      .add("mask_exponent", format_sig6(a.exponent))
      .add("covariance_context", a.context)
      .add("eligible_only", a.eligible_only ? "true" : "false")
      .add("jobs", a.jobs)
      .print(out);
  std::vector<const SongEntry*> songs;
  for (const auto& s : m.songs)
    if (!a.eligible_only || !s.is_demo) songs.push_back(&s);
  auto errors = parallel_for(songs.size(), a.jobs, [&](std::size_t i) {
    const SongEntry& e = *songs[i];
    SongAudio audio = load_song_audio(e);
    StemWaveforms est = run_oracle(kind, audio.mixture, audio.stems, cfg);
    auto dir = std::filesystem::path(a.out) / e.song_id;
    std::filesystem::create_directories(dir);
    for (const auto& [k, w] : est) write_wav(w, dir / (std::string(stem_name(k)) + ".wav"));
  });
  for (std::size_t i = 0; i < songs.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out << "wrote " << songs[i]->song_id << "\n";
  }
  return 0;
}

inline int cmd_suite(const SuiteArgs& a, std::ostream& out) {
  MetricConfig cfg;
  cfg.epsilon = a.epsilon;
  ConfigBlock("suite").add("reference", a.reference).add("estimate", a.estimate).add("epsilon", format_sig6(a.epsilon)).print(out);
  auto ref = read_wav(a.reference);
  auto est = read_wav(a.estimate);
  auto suite = metric_suite(ref, est, cfg);
  out << "metric,value\n";
  for (const auto& k : suite_keys()) {
    auto it = suite.find(k);
    out << metric_key_name(k) << "," << (it == suite.end() ? std::string("absent") : format_sig6(it->second)) << "\n";
  }
  return 0;
}

inline int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  CorrelationKind kind;
  if (a.kind == "pearson") kind = CorrelationKind::Pearson;
  else if (a.kind == "spearman") kind = CorrelationKind::Spearman;
  else throw UsageError("--kind must be pearson or spearman");
  ConfigBlock("analyze")
      .add("table", a.table)
      .add("kind", a.kind)
      .add("threshold", format_sig6(a.threshold))
      .add("system", a.system)
      .add("stem", a.stem)
      .add("out_csv", a.out_csv)
      .print(out);
  auto table = MetricTable::from_csv(read_text_file(a.table)).filtered(a.system, a.stem);
  auto matrix = correlation_matrix(table, kind);
  const std::string csv = matrix.to_csv();
  out << csv << matrix.report(a.threshold);
  if (!a.out_csv.empty()) write_text_file(a.out_csv, csv);
  return 0;
}

inline int cmd_plan(const PlanArgs& a, std::ostream& out) {
  auto m = load_manifest(a.manifest);
  ConfigBlock("plan").add("manifest", a.manifest).add("seed", a.seed).add("out", a.out).print(out);
  const std::string doc = round_plan_to_json(plan_rounds(m, a.seed), m);
  out << doc;
  if (!a.out.empty()) write_text_file(a.out, doc);
  return 0;
}

inline int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticDatasetConfig cfg;
  cfg.songs = a.songs;
  cfg.seconds = a.seconds;
  cfg.sample_rate = a.sample_rate;
  cfg.seed = a.seed;
  cfg.demo_songs = a.demo;
  cfg.silent_bass_song = a.silent_bass_song;
  if (a.panning == "spread") cfg.panning = Panning::Spread;
  else if (a.panning == "hard") cfg.panning = Panning::HardPanned;
  else if (a.panning == "center") cfg.panning = Panning::Center;
  else throw UsageError("--panning must be spread, hard or center");
  ConfigBlock("synth")
      .add("out", a.out)
      .add("songs", a.songs)
      .add("seconds", format_sig6(a.seconds))
      .add("sample_rate", a.sample_rate)
      .add("seed", a.seed)
      .add("demo", a.demo)
      .add("silent_bass_song", a.silent_bass_song)
      .add("panning", a.panning)
      .print(out);
  auto m = write_synthetic_dataset(a.out, cfg);
  out << "wrote " << m.songs.size() << " songs and " << (std::filesystem::path(a.out) / "manifest.json").string() << "\n";
  return 0;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Music demixing evaluation: metrics, oracles, scoring, ranking and metric analysis", "mdx-eval"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check stem/mixture consistency for every song in a manifest");
  validate->add_option("--manifest", va.manifest, "Dataset manifest (JSON)")->required();
  validate->add_option("--tolerance", va.tolerance, "Max |mixture - sum(stems)| amplitude")->capture_default_str();
  validate->add_option("--jobs", va.jobs, "Worker threads")->capture_default_str();

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Score a submission directory against the manifest");
  score->add_option("--manifest", sa.manifest, "Dataset manifest (JSON)")->required();
  score->add_option("--estimates", sa.estimates, "Submission root: <song_id>/<stem>.wav")->required();
  score->add_option("--system", sa.system, "System id")->required();
  score->add_option("--leaderboard", sa.leaderboard, "A or B")->capture_default_str();
  score->add_option("--training-data", sa.training_data, "Training data declaration (A: MUSDB18/MUSDB18-HQ only)");
  score->add_option("--rounds", sa.rounds, "Rounds to score, e.g. 1,2,3")->delimiter(',')->capture_default_str();
  score->add_option("--seed", sa.seed, "Round planning seed")->capture_default_str();
  score->add_option("--epsilon", sa.epsilon, "SDR stabilizing constant")->capture_default_str();
  score->add_option("--out-csv", sa.out_csv, "Write the score table as CSV");
  score->add_option("--out-json", sa.out_json, "Write the score records as JSON");
  score->add_option("--metrics-table", sa.metrics_table, "Write the full metric suite per song and stem as CSV");
  score->add_flag("--include-demo", sa.include_demo, "Also score demo songs (reported, never ranked)");
  score->add_option("--jobs", sa.jobs, "Worker threads")->capture_default_str();

  RankArgs ra;
  auto* rank_cmd = app.add_subcommand("rank", "Build a leaderboard from score files");
  rank_cmd->add_option("--scores", ra.scores, "Score files (.csv or .json)")->required();
  rank_cmd->add_option("--leaderboard", ra.leaderboard, "A or B")->capture_default_str();
  rank_cmd->add_option("--decimals", ra.decimals, "Decimals in the leaderboard")->capture_default_str()->check(CLI::Range(0, 12));
  rank_cmd->add_option("--out-csv", ra.out_csv, "Write the leaderboard as CSV");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Write oracle or baseline estimates for every song");
  oracle->add_option("--manifest", oa.manifest, "Dataset manifest (JSON)")->required();
  oracle->add_option("--kind", oa.kind, "swf, mwf or baseline")->required();
  oracle->add_option("--out", oa.out, "Output submission root")->required();
  oracle->add_option("--fft", oa.fft, "STFT size (power of two)")->capture_default_str();
  oracle->add_option("--hop", oa.hop, "STFT hop")->capture_default_str();
  oracle->add_option("--mwf-regularization", oa.regularization, "Trace-relative MWF regularizer")->capture_default_str();
  oracle->add_option("--mask-exponent", oa.exponent, "SWF mask exponent")->capture_default_str();
  oracle->add_option("--context", oa.context, "MWF covariance context in frames (each side)")->capture_default_str();
  oracle->add_flag("--eligible-only", oa.eligible_only, "Skip demo songs");
  oracle->add_option("--jobs", oa.jobs, "Worker threads")->capture_default_str();

  SuiteArgs su;
  auto* suite = app.add_subcommand("suite", "Print every comparison metric for one reference/estimate pair");
  suite->add_option("--reference", su.reference, "Reference WAV")->required();
  suite->add_option("--estimate", su.estimate, "Estimate WAV")->required();
  suite->add_option("--epsilon", su.epsilon, "SDR stabilizing constant")->capture_default_str();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Correlate metrics across a metric table");
  analyze->add_option("--table", an.table, "Metric table CSV (from score --metrics-table)")->required();
  analyze->add_option("--kind", an.kind, "pearson or spearman")->capture_default_str();
  analyze->add_option("--threshold", an.threshold, "Flag pairs whose agreement is below this")->capture_default_str();
  analyze->add_option("--system", an.system, "Only rows of this system");
  analyze->add_option("--stem", an.stem, "Only rows of this stem");
  analyze->add_option("--out-csv", an.out_csv, "Write the matrix as CSV");

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "Split the non-demo songs into three rounds");
  plan->add_option("--manifest", pa.manifest, "Dataset manifest (JSON)")->required();
  plan->add_option("--seed", pa.seed, "Shuffle seed")->capture_default_str();
  plan->add_option("--out", pa.out, "Write the plan JSON here");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic four-stem dataset with a manifest");
  synth->add_option("--out", sy.out, "Output directory")->required();
  synth->add_option("--songs", sy.songs, "Number of songs")->capture_default_str();
  synth->add_option("--seconds", sy.seconds, "Song duration")->capture_default_str();
  synth->add_option("--sample-rate", sy.sample_rate, "Sample rate")->capture_default_str();
  synth->add_option("--seed", sy.seed, "Generator seed")->capture_default_str();
  synth->add_option("--demo", sy.demo, "Flag the last N songs as demo songs")->capture_default_str();
  synth->add_option("--silent-bass-song", sy.silent_bass_song, "0-based index of a song with silent bass")->capture_default_str();
  synth->add_option("--panning", sy.panning, "spread, hard or center")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*validate) return cmd_validate(va, out);
    if (*score) return cmd_score(sa, out);
    if (*rank_cmd) return cmd_rank(ra, out);
    if (*oracle) return cmd_oracle(oa, out);
    if (*suite) return cmd_suite(su, out);
    if (*analyze) return cmd_analyze(an, out);
    if (*plan) return cmd_plan(pa, out);
    if (*synth) return cmd_synth(sy, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mdx::cli
