#include <sstream>

#include <gtest/gtest.h>

#include "mdx/cli.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace mdx;
using testing_support::TempDir;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "mdx-eval");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Output with the "# key = value" configuration lines removed.
std::string body(const std::string& s) {
  std::istringstream in(s);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("# ", 0) != 0) out += line + "\n";
  return out;
}

struct CliDataset {
  TempDir dir{"mdx-cli"};
  std::string manifest;
  CliDataset() {
    auto r = call({"synth", "--out", dir.path().string(), "--songs", "5", "--seconds", "1.5", "--sample-rate", "8000",
                   "--demo", "1", "--silent-bass-song", "1", "--seed", "3"});
    EXPECT_EQ(r.code, 0) << r.err;
    manifest = (dir / "manifest.json").string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  auto r = call({"score", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({"analyze", "--table", "x.csv", "--kind", "kendall"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  auto r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("score"), std::string::npos);
}

TEST(Cli, DomainErrorsExitOne) {
  auto r = call({"validate", "--manifest", "/nonexistent/manifest.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
}

TEST(Cli, SuiteOnIdenticalFiles) {
  CliDataset ds;
  auto vocals = (ds.dir / "SYN_001" / "vocals.wav").string();
  auto r = call({"suite", "--reference", vocals, "--estimate", vocals});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# reference = " + vocals), std::string::npos);
  EXPECT_NE(r.out.find("global_mae,0\n"), std::string::npos);
  EXPECT_NE(r.out.find("global_mse,0\n"), std::string::npos);
  EXPECT_NE(r.out.find("global_si_sdr,120\n"), std::string::npos);
  Waveform w = read_wav(vocals);
  double e = static_cast<double>(oracle::energy(w, 0, w.frames()));
  EXPECT_NE(r.out.find("global_sdr," + format_sig6(10.0 * std::log10((e + 1e-7) / 1e-7)) + "\n"), std::string::npos);
  // 1.5 s is shorter than the 30 s frames of the v3 framewise variant.
  EXPECT_NE(r.out.find("bsseval_v3_framewise_sdr_mean,absent\n"), std::string::npos);
}

TEST(Cli, ValidateReportsEachSong) {
  CliDataset ds;
  auto r = call({"validate", "--manifest", ds.manifest});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  for (const char* id : {"SYN_001", "SYN_002", "SYN_003", "SYN_004", "SYN_005"})
    EXPECT_NE(r.out.find(std::string(id) + ": PASS"), std::string::npos) << id;
  // Breaking a mixture fails validation with exit code 1.
  Waveform mix = read_wav(ds.dir / "SYN_002" / "mixture.wav");
  mix.at(0, 100) += 0.5;
  write_wav(mix, ds.dir / "SYN_002" / "mixture.wav");
  r = call({"validate", "--manifest", ds.manifest, "--tolerance", "1e-3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("SYN_002: FAIL"), std::string::npos);
}

TEST(Cli, BaselineOracleThenScoreMatchesHarness) {
  CliDataset ds;
  auto est = ds.path("baseline");
  ASSERT_EQ(call({"oracle", "--manifest", ds.manifest, "--kind", "baseline", "--out", est}).code, 0);
  auto r = call({"score", "--manifest", ds.manifest, "--estimates", est, "--system", "mix", "--out-json",
                 ds.path("mix.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto scores = load_scores(ds.path("mix.json"));
  auto m = load_manifest(ds.manifest);
  ASSERT_EQ(scores.size(), 4u);
  for (const auto& s : scores) {
    const SongEntry& e = *m.find(s.song_id);
    SongAudio audio = load_song_audio(e);
    SongScore expected = score_song(e, audio.stems, mixture_baseline(audio.mixture));
    EXPECT_DOUBLE_EQ(s.sdr_song, expected.sdr_song) << s.song_id;
  }
  EXPECT_EQ(m.find("SYN_002")->silent_stems.count(StemKind::Bass), 1u);
  EXPECT_NE(r.out.find("bass=silent reference"), std::string::npos);
}

TEST(Cli, ScoreThenRankOrdersByHandComputedMeans) {
  CliDataset ds;
  ASSERT_EQ(call({"oracle", "--manifest", ds.manifest, "--kind", "baseline", "--out", ds.path("base")}).code, 0);
  ASSERT_EQ(call({"oracle", "--manifest", ds.manifest, "--kind", "swf", "--out", ds.path("swf"), "--fft", "1024",
                  "--hop", "256"}).code, 0);
  for (const char* sys : {"base", "swf"})
    ASSERT_EQ(call({"score", "--manifest", ds.manifest, "--estimates", ds.path(sys), "--system", sys, "--out-csv",
                    ds.path(std::string(sys) + ".csv"), "--out-json", ds.path(std::string(sys) + ".json")})
                  .code,
              0);
  auto r = call({"rank", "--scores", ds.path("base.json"), ds.path("swf.json"), "--out-csv", ds.path("board.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::string, double> mean;
  for (const char* sys : {"base", "swf"}) {
    double sum = 0.0;
    auto scores = load_scores(ds.path(std::string(sys) + ".json"));
    for (const auto& s : scores) sum += s.sdr_song;
    mean[sys] = sum / static_cast<double>(scores.size());
  }
  ASSERT_GT(mean["swf"], mean["base"]);
  auto rows = parse_csv(read_text_file(ds.path("board.csv")));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][1], "swf");
  EXPECT_EQ(rows[1][2], format_fixed(mean["swf"], 3));
  EXPECT_EQ(rows[2][1], "base");
  EXPECT_EQ(rows[2][2], format_fixed(mean["base"], 3));
  // CSV scores (six significant digits) rank the same way.
  auto csv = call({"rank", "--scores", ds.path("base.csv"), ds.path("swf.csv"), "--decimals", "2"});
  ASSERT_EQ(csv.code, 0) << csv.err;
  EXPECT_LT(csv.out.find("swf"), csv.out.find("base "));
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  CliDataset ds;
  ASSERT_EQ(call({"oracle", "--manifest", ds.manifest, "--kind", "mwf", "--out", ds.path("mwf"), "--jobs", "2"}).code, 0);
  std::vector<std::string> first;
  for (int run = 0; run < 2; ++run) {
    for (const char* jobs : {"1", "3"}) {
      auto r = call({"score", "--manifest", ds.manifest, "--estimates", ds.path("mwf"), "--system", "mwf", "--seed",
                     "7", "--jobs", jobs, "--out-csv", ds.path("a.csv"), "--metrics-table", ds.path("t.csv")});
      ASSERT_EQ(r.code, 0) << r.err;
      std::vector<std::string> now = {body(r.out), read_text_file(ds.path("a.csv")), read_text_file(ds.path("t.csv"))};
      if (first.empty()) first = now;
      EXPECT_EQ(now, first);
    }
  }
}

TEST(Cli, PlanAndRoundSelection) {
  CliDataset ds;
  auto r = call({"plan", "--manifest", ds.manifest, "--seed", "4", "--out", ds.path("plan.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(read_text_file(ds.path("plan.json")));
  EXPECT_EQ(doc["seed"], 4);
  EXPECT_EQ(doc["rounds"]["1"].size() + doc["rounds"]["2"].size() + doc["rounds"]["3"].size(), 4u);
  EXPECT_EQ(doc["round_assignment"]["SYN_005"], 0);

  ASSERT_EQ(call({"oracle", "--manifest", ds.manifest, "--kind", "baseline", "--out", ds.path("b")}).code, 0);
  auto one = call({"score", "--manifest", ds.manifest, "--estimates", ds.path("b"), "--system", "b", "--seed", "4",
                   "--rounds", "1", "--out-json", ds.path("r1.json")});
  ASSERT_EQ(one.code, 0) << one.err;
  auto scores = load_scores(ds.path("r1.json"));
  ASSERT_EQ(scores.size(), doc["rounds"]["1"].size());
  for (const auto& s : scores) EXPECT_EQ(s.round, 1);
}

TEST(Cli, AnalyzeMetricsTable) {
  CliDataset ds;
  ASSERT_EQ(call({"oracle", "--manifest", ds.manifest, "--kind", "swf", "--out", ds.path("s")}).code, 0);
  ASSERT_EQ(call({"score", "--manifest", ds.manifest, "--estimates", ds.path("s"), "--system", "s", "--metrics-table",
                  ds.path("table.csv")})
                .code,
            0);
  auto r = call({"analyze", "--table", ds.path("table.csv"), "--kind", "spearman", "--out-csv", ds.path("m.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("spearman correlation report"), std::string::npos);
  auto rows = parse_csv(read_text_file(ds.path("m.csv")));
  EXPECT_EQ(rows.size(), suite_keys().size() + 1);
  auto filtered = call({"analyze", "--table", ds.path("table.csv"), "--stem", "vocals"});
  EXPECT_EQ(filtered.code, 0) << filtered.err;
}

TEST(Cli, MissingSubmissionIsDomainError) {
  CliDataset ds;
  auto r = call({"score", "--manifest", ds.manifest, "--estimates", ds.path("nothing"), "--system", "x"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("SYN_001"), std::string::npos);
  EXPECT_NE(r.err.find("SYN_004"), std::string::npos);
}
