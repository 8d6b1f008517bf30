#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "masr/cli.hpp"
#include "masr/cluster.hpp"
#include "masr/serialize.hpp"
#include "test_util.hpp"

using namespace masr;
using masr::testing::TempDir;

namespace {

struct Captured {
  int code = -1;
  std::string out, err;
};

template <typename Fn>
Captured capture(Fn&& fn) {
  std::ostringstream out, err;
  Captured c;
  c.code = fn(out, err);
  c.out = out.str();
  c.err = err.str();
  return c;
}

// Synthesizes a small dataset into dir/data and returns its run config path.
std::filesystem::path synth(const TempDir& dir, std::size_t n_tasks) {
  write_json_file(nlohmann::json{{"seed", 3}, {"n_tasks", n_tasks}}, dir / "spec.json");
  const auto r = capture([&](auto& o, auto& e) { return cmd_synth(dir / "spec.json", dir / "data", o, e); });
  EXPECT_EQ(r.code, 0) << r.err;
  return dir.path() / "data" / "run_config.json";
}

RunTrace sample_trace() {
  RunTrace t;
  t.task_id = "case";
  t.video_id = "kitchen";
  t.frame_count = 60;
  t.centers = {8, 14, 38};
  t.clips = clips_from_centers(t.centers, 60);
  RoundRecord r0;
  r0.round = 0;
  r0.focused_frames = t.centers;
  r0.expanded_frames = {6, 8, 10, 12, 14, 16, 36, 38, 40};
  r0.verdict = Verdict{1, 1, "not enough"};
  RoundRecord r1;
  r1.round = 1;
  r1.selected_clips = {t.clips[2]};
  r1.focus.entries.push_back(FocusEntry{Clip{14, 38, 23}, 23, 0.8125});
  r1.focused_frames = {23};
  r1.expanded_frames = {15, 17, 19, 21, 23, 25, 27, 29, 31};
  r1.verdict = Verdict{2, 3, "seen"};
  t.rounds = {r0, r1};
  t.final_answer = 2;
  t.final_confidence = 3;
  t.termination = Termination::Confident;
  return t;
}

}  // namespace

TEST(Cli, SynthWritesDatasetAndRunConfig) {
  TempDir dir;
  const auto cfg = synth(dir, 2);
  EXPECT_TRUE(std::filesystem::exists(dir / "data/dataset.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(dir / "data/manifests/vid-0000.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "data/mock_tables.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "data/frames/vid-0001/000119.pgm"));
  const auto loaded = load_config_file(cfg);
  EXPECT_EQ(loaded.pipeline.n_clusters, 4u);
  EXPECT_EQ(loaded.dataset->path, dir / "data" / "dataset.jsonl");
}

TEST(Cli, MockRunWritesTracesAndSummary) {
  TempDir dir;
  const auto cfg = synth(dir, 4);
  RunOptions o;
  o.config = cfg;
  o.mock = true;
  o.out = dir / "out";
  const auto r = capture([&](auto& out, auto& err) { return cmd_run(o, out, err); });
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accuracy"), std::string::npos);
  const auto summary = read_json_file(dir / "out/summary.json");
  EXPECT_EQ(summary.at("schema"), kSummarySchema);
  EXPECT_EQ(summary.at("n_tasks"), 4);
  EXPECT_TRUE(summary.contains("config_digest"));
  EXPECT_TRUE(summary.contains("template_digests"));
  EXPECT_TRUE(summary.contains("seed"));
  EXPECT_EQ(summary.at("report").at("accuracy"), 1.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out/traces/syn-0003.json"));

  const auto ev = capture([&](auto& out, auto& err) { return cmd_eval(dir / "out/traces", dir / "data", out, err); });
  EXPECT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(ev.out.find("accuracy               1.0000"), std::string::npos) << ev.out;

  const auto tr = capture([&](auto& out, auto& err) { return cmd_trace(dir / "out/traces/syn-0000.json", out, err); });
  EXPECT_EQ(tr.code, 0);
  EXPECT_NE(tr.out.find("round 1:"), std::string::npos);
}

TEST(Cli, ParallelRunsGiveIdenticalSummaries) {
  TempDir dir;
  const auto cfg = synth(dir, 6);
  std::string summaries[2];
  const std::size_t parallel[2] = {1, 8};
  for (int i = 0; i < 2; ++i) {
    RunOptions o;
    o.config = cfg;
    o.mock = true;
    o.parallel = parallel[i];
    o.out = dir / ("out" + std::to_string(i));
    ASSERT_EQ(capture([&](auto& out, auto& err) { return cmd_run(o, out, err); }).code, 0);
    summaries[i] = read_json_file(o.out / "summary.json").dump();
  }
  EXPECT_EQ(summaries[0], summaries[1]);
}

TEST(Cli, FlagsOverrideConfig) {
  TempDir dir;
  const auto cfg = synth(dir, 1);
  RunOptions o;
  o.config = cfg;
  o.k_v = 12;
  o.dte_wn = 5;
  o.dte_r = 1;
  o.max_rounds = 2;
  o.seed = 9;
  const auto c = effective_config(o);
  EXPECT_EQ(c.pipeline.focus.k_v, 12u);
  EXPECT_EQ(c.pipeline.dte_main, (DteParams{5, 6, 3, 1}));
  EXPECT_EQ(c.pipeline.max_rounds, 2);
  EXPECT_EQ(c.pipeline.seed, 9u);
  EXPECT_EQ(c.pipeline.n_clusters, 4u);
  o.dte_wn = 4;
  EXPECT_MASR_ERROR(effective_config(o), ErrorKind::ConfigError);
}

TEST(Cli, MissingApiKeyFailsFast) {
  TempDir dir;
  const auto cfg = synth(dir, 1);
  RunOptions o;
  o.config = cfg;
  o.out = dir / "out";
  ::unsetenv("MASR_API_KEY");
  const auto r = capture([&](auto& out, auto& err) { return cmd_run(o, out, err); });
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("MASR_API_KEY"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(dir / "out"));
}

TEST(Cli, AbortedTaskGivesNonzeroExit) {
  TempDir dir;
  const auto cfg = synth(dir, 2);
  std::filesystem::remove(dir / "data/frames/vid-0001/000000.pgm");
  RunOptions o;
  o.config = cfg;
  o.mock = true;
  o.out = dir / "out";
  const auto r = capture([&](auto& out, auto& err) { return cmd_run(o, out, err); });
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("syn-0001"), std::string::npos) << r.err;
  EXPECT_EQ(read_json_file(dir / "out/summary.json").at("n_aborted"), 1);
}

TEST(Cli, ConfigErrorsNameFields) {
  TempDir dir;
  write_json_file(nlohmann::json{{"pipeline", {{"k_f", 0}}}}, dir / "bad.json");
  EXPECT_MASR_ERROR(load_config_file(dir / "bad.json"), ErrorKind::ConfigError);
  write_json_file(nlohmann::json{{"pipelin", nlohmann::json::object()}}, dir / "typo.json");
  try {
    load_config_file(dir / "typo.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("config.pipelin"), std::string::npos);
  }
  write_json_file(nlohmann::json{{"backends", {{"timeout_s", "slow"}}}}, dir / "b.json");
  try {
    load_config_file(dir / "b.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("backends.timeout_s"), std::string::npos);
  }
}

TEST(Cli, ConfigJsonRoundTrip) {
  ConfigFile c;
  c.parallel = 3;
  c.synthetic = SyntheticSpec{};
  c.templates_dir = "/t";
  c.backends.cache_dir = "/c";
  EXPECT_EQ(nlohmann::json(c).get<ConfigFile>(), c);
}

TEST(Cli, EvalNeedsTraces) {
  TempDir dir;
  std::filesystem::create_directories(dir / "empty");
  const auto r = capture([&](auto& out, auto& err) { return cmd_eval(dir / "empty", dir / "data", out, err); });
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("no traces"), std::string::npos);
}

TEST(Cli, EvalIdMismatch) {
  TempDir dir;
  synth(dir, 2);
  std::filesystem::create_directories(dir / "traces");
  write_json_file(trace_to_json(sample_trace()), dir / "traces/case.json");
  const auto r = capture([&](auto& out, auto& err) { return cmd_eval(dir / "traces", dir / "data", out, err); });
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("IdMismatch"), std::string::npos);
  EXPECT_NE(r.err.find("case"), std::string::npos);
}

TEST(Cli, TraceRendersRounds) {
  const auto text = render_trace(sample_trace());
  EXPECT_NE(text.find("cluster centers: 8, 14, 38"), std::string::npos) << text;
  EXPECT_NE(text.find("round 0:\n  focused on cluster centers 8, 14, 38"), std::string::npos) << text;
  EXPECT_NE(text.find("round 1:\n  selected clips: [14,38]"), std::string::npos) << text;
  EXPECT_NE(text.find("focused frame 23 in clip [14,38] (similarity 0.8125)"), std::string::npos) << text;
  EXPECT_NE(text.find("final: answer C, confidence 3, terminated confident"), std::string::npos) << text;
}

TEST(Cli, TraceCorruptJsonReportsOffset) {
  TempDir dir;
  std::ofstream(dir / "t.json") << R"({"task_id": "x",, })";
  const auto r = capture([&](auto& out, auto& err) { return cmd_trace(dir / "t.json", out, err); });
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("byte 17"), std::string::npos) << r.err;
}
