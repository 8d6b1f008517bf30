#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "masr/cli.hpp"
#include "masr/errors.hpp"
#include "masr/serialize.hpp"

namespace masr {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitAborted = 1;
constexpr int kExitError = 2;

std::string clip_text(const Clip& c) { return "[" + std::to_string(c.start) + "," + std::to_string(c.end) + "]"; }

std::string join_frames(std::span<const FrameIndex> frames) {
  std::string s;
  for (std::size_t i = 0; i < frames.size(); ++i) s += (i ? ", " : "") + std::to_string(frames[i]);
  return s.empty() ? "-" : s;
}

PromptTemplates templates_for(const ConfigFile& cfg) {
  return cfg.templates_dir ? PromptTemplates::load(*cfg.templates_dir) : PromptTemplates::defaults();
}

std::shared_ptr<const MockTables> load_tables(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::Io, "mock tables not found at " + path.string());
  try {
    return std::make_shared<const MockTables>(read_json_file(path).get<MockTables>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace

ConfigFile effective_config(const RunOptions& o) {
  ConfigFile c = o.config ? load_config_file(*o.config) : ConfigFile{};
  if (o.parallel) c.parallel = *o.parallel;
  if (o.max_rounds) c.pipeline.max_rounds = *o.max_rounds;
  if (o.k_v) c.pipeline.focus.k_v = *o.k_v;
  if (o.k_f) c.pipeline.focus.k_f = *o.k_f;
  if (o.k_c) c.pipeline.focus.k_c = *o.k_c;
  if (o.dte_wn) c.pipeline.dte_main.wn = *o.dte_wn;
  if (o.dte_w) c.pipeline.dte_main.w = *o.dte_w;
  if (o.dte_s) c.pipeline.dte_main.s = *o.dte_s;
  if (o.dte_r) c.pipeline.dte_main.r = *o.dte_r;
  if (o.n_clusters) c.pipeline.n_clusters = *o.n_clusters;
  if (o.seed) c.pipeline.seed = *o.seed;
  if (o.dataset) c.dataset = resolve_dataset_arg(*o.dataset);
  if (c.parallel < 1) throw Error(ErrorKind::ConfigError, "parallel: must be >= 1");
  c.pipeline.validate();
  return c;
}

nlohmann::json run_summary(const ConfigFile& config, const PromptTemplates& templates, std::span<const RunTrace> traces,
                           std::span<const QaTask> tasks) {
  nlohmann::json rows = nlohmann::json::array();
  std::size_t aborted = 0;
  for (const auto& t : traces) {
    if (t.termination == Termination::Error) ++aborted;
    rows.push_back({{"task_id", t.task_id},
                    {"final_answer", t.final_answer ? nlohmann::json(*t.final_answer) : nlohmann::json(nullptr)},
                    {"final_confidence", t.final_confidence ? nlohmann::json(*t.final_confidence) : nlohmann::json(nullptr)},
                    {"termination", to_string(t.termination)},
                    {"rounds", t.rounds.size()},
                    {"answer_exchanges", t.answer_exchanges()},
                    {"selection_exchanges", t.selection_exchanges()},
                    {"error", t.error}});
  }
  return {{"schema", kSummarySchema},
          {"config_digest", config.pipeline.digest()},
          {"template_digests", templates.digests()},
          {"seed", config.pipeline.seed},
          {"pipeline", config.pipeline},
          {"n_tasks", traces.size()},
          {"n_aborted", aborted},
          {"report", report_to_json(evaluate(traces, tasks))},
          {"tasks", rows}};
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const ConfigFile cfg = effective_config(opts);
    const PromptTemplates templates = templates_for(cfg);

    BackendSet backends;
    if (!opts.mock) backends = make_http_backends(cfg.backends);  // fail fast on credentials
    if (!cfg.dataset) throw Error(ErrorKind::ConfigError, "dataset: no dataset given (use --dataset or config.dataset)");
    const DatasetSpec& dataset = *cfg.dataset;
    if (opts.mock) {
      const auto tables_path = opts.mock_tables.value_or(dataset.path.parent_path() / "mock_tables.json");
      backends = make_mock_backends(load_tables(tables_path), cfg.backends.cache_dir);
    }

    const auto tasks = load_dataset(dataset);
    const auto videos = load_videos(dataset, tasks);
    const auto traces = run_batch(tasks, videos, cfg.pipeline, PipelineBackends::from(backends), templates, cfg.parallel);

    std::filesystem::create_directories(opts.out / "traces");
    for (const auto& t : traces) write_json_file(trace_to_json(t), opts.out / "traces" / (t.task_id + ".json"));
    const nlohmann::json summary = run_summary(cfg, templates, traces, tasks);
    write_json_file(summary, opts.out / "summary.json");

    out << format_report_table(evaluate(traces, tasks));
    const std::size_t aborted = summary.at("n_aborted").get<std::size_t>();
    if (aborted > 0) {
      err << "error: " << aborted << " task(s) aborted\n";
      for (const auto& t : traces) {
        if (t.termination == Termination::Error) err << "  " << t.task_id << ": " << t.error << "\n";
      }
      return kExitAborted;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_eval(const std::filesystem::path& traces_dir, const std::filesystem::path& dataset, std::ostream& out,
             std::ostream& err) {
  try {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(traces_dir)) {
      for (const auto& e : std::filesystem::directory_iterator(traces_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
      }
    }
    if (files.empty()) throw Error(ErrorKind::InvalidArgument, "no traces found in " + traces_dir.string());
    std::sort(files.begin(), files.end());
    std::vector<RunTrace> traces;
    for (const auto& f : files) {
      try {
        traces.push_back(trace_from_json(read_json_file(f)));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, f.string() + ": " + e.what());
      }
    }
    const auto tasks = load_dataset(resolve_dataset_arg(dataset));
    const EvalReport report = evaluate(traces, tasks);
    out << format_report_table(report);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_synth(const std::filesystem::path& spec_path, const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err) {
  try {
    const nlohmann::json doc = read_json_file(spec_path);
    SyntheticSpec spec;
    if (doc.contains("synthetic")) {
      const ConfigFile cfg = doc.get<ConfigFile>();
      if (cfg.synthetic) spec = *cfg.synthetic;
    } else {
      spec = doc.get<SyntheticSpec>();
    }
    const SyntheticDataset data = generate_synthetic(spec);
    write_synthetic(data, out_dir);

    // A config whose pipeline matches the settings the placement was checked against.
    ConfigFile run_cfg;
    run_cfg.pipeline.n_clusters = spec.n_clips_hint;
    run_cfg.pipeline.seed = spec.cluster_seed;
    run_cfg.pipeline.dte_round0 = spec.dte_round0;
    run_cfg.pipeline.dte_main = spec.dte_main;
    DatasetSpec ds;
    ds.path = "dataset.jsonl";
    run_cfg.dataset = ds;
    run_cfg.synthetic = spec;
    write_json_file(nlohmann::json(run_cfg), out_dir / "run_config.json");

    out << "wrote " << data.tasks.size() << " tasks, " << data.images.size() << " frames to " << out_dir.string()
        << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

std::string render_trace(const RunTrace& t) {
  std::ostringstream o;
  char buf[160];
  o << "task " << t.task_id << " (video " << t.video_id << ", " << t.frame_count << " frames)\n";
  o << "cluster centers: " << join_frames(t.centers) << "\n";
  o << "clips:";
  for (const auto& c : t.clips) o << " " << clip_text(c);
  o << "\n";
  for (const auto& r : t.rounds) {
    o << "round " << r.round << ":\n";
    if (r.round == 0) {
      o << "  focused on cluster centers " << join_frames(r.focused_frames) << "\n";
    } else {
      o << "  selected clips:";
      for (const auto& c : r.selected_clips) o << " " << clip_text(c);
      if (r.selection_fallback) o << " (fallback: all clips)";
      o << "\n";
      for (const auto& e : r.focus.entries) {
        std::snprintf(buf, sizeof buf, "  focused frame %zu in clip %s (similarity %.4f)\n", e.frame_index,
                      clip_text(e.clip).c_str(), e.similarity);
        o << buf;
      }
      if (r.focus.entries.empty()) o << "  focused frames: " << join_frames(r.focused_frames) << "\n";
    }
    o << "  expanded to " << join_frames(r.expanded_frames) << "\n";
    std::vector<FrameIndex> captioned;
    for (const auto& c : r.new_captions) captioned.push_back(c.frame_index);
    o << "  captioned " << captioned.size() << " new frame(s): " << join_frames(captioned) << "; ledger holds "
      << r.ledger_size << "\n";
    if (r.verdict) {
      o << "  answer " << option_letter(r.verdict->answer_index) << " with confidence " << r.verdict->confidence;
      if (!r.verdict->rationale.empty()) o << ": " << r.verdict->rationale;
      o << "\n";
    }
    for (const auto& w : r.warnings) o << "  warning: " << w << "\n";
  }
  o << "final: ";
  if (t.final_answer) {
    o << "answer " << option_letter(*t.final_answer) << ", confidence " << t.final_confidence.value_or(0);
  } else {
    o << "no answer";
  }
  o << ", terminated " << to_string(t.termination);
  if (!t.error.empty()) o << " (" << t.error << ")";
  o << "\n";
  return o.str();
}

int cmd_trace(const std::filesystem::path& trace_file, std::ostream& out, std::ostream& err) {
  try {
    const nlohmann::json doc = read_json_file(trace_file);
    RunTrace trace;
    try {
      trace = trace_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, trace_file.string() + ": " + e.what());
    }
    out << render_trace(trace);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace masr
