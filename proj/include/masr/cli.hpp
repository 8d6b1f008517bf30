#pragma once

// Subcommand implementations behind tools/masr. Each returns a process exit
// code and writes to the given streams.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "masr/backends/config.hpp"
#include "masr/bench.hpp"
#include "masr/pipeline.hpp"

namespace masr {

struct ConfigFile {
  PipelineConfig pipeline;
  BackendConfig backends;
  std::optional<DatasetSpec> dataset;
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::filesystem::path> templates_dir;  // empty: built-in templates
  std::size_t parallel = 1;                            // run_batch workers

  bool operator==(const ConfigFile&) const = default;
};

void to_json(nlohmann::json& j, const ConfigFile& c);
// Unknown top-level keys are rejected; errors carry the field path.
void from_json(const nlohmann::json& j, ConfigFile& c);
// Relative dataset/template/cache paths resolve against the file's directory.
ConfigFile load_config_file(const std::filesystem::path& path);

// Accepts a dataset directory (containing dataset.jsonl), a .jsonl file, or
// a .json DatasetSpec document.
DatasetSpec resolve_dataset_arg(const std::filesystem::path& arg);

struct RunOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> dataset;
  std::filesystem::path out;
  bool mock = false;
  std::optional<std::filesystem::path> mock_tables;  // default: <dataset dir>/mock_tables.json
  std::optional<std::size_t> parallel;
  std::optional<int> max_rounds;
  std::optional<std::size_t> k_v, k_f, k_c;
  std::optional<int> dte_wn, dte_w, dte_s, dte_r;  // override dte_main
  std::optional<std::size_t> n_clusters;
  std::optional<std::uint64_t> seed;
};

// Applies flag overrides on top of the loaded config (flags win).
ConfigFile effective_config(const RunOptions& opts);

inline constexpr std::string_view kSummarySchema = "masr.summary/1";

// Deterministic: no timing fields.
nlohmann::json run_summary(const ConfigFile& config, const PromptTemplates& templates,
                           std::span<const RunTrace> traces, std::span<const QaTask> tasks);

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const std::filesystem::path& traces_dir, const std::filesystem::path& dataset, std::ostream& out,
             std::ostream& err);
int cmd_synth(const std::filesystem::path& spec_path, const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);
int cmd_trace(const std::filesystem::path& trace_file, std::ostream& out, std::ostream& err);

std::string render_trace(const RunTrace& trace);

}  // namespace masr
