#pragma once

// Dataset ingestion, synthetic data with planted key frames, and accuracy
// reporting.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "masr/backends/mock.hpp"
#include "masr/core.hpp"
#include "masr/pipeline.hpp"

namespace masr {

// JSONL, one {"task_id","video_id","question","options":[...],"gold_index"}
// per line. Manifests live at manifest_pattern with {video_id} substituted,
// relative to the dataset file's directory unless absolute.
struct DatasetSpec {
  std::string format = "jsonl-mcq";
  std::filesystem::path path;
  std::filesystem::path frames_root;  // empty: <dataset dir>/frames
  std::string manifest_pattern = "manifests/{video_id}.json";

  std::filesystem::path manifest_path(const std::string& video_id) const;
  std::filesystem::path resolved_frames_root() const;
  bool operator==(const DatasetSpec&) const = default;
};

void to_json(nlohmann::json& j, const DatasetSpec& s);
void from_json(const nlohmann::json& j, DatasetSpec& s);

// Throws ParseError (with the 1-based line number), MissingManifest.
std::vector<QaTask> load_dataset(const DatasetSpec& spec);
// Loads and validates the manifest of every distinct video in `tasks`.
std::map<std::string, VideoInput> load_videos(const DatasetSpec& spec, std::span<const QaTask> tasks);

struct SyntheticSpec {
  std::uint64_t seed = 7;
  std::size_t n_tasks = 100;
  std::size_t frames_per_video = 120;
  std::size_t n_clips_hint = 4;     // scenes per video; also the clustering k used for placement
  double key_frame_margin = 0.2;    // query-similarity gap between key frame and every other frame
  int key_reachable_at_round = 1;   // 0, 1 or 2
  int evidence_offset = 0;          // key caption sits this many frames after the key frame
  std::size_t dim = 32;
  std::size_t n_options = 5;
  // Pipeline settings the placement is checked against.
  std::uint64_t cluster_seed = 0;
  DteParams dte_round0 = dte_presets::round_zero();
  DteParams dte_main = dte_presets::standard();

  void validate() const;  // throws InvalidArgument
  bool operator==(const SyntheticSpec&) const = default;
};

void to_json(nlohmann::json& j, const SyntheticSpec& s);
void from_json(const nlohmann::json& j, SyntheticSpec& s);

struct PlantedTruth {
  std::string task_id;
  FrameIndex key_frame = 0;       // highest query similarity
  FrameIndex evidence_frame = 0;  // carries the answering caption
  std::optional<FrameIndex> hint_frame;

  bool operator==(const PlantedTruth&) const = default;
};

struct SyntheticDataset {
  std::vector<QaTask> tasks;
  std::vector<FrameManifest> manifests;
  std::map<std::string, std::string> images;  // image_ref -> file bytes
  MockTables tables;
  std::vector<PlantedTruth> truth;

  bool operator==(const SyntheticDataset&) const = default;
};

// Deterministic in spec.seed. Throws InfeasiblePlacement when no placement
// satisfies the reachability constraints.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// Writes dataset.jsonl, manifests/, frames/, mock_tables.json, truth.json
// and returns the DatasetSpec that reads it back.
DatasetSpec write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir);

struct EvalReport {
  std::size_t n_tasks = 0;
  std::size_t n_scored = 0;  // tasks with a gold answer
  std::size_t n_correct = 0;
  double accuracy = 0.0;     // n_correct / n_scored
  std::map<int, std::size_t> final_round_counts;  // round of the final answer, -1: none
  double mean_rounds = 0.0;
  std::map<std::string, std::size_t> termination_counts;

  bool operator==(const EvalReport&) const = default;
};

// Traces and tasks must cover the same task ids; IdMismatch lists offenders.
EvalReport evaluate(std::span<const RunTrace> traces, std::span<const QaTask> tasks);

nlohmann::json report_to_json(const EvalReport& report);
std::string format_report_table(const EvalReport& report);

}  // namespace masr
