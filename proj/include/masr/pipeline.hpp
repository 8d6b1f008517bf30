#pragma once

// End-to-end orchestration of one question over one video:
//
//   embed all frames -> cluster -> round 0: expand + caption the centers
//   -> answer and self-grade; while not confident and rounds remain:
//   coarse select -> fine focus -> expand -> caption new frames -> answer.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "masr/backends/config.hpp"
#include "masr/cluster.hpp"
#include "masr/core.hpp"
#include "masr/focus.hpp"
#include "masr/reflector.hpp"

namespace masr {

struct PipelineConfig {
  std::size_t n_clusters = 0;  // 0: default_cluster_count(T')
  int max_rounds = 5;          // total rounds including round 0
  std::uint64_t seed = 0;      // clustering seed
  FocusParams focus;
  DteParams dte_round0 = dte_presets::round_zero();
  DteParams dte_main = dte_presets::standard();
  Rational sample_fps{1, 1};   // rate the frames are expected to be extracted at
  bool fine_focus = true;      // false: focus on selected clips' midpoints (ablation)
  std::size_t caption_parallelism = 4;

  void validate() const;  // throws ConfigError naming the field
  // sha256 of the canonical JSON form.
  std::string digest() const;
  bool operator==(const PipelineConfig&) const = default;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

struct VideoInput {
  FrameManifest manifest;
  std::filesystem::path frames_root;  // image_ref paths are relative to this

  std::filesystem::path image_path(FrameIndex i) const { return frames_root / manifest.frames.at(i).image_ref; }
};

enum class Termination { Confident, RoundBudget, Error };
std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view s);

struct RoundRecord {
  int round = 0;
  std::vector<Clip> selected_clips;  // empty in round 0
  bool selection_fallback = false;   // selection failed, all clips used
  std::vector<FrameIndex> focused_frames;
  FocusSet focus;                    // empty in round 0 (centers are used directly)
  std::vector<FrameIndex> expanded_frames;
  std::vector<CaptionRecord> new_captions;  // ascending frame order
  std::size_t ledger_size = 0;
  std::optional<Verdict> verdict;
  int answer_exchanges = 0;
  int selection_exchanges = 0;
  std::string chat_model;
  std::vector<std::string> warnings;
  double elapsed_ms = 0.0;

  bool operator==(const RoundRecord&) const = default;
};

inline constexpr std::string_view kTraceSchema = "masr.trace/1";

struct RunTrace {
  std::string task_id;
  std::string video_id;
  std::string config_digest;
  std::map<std::string, std::string> template_digests;
  std::size_t frame_count = 0;
  std::vector<FrameIndex> centers;
  std::vector<Clip> clips;
  std::vector<RoundRecord> rounds;
  std::optional<std::size_t> final_answer;
  std::optional<int> final_confidence;
  Termination termination = Termination::Error;
  std::string error;  // set when termination == Error
  std::vector<std::string> warnings;
  double elapsed_ms = 0.0;

  int answer_exchanges() const;
  int selection_exchanges() const;
  bool operator==(const RunTrace&) const = default;
};

nlohmann::json trace_to_json(const RunTrace& trace, bool include_timing = true);
RunTrace trace_from_json(const nlohmann::json& j);

struct PipelineBackends {
  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<Captioner> captioner;
  std::shared_ptr<Encoder> encoder;

  static PipelineBackends from(const BackendSet& set) { return {set.chat, set.captioner, set.encoder}; }
};

// Never throws for backend failures: they end the trace with
// Termination::Error and the partial rounds kept. Invalid configuration or
// manifests still throw.
RunTrace run_task(const QaTask& task, const VideoInput& video, const PipelineConfig& config,
                  const PipelineBackends& backends, const PromptTemplates& templates);

// Runs tasks with up to `parallelism` workers; the result order matches
// `tasks`. A task whose video is missing yields an error trace.
std::vector<RunTrace> run_batch(std::span<const QaTask> tasks, const std::map<std::string, VideoInput>& videos,
                                const PipelineConfig& config, const PipelineBackends& backends,
                                const PromptTemplates& templates, std::size_t parallelism);

}  // namespace masr
