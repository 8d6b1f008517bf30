#include "masr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include "masr/backends/mock.hpp"
#include "masr/dte.hpp"
#include "masr/errors.hpp"

namespace masr {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Captions `frames` with up to `parallelism` workers. Results come back in
// input order; when several frames fail, the lowest-index failure is
// rethrown so error traces stay deterministic.
std::vector<CaptionRecord> caption_frames(const VideoInput& video, std::span<const FrameIndex> frames,
                                          Captioner& captioner, const std::string& prompt, std::size_t parallelism) {
  std::vector<std::optional<CaptionRecord>> results(frames.size());
  std::vector<std::exception_ptr> errors(frames.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < frames.size(); i = next.fetch_add(1)) {
      try {
        results[i] = captioner.caption_frame(video.image_path(frames[i]), frames[i], prompt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(parallelism, frames.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<CaptionRecord> out;
  out.reserve(frames.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

class TaskRun {
 public:
  TaskRun(const QaTask& task, const VideoInput& video, const PipelineConfig& config, const PipelineBackends& backends,
          const PromptTemplates& templates)
      : task_(task), video_(video), config_(config), backends_(backends), templates_(templates),
        chat_(*backends.chat) {}

  RunTrace run() {
    const auto started = Clock::now();
    trace_.task_id = task_.task_id;
    trace_.video_id = task_.video_id;
    trace_.config_digest = config_.digest();
    trace_.template_digests = templates_.digests();
    trace_.frame_count = video_.manifest.frame_count();

    try {
      validate_task(task_);
      validate_manifest(video_.manifest);
      if (task_.video_id != video_.manifest.video_id) {
        throw Error(ErrorKind::InvalidArgument, "task video '" + task_.video_id + "' does not match manifest '" +
                                                    video_.manifest.video_id + "'");
      }
      if (video_.manifest.sample_fps != config_.sample_fps) {
        trace_.warnings.push_back("manifest sample_fps differs from configured sample_fps");
      }
      initialize();
      execute_rounds();
    } catch (const std::exception& e) {
      if (current_) trace_.rounds.push_back(std::move(*current_));
      trace_.termination = Termination::Error;
      trace_.error = e.what();
    }

    for (auto it = trace_.rounds.rbegin(); it != trace_.rounds.rend(); ++it) {
      if (it->verdict) {
        trace_.final_answer = it->verdict->answer_index;
        trace_.final_confidence = it->verdict->confidence;
        break;
      }
    }
    trace_.elapsed_ms = ms_since(started);
    return std::move(trace_);
  }

 private:
  void initialize() {
    const std::size_t n = video_.manifest.frame_count();
    std::vector<std::filesystem::path> paths;
    paths.reserve(n);
    for (FrameIndex i = 0; i < n; ++i) paths.push_back(video_.image_path(i));
    features_ = backends_.encoder->embed_images(paths);
    if (features_.size() != n) throw Error(ErrorKind::MalformedResponse, "encoder returned the wrong vector count");
    query_ = backends_.encoder->embed_text(task_.question);

    const std::size_t k = config_.n_clusters != 0 ? config_.n_clusters : default_cluster_count(n);
    const ClusteringResult clustering = cluster_frames(features_, k, config_.seed);
    trace_.centers = clustering.center_indices;
    trace_.clips = clustering.clips;
  }

  void execute_rounds() {
    const std::size_t horizon = video_.manifest.frame_count();

    // Round 0: no context yet, so the cluster centers are the focused frames.
    begin_round(0);
    current_->focused_frames = trace_.centers;
    finish_round(expand_all(trace_.centers, config_.dte_round0, horizon));

    for (int round = 1; round < config_.max_rounds && !confident(); ++round) {
      begin_round(round);
      const int selection_before = chat_.selection_calls();
      std::vector<Clip> candidates;
      try {
        auto sel = coarse_select(task_, ledger_, trace_.clips, video_.manifest, config_.focus.k_c, chat_, templates_);
        candidates = std::move(sel.clips);
        append(current_->warnings, sel.warnings);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptySelection && e.kind() != ErrorKind::UnparseableSelection) throw;
        current_->selection_fallback = true;
        current_->warnings.push_back(std::string("selection fell back to all clips: ") + e.what());
        candidates = trace_.clips;
      }
      current_->selection_exchanges = chat_.selection_calls() - selection_before;
      current_->selected_clips = candidates;

      FocusSet focus = config_.fine_focus ? fine_focus(candidates, lookup_dense(features_), query_, config_.focus)
                                          : focus_clip_midpoints(candidates, config_.focus);
      current_->focused_frames = focus.frames();
      current_->focus = std::move(focus);
      finish_round(expand_all(current_->focus, config_.dte_main, horizon));
    }
    trace_.termination = confident() ? Termination::Confident : Termination::RoundBudget;
  }

  void begin_round(int round) {
    current_.emplace();
    current_->round = round;
    current_->chat_model = chat_.model_id();
    round_started_ = Clock::now();
  }

  void finish_round(std::vector<FrameIndex> expanded) {
    RoundRecord& r = *current_;
    r.expanded_frames = std::move(expanded);
    std::vector<FrameIndex> fresh;
    for (FrameIndex i : r.expanded_frames) {
      if (!ledger_.contains(i)) fresh.push_back(i);
    }
    r.new_captions = caption_frames(video_, fresh, *backends_.captioner, templates_.caption, config_.caption_parallelism);
    for (const auto& c : r.new_captions) {
      ledger_.insert(c, video_.manifest.frames[c.frame_index].timestamp_s, r.round);
    }
    r.ledger_size = ledger_.size();

    const int answers_before = chat_.verdict_calls();
    GradedVerdict graded = answer_and_grade(task_, ledger_, chat_, templates_);
    r.answer_exchanges = chat_.verdict_calls() - answers_before;
    r.verdict = graded.verdict;
    append(r.warnings, graded.warnings);
    r.elapsed_ms = ms_since(round_started_);
    trace_.rounds.push_back(std::move(r));
    current_.reset();
  }

  bool confident() const {
    return !trace_.rounds.empty() && trace_.rounds.back().verdict &&
           trace_.rounds.back().verdict->confidence == kConfidentScore;
  }

  static void append(std::vector<std::string>& into, const std::vector<std::string>& from) {
    into.insert(into.end(), from.begin(), from.end());
  }

  const QaTask& task_;
  const VideoInput& video_;
  const PipelineConfig& config_;
  const PipelineBackends& backends_;
  const PromptTemplates& templates_;
  CountingChat chat_;

  RunTrace trace_;
  ContextLedger ledger_;
  std::vector<FeatureVector> features_;
  FeatureVector query_;
  std::optional<RoundRecord> current_;
  Clock::time_point round_started_;
};

}  // namespace

RunTrace run_task(const QaTask& task, const VideoInput& video, const PipelineConfig& config,
                  const PipelineBackends& backends, const PromptTemplates& templates) {
  config.validate();
  if (!backends.chat || !backends.captioner || !backends.encoder) {
    throw Error(ErrorKind::ConfigError, "pipeline needs chat, captioner and encoder backends");
  }
  return TaskRun(task, video, config, backends, templates).run();
}

std::vector<RunTrace> run_batch(std::span<const QaTask> tasks, const std::map<std::string, VideoInput>& videos,
                                const PipelineConfig& config, const PipelineBackends& backends,
                                const PromptTemplates& templates, std::size_t parallelism) {
  if (parallelism < 1) throw Error(ErrorKind::ConfigError, "parallelism must be >= 1");
  config.validate();
  std::vector<RunTrace> traces(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const QaTask& task = tasks[i];
      const auto video = videos.find(task.video_id);
      if (video == videos.end()) {
        RunTrace t;
        t.task_id = task.task_id;
        t.video_id = task.video_id;
        t.config_digest = config.digest();
        t.template_digests = templates.digests();
        t.termination = Termination::Error;
        t.error = Error(ErrorKind::MissingManifest, "no manifest for video '" + task.video_id + "'").what();
        traces[i] = std::move(t);
        continue;
      }
      traces[i] = run_task(task, video->second, config, backends, templates);
    }
  };
  const std::size_t n_threads = std::min(parallelism, std::max<std::size_t>(1, tasks.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  return traces;
}

}  // namespace masr
