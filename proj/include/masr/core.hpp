#pragma once

// Shared domain types. Everything here is a plain value type; behavior is
// limited to invariant validation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace masr {

// Ordinal in the sampled-frame index space 0..T'-1 of one video.
using FrameIndex = std::size_t;

struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

// Closest rational with a bounded denominator (continued fractions).
Rational rational_from_double(double value, std::int64_t max_den = 1000000);

struct FrameRecord {
  FrameIndex index = 0;
  std::string image_ref;  // relative to the video's frames root
  double timestamp_s = 0.0;

  bool operator==(const FrameRecord&) const = default;
};

struct FrameManifest {
  std::string video_id;
  std::vector<FrameRecord> frames;
  Rational sample_fps{1, 1};
  std::optional<double> source_duration_s;
  std::optional<int> image_width;
  std::optional<int> image_height;

  std::size_t frame_count() const { return frames.size(); }
  bool operator==(const FrameManifest&) const = default;
};

// Throws Error{EmptyManifest | IndexGap | NonMonotonicTimestamps | InvalidFps}.
const FrameManifest& validate_manifest(const FrameManifest& manifest);

class FeatureVector {
 public:
  FeatureVector() = default;
  // Throws InvalidArgument on empty or non-finite input, and when `unit` is
  // claimed for a vector whose norm is not within 1e-6 of one.
  explicit FeatureVector(std::vector<double> values, bool unit = false);

  static FeatureVector normalized(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  bool is_unit() const { return unit_; }
  double norm() const;

  bool operator==(const FeatureVector&) const = default;

 private:
  std::vector<double> values_;
  bool unit_ = false;
};

struct Clip {
  FrameIndex start = 0;
  FrameIndex end = 0;  // inclusive
  std::optional<FrameIndex> center;

  bool contains(FrameIndex i) const { return start <= i && i <= end; }
  std::size_t length() const { return end - start + 1; }
  bool same_span(const Clip& o) const { return start == o.start && end == o.end; }
  bool operator==(const Clip&) const = default;
};

// Throws OutOfRange when the clip does not fit in a timeline of `horizon`
// frames or its center lies outside it.
void validate_clip(const Clip& clip, std::size_t horizon);

struct QaTask {
  std::string task_id;
  std::string video_id;
  std::string question;
  std::vector<std::string> options;
  std::optional<std::size_t> gold_index;

  bool operator==(const QaTask&) const = default;
};

// Options are presented as letters, so at most 26 are supported.
void validate_task(const QaTask& task);

struct CaptionRecord {
  FrameIndex frame_index = 0;
  std::string text;
  std::string model_id;

  bool operator==(const CaptionRecord&) const = default;
};

// Accumulated frame-caption evidence. One entry per frame, iterated in
// ascending frame order, never evicted.
class ContextLedger {
 public:
  struct Entry {
    CaptionRecord caption;
    double timestamp_s = 0.0;
    int insertion_round = 0;

    bool operator==(const Entry&) const = default;
  };

  // Returns false (and leaves the ledger untouched) when the frame is
  // already present. Throws InvalidArgument on empty caption text.
  bool insert(const CaptionRecord& caption, double timestamp_s, int round);

  bool contains(FrameIndex frame) const { return entries_.contains(frame); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<FrameIndex, Entry>& entries() const { return entries_; }

  bool operator==(const ContextLedger&) const = default;

 private:
  std::map<FrameIndex, Entry> entries_;
};

struct Verdict {
  std::size_t answer_index = 0;
  int confidence = 1;  // 1..3, 3 means the evidence suffices
  std::string rationale;

  bool operator==(const Verdict&) const = default;
};

inline constexpr int kConfidentScore = 3;

// Dilated expansion: wn windows spaced w frames apart, each holding s frames
// spaced r apart.
struct DteParams {
  int wn = 3;
  int w = 6;
  int s = 3;
  int r = 2;

  void validate() const;  // throws InvalidArgument
  bool operator==(const DteParams&) const = default;
};

namespace dte_presets {
// 1 FPS datasets (EgoSchema, NExT-QA, IntentQA).
inline constexpr DteParams standard() { return {3, 6, 3, 2}; }
// Long Video-MME split.
inline constexpr DteParams video_mme_long() { return {3, 6, 5, 1}; }
// Cheap bootstrap expansion of cluster centers.
inline constexpr DteParams round_zero() { return {1, 0, 3, 2}; }
// Expansion disabled: each anchor maps to itself.
inline constexpr DteParams identity() { return {1, 0, 1, 1}; }
}  // namespace dte_presets

}  // namespace masr
