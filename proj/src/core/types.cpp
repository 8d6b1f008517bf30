#include <cmath>
#include <sstream>

#include "masr/core.hpp"
#include "masr/errors.hpp"

namespace masr {

Rational rational_from_double(double value, std::int64_t max_den) {
  if (!std::isfinite(value)) throw Error(ErrorKind::InvalidFps, "non-finite rate");
  // Standard continued-fraction convergents, stopping once the denominator
  // bound would be exceeded or the approximation is exact.
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = value;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_f = std::floor(x);
    if (std::fabs(a_f) > 9e15) break;
    const auto a = static_cast<std::int64_t>(a_f);
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    const std::int64_t p2 = a * p1 + p0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = x - a_f;
    if (frac < 1e-12 || std::fabs(static_cast<double>(p1) / q1 - value) < 1e-15) break;
    x = 1.0 / frac;
  }
  if (q1 == 0) return {static_cast<std::int64_t>(value), 1};
  return {p1, q1};
}

const FrameManifest& validate_manifest(const FrameManifest& manifest) {
  if (manifest.frames.empty()) {
    throw Error(ErrorKind::EmptyManifest, "manifest '" + manifest.video_id + "' lists no frames");
  }
  if (manifest.sample_fps.den <= 0 || manifest.sample_fps.num <= 0) {
    throw Error(ErrorKind::InvalidFps, "sample_fps must be positive");
  }
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    const FrameRecord& f = manifest.frames[i];
    if (f.index != i) {
      std::ostringstream os;
      os << "manifest '" << manifest.video_id << "': expected frame index " << i << ", found "
         << f.index;
      throw Error(ErrorKind::IndexGap, os.str());
    }
    if (!std::isfinite(f.timestamp_s) || f.timestamp_s < 0.0) {
      throw Error(ErrorKind::NonMonotonicTimestamps,
                  "frame " + std::to_string(i) + " has a negative or non-finite timestamp");
    }
    if (i > 0 && f.timestamp_s < manifest.frames[i - 1].timestamp_s) {
      throw Error(ErrorKind::NonMonotonicTimestamps,
                  "timestamp decreases at frame " + std::to_string(i));
    }
  }
  return manifest;
}

FeatureVector::FeatureVector(std::vector<double> values, bool unit)
    : values_(std::move(values)), unit_(unit) {
  if (values_.empty()) throw Error(ErrorKind::InvalidArgument, "feature vector has zero dimension");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "feature vector has non-finite entry");
  }
  if (unit_ && std::fabs(norm() - 1.0) > 1e-6) {
    throw Error(ErrorKind::InvalidArgument, "vector flagged unit but norm is " + std::to_string(norm()));
  }
}

FeatureVector FeatureVector::normalized(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  const double n = std::sqrt(sq);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::ZeroVector, "cannot normalize a zero vector");
  for (double& v : values) v /= n;
  return FeatureVector(std::move(values), true);
}

double FeatureVector::norm() const {
  double sq = 0.0;
  for (double v : values_) sq += v * v;
  return std::sqrt(sq);
}

void validate_clip(const Clip& clip, std::size_t horizon) {
  if (clip.start > clip.end || clip.end >= horizon) {
    throw Error(ErrorKind::OutOfRange, "clip [" + std::to_string(clip.start) + ", " +
                                           std::to_string(clip.end) + "] outside 0.." +
                                           std::to_string(horizon));
  }
  if (clip.center && !clip.contains(*clip.center)) {
    throw Error(ErrorKind::OutOfRange, "clip center outside its bounds");
  }
}

void validate_task(const QaTask& task) {
  if (task.task_id.empty()) throw Error(ErrorKind::InvalidArgument, "task_id is empty");
  if (task.options.size() < 2 || task.options.size() > 26) {
    throw Error(ErrorKind::InvalidArgument,
                "task '" + task.task_id + "' needs between 2 and 26 options");
  }
  if (task.gold_index && *task.gold_index >= task.options.size()) {
    throw Error(ErrorKind::InvalidArgument, "task '" + task.task_id + "' gold_index " +
                                                std::to_string(*task.gold_index) + " out of range");
  }
}

bool ContextLedger::insert(const CaptionRecord& caption, double timestamp_s, int round) {
  if (caption.text.empty()) throw Error(ErrorKind::InvalidArgument, "caption text is empty");
  return entries_.try_emplace(caption.frame_index, Entry{caption, timestamp_s, round}).second;
}

void DteParams::validate() const {
  if (wn < 1 || wn % 2 == 0) throw Error(ErrorKind::InvalidArgument, "wn must be a positive odd integer");
  if (s < 1 || s % 2 == 0) throw Error(ErrorKind::InvalidArgument, "s must be a positive odd integer");
  if (r < 1) throw Error(ErrorKind::InvalidArgument, "r must be >= 1");
  if (w < 0) throw Error(ErrorKind::InvalidArgument, "w must be >= 0");
}

}  // namespace masr
