#pragma once

// Independent brute-force reference implementations used by the unit and
// acceptance suites.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "masr/cluster.hpp"
#include "masr/focus.hpp"

namespace masr::oracle {

inline std::vector<FrameIndex> dte(long long n, int wn, int w, int s, int r, long long horizon) {
  std::set<long long> out;
  for (long long k = -(wn / 2); k <= wn / 2; ++k) {
    for (long long i = -(s / 2); i <= s / 2; ++i) {
      long long raw = n + k * w + i * r;
      if (raw < 0) raw = 0;
      if (raw > horizon - 1) raw = horizon - 1;
      out.insert(raw);
    }
  }
  return {out.begin(), out.end()};
}

inline double cosine(const FeatureVector& a, const FeatureVector& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += static_cast<long double>(a.values()[i]) * b.values()[i];
    na += static_cast<long double>(a.values()[i]) * a.values()[i];
    nb += static_cast<long double>(b.values()[i]) * b.values()[i];
  }
  return static_cast<double>(dot / std::sqrt(na * nb));
}

// Steps: similarities, global top-k_v by rank counting, per-clip counts,
// repeated linear-scan selection of the best remaining clip, per-clip argmax
// over frames not yet emitted, final ordering by similarity then index.
inline FocusSet fine_focus(const std::vector<Clip>& candidates, const std::vector<FeatureVector>& features,
                           const FeatureVector& query, std::size_t k_v, std::size_t k_f) {
  std::vector<Clip> clips;
  for (const Clip& c : candidates) {
    bool dup = false;
    for (const Clip& o : clips) dup = dup || (o.start == c.start && o.end == c.end);
    if (!dup) clips.push_back(Clip{c.start, c.end, std::nullopt});
  }
  std::vector<bool> candidate_frame(features.size(), false);
  for (const Clip& c : clips) {
    for (FrameIndex i = c.start; i <= c.end; ++i) candidate_frame[i] = true;
  }
  std::vector<double> sim(features.size(), 0.0);
  for (FrameIndex i = 0; i < features.size(); ++i) {
    if (candidate_frame[i]) sim[i] = cosine_similarity(features[i], query);
  }
  const auto better = [&](FrameIndex a, FrameIndex b) { return sim[a] > sim[b] || (sim[a] == sim[b] && a < b); };
  std::vector<bool> top(features.size(), false);
  for (FrameIndex i = 0; i < features.size(); ++i) {
    if (!candidate_frame[i]) continue;
    std::size_t rank = 0;
    for (FrameIndex j = 0; j < features.size(); ++j) rank += (candidate_frame[j] && better(j, i)) ? 1 : 0;
    top[i] = rank < k_v;
  }
  std::vector<std::size_t> count(clips.size(), 0);
  std::vector<double> best(clips.size(), -2.0);
  for (std::size_t c = 0; c < clips.size(); ++c) {
    for (FrameIndex i = clips[c].start; i <= clips[c].end; ++i) {
      count[c] += top[i] ? 1 : 0;
      best[c] = std::max(best[c], sim[i]);
    }
  }
  const auto clip_better = [&](std::size_t a, std::size_t b) {
    if (count[a] != count[b]) return count[a] > count[b];
    if (best[a] != best[b]) return best[a] > best[b];
    if (clips[a].start != clips[b].start) return clips[a].start < clips[b].start;
    return clips[a].end < clips[b].end;
  };
  std::vector<bool> taken(clips.size(), false);
  std::vector<bool> emitted(features.size(), false);
  FocusSet out;
  for (std::size_t round = 0; round < k_f; ++round) {
    std::optional<std::size_t> pick;
    for (std::size_t c = 0; c < clips.size(); ++c) {
      if (taken[c] || count[c] == 0) continue;
      if (!pick || clip_better(c, *pick)) pick = c;
    }
    if (!pick) break;
    taken[*pick] = true;
    std::optional<FrameIndex> arg;
    for (FrameIndex i = clips[*pick].start; i <= clips[*pick].end; ++i) {
      if (emitted[i]) continue;
      if (!arg || better(i, *arg)) arg = i;
    }
    if (!arg) continue;
    emitted[*arg] = true;
    out.entries.push_back(FocusEntry{Clip{clips[*pick].start, clips[*pick].end, *arg}, *arg, sim[*arg]});
  }
  // Insertion sort keeps this independent of the library's comparator.
  for (std::size_t i = 1; i < out.entries.size(); ++i) {
    for (std::size_t j = i; j > 0; --j) {
      const auto& a = out.entries[j - 1];
      const auto& b = out.entries[j];
      const bool swap = b.similarity > a.similarity || (b.similarity == a.similarity && b.frame_index < a.frame_index);
      if (!swap) break;
      std::swap(out.entries[j - 1], out.entries[j]);
    }
  }
  return out;
}

// Empty string when the clustering result satisfies the structural
// invariants, otherwise a description of the first violation.
inline std::string clustering_violation(const ClusteringResult& r, std::size_t horizon) {
  const auto& c = r.center_indices;
  if (r.clips.size() != c.size() + 1) return "clip count != centers + 1";
  if (r.assignments.size() != horizon) return "assignment count != frame count";
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i - 1] >= c[i]) return "centers not strictly ascending";
  }
  if (r.clips.front().start != 0) return "first clip does not start at 0";
  if (r.clips.back().end != horizon - 1) return "last clip does not end at T'-1";
  for (std::size_t i = 1; i < r.clips.size(); ++i) {
    if (r.clips[i].start != r.clips[i - 1].end) return "consecutive clips do not share a boundary";
    if (r.clips[i].start != c[i - 1]) return "clip boundary is not a center";
  }
  for (const auto& clip : r.clips) {
    if (clip.start > clip.end) return "clip with start > end";
  }
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] >= horizon) return "center out of range";
    if (r.assignments[c[k]] != k) return "center is not a member of its own cluster";
  }
  return {};
}

}  // namespace masr::oracle
