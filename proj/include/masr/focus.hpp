#pragma once

// Coarse-to-fine relevance sensing: the reflector picks candidate clips,
// then frame embeddings narrow each chosen clip to its most query-similar
// frame.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "masr/backends/interfaces.hpp"
#include "masr/core.hpp"
#include "masr/reflector.hpp"

namespace masr {

struct FocusParams {
  std::size_t k_v = 90;  // frames kept as query-relevant candidates
  std::size_t k_f = 3;   // max clips focused per round
  std::size_t k_c = 4;   // max clips the coarse selector may return

  void validate() const;  // throws InvalidArgument
  bool operator==(const FocusParams&) const = default;
};

struct FocusEntry {
  Clip clip;
  FrameIndex frame_index = 0;
  double similarity = 0.0;

  bool operator==(const FocusEntry&) const = default;
};

// Sorted by descending similarity (ties: lower frame index), unique frames.
struct FocusSet {
  std::vector<FocusEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  std::vector<FrameIndex> frames() const;
  bool operator==(const FocusSet&) const = default;
};

// Throws DimMismatch, ZeroVector.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

// Returns nullptr when a frame has no embedding.
using FeatureLookup = std::function<const FeatureVector*(FrameIndex)>;

FeatureLookup lookup_dense(std::span<const FeatureVector> per_frame);
FeatureLookup lookup_map(const std::map<FrameIndex, FeatureVector>& per_frame);

// Fine focusing over the candidate clips:
//  1. similarity of every candidate frame to the query;
//  2. the global top-k_v frames (ties: lower index);
//  3. per-clip count of top-k_v members;
//  4. top-k_f clips by count (ties: higher in-clip max similarity, earlier
//     start, earlier end); clips with zero members are never chosen;
//  5. each chosen clip contributes its best frame not already emitted.
// Duplicate clip spans in the input are ignored after the first.
// Throws EmptyCandidates, MissingFeature, OutOfRange.
FocusSet fine_focus(std::span<const Clip> candidate_clips, const FeatureLookup& frame_features,
                    const FeatureVector& query_feature, const FocusParams& params);

// Ablation stand-in for fine focusing: the midpoint of each of the first k_f
// clips, without consulting embeddings.
FocusSet focus_clip_midpoints(std::span<const Clip> candidate_clips, const FocusParams& params);

struct SelectionOutcome {
  std::vector<std::size_t> clip_ids;  // indices into the clip inventory
  std::vector<Clip> clips;
  std::string reason;
  int exchanges = 0;
  std::vector<std::string> warnings;
};

// Asks the reflector which clips to inspect next. Invalid and duplicate ids
// are dropped with a warning; ids beyond k_c are truncated. Unparseable
// replies are re-prompted twice before UnparseableSelection. A reply naming
// no valid clip raises EmptySelection (callers fall back to all clips).
// Requires a non-empty ledger.
SelectionOutcome coarse_select(const QaTask& task, const ContextLedger& ledger, std::span<const Clip> all_clips,
                               const FrameManifest& manifest, std::size_t k_c, ChatBackend& chat,
                               const PromptTemplates& templates);

}  // namespace masr
