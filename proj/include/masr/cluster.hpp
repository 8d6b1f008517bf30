#pragma once

// Initialization stage: k-means over per-frame features, snapped to medoid
// frames, then the timeline is cut at the sorted centers into N+1 clips.

#include <cstdint>
#include <span>
#include <vector>

#include "masr/core.hpp"

namespace masr {

struct KMeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;  // max L2 movement of any centroid
};

struct ClusteringResult {
  std::vector<FrameIndex> center_indices;  // sorted ascending, size N
  std::vector<Clip> clips;                 // size N+1, tiling [0, T'-1]
  // assignments[i] is the cluster id of frame i; cluster id k owns
  // center_indices[k].
  std::vector<std::size_t> assignments;

  bool operator==(const ClusteringResult&) const = default;
};

// Throws TooFewFrames, DimMismatch, InvalidArgument (n_clusters == 0).
ClusteringResult cluster_frames(std::span<const FeatureVector> features, std::size_t n_clusters,
                                std::uint64_t seed, const KMeansOptions& options = {});

// Ordinal of the member nearest `centroid` in L2; ties go to the lower
// ordinal, so callers list members in ascending frame order.
// Throws EmptyCluster, DimMismatch.
std::size_t medoid_of(std::span<const std::span<const double>> members, std::span<const double> centroid);

// [0,c1], [c1,c2], ..., [cN, T'-1]. Centers must be sorted, unique and < horizon.
std::vector<Clip> clips_from_centers(std::span<const FrameIndex> centers, std::size_t horizon);

// min(8, max(1, floor(sqrt(T'/4)))), never more than T'.
std::size_t default_cluster_count(std::size_t frame_count);

}  // namespace masr
