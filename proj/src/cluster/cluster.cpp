#include "masr/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "masr/errors.hpp"

namespace masr {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

// Uniform double in [0, 1) built from the top 53 bits, so results do not
// depend on the standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class KMeans {
 public:
  KMeans(std::span<const FeatureVector> features, std::size_t k, std::uint64_t seed)
      : features_(features), k_(k), dim_(features.front().dim()), rng_(seed) {}

  void seed_plus_plus() {
    const std::size_t n = features_.size();
    centroids_.assign(k_, std::vector<double>(dim_, 0.0));
    std::vector<bool> chosen(n, false);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

    std::size_t first = static_cast<std::size_t>(unit_uniform(rng_) * static_cast<double>(n));
    first = std::min(first, n - 1);
    place(0, first, chosen, nearest);

    for (std::size_t c = 1; c < k_; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : nearest[i];
      std::size_t pick = n;
      if (total > 0.0) {
        const double target = unit_uniform(rng_) * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (chosen[i] || nearest[i] <= 0.0) continue;
          acc += nearest[i];
          pick = i;
          if (acc > target) break;
        }
      }
      if (pick == n) {
        // Every remaining point coincides with a chosen center.
        pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
      }
      place(c, pick, chosen, nearest);
    }
  }

  void run(const KMeansOptions& options) {
    assignments_.assign(features_.size(), 0);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
      assign();
      repair_empty_clusters();
      const double shift = update();
      if (shift <= options.tolerance) break;
    }
    assign();
    repair_empty_clusters();
  }

  const std::vector<std::size_t>& assignments() const { return assignments_; }
  const std::vector<double>& centroid(std::size_t c) const { return centroids_[c]; }

 private:
  void place(std::size_t c, std::size_t point, std::vector<bool>& chosen, std::vector<double>& nearest) {
    const auto v = features_[point].values();
    centroids_[c].assign(v.begin(), v.end());
    chosen[point] = true;
    for (std::size_t i = 0; i < features_.size(); ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(features_[i].values(), centroids_[c]));
    }
  }

  void assign() {
    for (std::size_t i = 0; i < features_.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < k_; ++c) {
        const double d = squared_distance(features_[i].values(), centroids_[c]);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      assignments_[i] = best_c;
    }
  }

  // Gives each empty cluster the point farthest from its own centroid among
  // clusters that would stay non-empty, then recenters on that point.
  void repair_empty_clusters() {
    std::vector<std::size_t> sizes(k_, 0);
    for (std::size_t a : assignments_) ++sizes[a];
    for (std::size_t c = 0; c < k_; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t donor = features_.size();
      double worst = -1.0;
      for (std::size_t i = 0; i < features_.size(); ++i) {
        const std::size_t a = assignments_[i];
        if (sizes[a] < 2) continue;
        const double d = squared_distance(features_[i].values(), centroids_[a]);
        if (d > worst) {
          worst = d;
          donor = i;
        }
      }
      --sizes[assignments_[donor]];
      assignments_[donor] = c;
      sizes[c] = 1;
      const auto v = features_[donor].values();
      centroids_[c].assign(v.begin(), v.end());
    }
  }

  double update() {
    std::vector<std::vector<double>> sums(k_, std::vector<double>(dim_, 0.0));
    std::vector<std::size_t> counts(k_, 0);
    for (std::size_t i = 0; i < features_.size(); ++i) {
      const auto v = features_[i].values();
      auto& s = sums[assignments_[i]];
      for (std::size_t d = 0; d < dim_; ++d) s[d] += v[d];
      ++counts[assignments_[i]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k_; ++c) {
      for (double& x : sums[c]) x /= static_cast<double>(counts[c]);
      shift = std::max(shift, std::sqrt(squared_distance(sums[c], centroids_[c])));
      centroids_[c] = std::move(sums[c]);
    }
    return shift;
  }

  std::span<const FeatureVector> features_;
  std::size_t k_;
  std::size_t dim_;
  std::mt19937_64 rng_;
  std::vector<std::vector<double>> centroids_;
  std::vector<std::size_t> assignments_;
};

}  // namespace

std::size_t medoid_of(std::span<const std::span<const double>> members, std::span<const double> centroid) {
  if (members.empty()) throw Error(ErrorKind::EmptyCluster, "cluster has no members");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].size() != centroid.size()) throw Error(ErrorKind::DimMismatch, "member/centroid dims differ");
    const double d = squared_distance(members[i], centroid);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<Clip> clips_from_centers(std::span<const FrameIndex> centers, std::size_t horizon) {
  if (horizon == 0) throw Error(ErrorKind::EmptyManifest, "empty timeline");
  std::vector<Clip> clips;
  clips.reserve(centers.size() + 1);
  FrameIndex prev = 0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const FrameIndex c = centers[i];
    if (c >= horizon || (i > 0 && c <= centers[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "centers must be sorted, unique and inside the timeline");
    }
    clips.push_back(Clip{prev, c, std::nullopt});
    prev = c;
  }
  clips.push_back(Clip{prev, horizon - 1, std::nullopt});
  return clips;
}

std::size_t default_cluster_count(std::size_t frame_count) {
  const auto root = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(frame_count) / 4.0)));
  return std::min({std::size_t{8}, std::max<std::size_t>(1, root), std::max<std::size_t>(1, frame_count)});
}

ClusteringResult cluster_frames(std::span<const FeatureVector> features, std::size_t n_clusters,
                                std::uint64_t seed, const KMeansOptions& options) {
  if (n_clusters == 0) throw Error(ErrorKind::InvalidArgument, "n_clusters must be >= 1");
  if (features.size() < n_clusters) {
    throw Error(ErrorKind::TooFewFrames, std::to_string(features.size()) + " frames for " +
                                             std::to_string(n_clusters) + " clusters");
  }
  const std::size_t dim = features.front().dim();
  for (const auto& f : features) {
    if (f.dim() != dim) throw Error(ErrorKind::DimMismatch, "feature dims differ within one video");
  }

  KMeans km(features, n_clusters, seed);
  km.seed_plus_plus();
  km.run(options);

  std::vector<std::vector<std::span<const double>>> members(n_clusters);
  std::vector<std::vector<FrameIndex>> member_frames(n_clusters);
  for (std::size_t i = 0; i < features.size(); ++i) {
    members[km.assignments()[i]].push_back(features[i].values());
    member_frames[km.assignments()[i]].push_back(i);
  }

  std::vector<FrameIndex> medoids(n_clusters);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    medoids[c] = member_frames[c][medoid_of(members[c], km.centroid(c))];
  }

  // Relabel so cluster id k owns the k-th smallest center.
  std::vector<std::size_t> order(n_clusters);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return medoids[a] < medoids[b]; });
  std::vector<std::size_t> relabel(n_clusters);
  for (std::size_t k = 0; k < n_clusters; ++k) relabel[order[k]] = k;

  ClusteringResult result;
  for (std::size_t k = 0; k < n_clusters; ++k) result.center_indices.push_back(medoids[order[k]]);
  result.assignments.reserve(features.size());
  for (std::size_t a : km.assignments()) result.assignments.push_back(relabel[a]);
  result.clips = clips_from_centers(result.center_indices, features.size());
  return result;
}

}  // namespace masr
