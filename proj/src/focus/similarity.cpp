#include <cmath>

#include "masr/errors.hpp"
#include "masr/focus.hpp"

namespace masr {

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimMismatch,
                "cosine of dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  const auto x = a.values();
  const auto y = b.values();
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0.0 || yy == 0.0) throw Error(ErrorKind::ZeroVector, "cosine with a zero vector");
  const double c = dot / (std::sqrt(xx) * std::sqrt(yy));
  return std::clamp(c, -1.0, 1.0);
}

FeatureLookup lookup_dense(std::span<const FeatureVector> per_frame) {
  return [per_frame](FrameIndex i) -> const FeatureVector* {
    return i < per_frame.size() ? &per_frame[i] : nullptr;
  };
}

FeatureLookup lookup_map(const std::map<FrameIndex, FeatureVector>& per_frame) {
  return [&per_frame](FrameIndex i) -> const FeatureVector* {
    const auto it = per_frame.find(i);
    return it == per_frame.end() ? nullptr : &it->second;
  };
}

}  // namespace masr
