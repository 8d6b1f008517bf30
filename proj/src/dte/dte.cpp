#include "masr/dte.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

#include "masr/errors.hpp"
#include "masr/focus.hpp"

namespace masr {

std::vector<FrameIndex> expand(FrameIndex n, const DteParams& params, std::size_t horizon) {
  params.validate();
  if (n >= horizon) {
    throw Error(ErrorKind::OutOfRange,
                "anchor " + std::to_string(n) + " outside horizon " + std::to_string(horizon));
  }
  const auto last = static_cast<std::int64_t>(horizon) - 1;
  const int half_windows = params.wn / 2;
  const int half_span = params.s / 2;

  std::vector<FrameIndex> out;
  out.reserve(static_cast<std::size_t>(params.wn) * static_cast<std::size_t>(params.s));
  for (int k = -half_windows; k <= half_windows; ++k) {
    for (int i = -half_span; i <= half_span; ++i) {
      const std::int64_t raw = static_cast<std::int64_t>(n) + static_cast<std::int64_t>(k) * params.w +
                               static_cast<std::int64_t>(i) * params.r;
      out.push_back(static_cast<FrameIndex>(std::clamp<std::int64_t>(raw, 0, last)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<FrameIndex> expand_all(std::span<const FrameIndex> anchors, const DteParams& params,
                                   std::size_t horizon) {
  if (anchors.empty()) throw Error(ErrorKind::InvalidArgument, "no frames to expand");
  std::vector<FrameIndex> out;
  for (FrameIndex a : anchors) {
    const auto part = expand(a, params, horizon);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<FrameIndex> expand_all(const FocusSet& focus, const DteParams& params, std::size_t horizon) {
  std::vector<FrameIndex> anchors;
  anchors.reserve(focus.entries.size());
  for (const auto& e : focus.entries) anchors.push_back(e.frame_index);
  return expand_all(anchors, params, horizon);
}

}  // namespace masr
