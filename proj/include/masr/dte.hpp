#pragma once

// Dilated temporal expansion of focused frames over the sampled timeline.

#include <span>
#include <vector>

#include "masr/core.hpp"

namespace masr {

struct FocusSet;

// All n + k*w + i*r for k in [-wn/2, wn/2], i in [-s/2, s/2], clamped to
// [0, horizon-1], deduplicated, ascending. Always contains n.
// Throws OutOfRange when n >= horizon, InvalidArgument on bad params.
std::vector<FrameIndex> expand(FrameIndex n, const DteParams& params, std::size_t horizon);

// Union of expand() over every anchor. Throws InvalidArgument on an empty
// anchor list.
std::vector<FrameIndex> expand_all(std::span<const FrameIndex> anchors, const DteParams& params,
                                   std::size_t horizon);
std::vector<FrameIndex> expand_all(const FocusSet& focus, const DteParams& params, std::size_t horizon);

}  // namespace masr
