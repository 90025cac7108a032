#pragma once

#include <algorithm>
#include <random>

namespace smsloc {

template <typename Rng>
Window jitter_boundaries(const Window& gt, Rng& rng) {
  // Width of the 10% boundary zones, at least one frame.
  const int zone = std::max(1, gt.length() / 10);
  std::uniform_int_distribution<int> offset(0, zone - 1);
  Window out{gt.start + offset(rng), gt.end - offset(rng)};
  if (out.length() < 2) return gt;
  return out;
}

}  // namespace smsloc
