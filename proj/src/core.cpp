#include "smsloc/core.hpp"

#include <algorithm>

namespace smsloc {

std::string to_string(const Window& w) {
  return "[" + std::to_string(w.start) + "," + std::to_string(w.end) + "]";
}

int overlap_length(const Window& a, const Window& b) noexcept {
  return std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start) + 1);
}

double iou(const Window& a, const Window& b) noexcept {
  const int inter = overlap_length(a, b);
  const int uni = a.length() + b.length() - inter;
  return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

int delta(const Window& a, const Window& b) noexcept {
  return a.length() + b.length() - 2 * overlap_length(a, b);
}

}  // namespace smsloc
