#pragma once

#include "optdes/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace optdes {

struct Interval {
  double lower = 0.0;
  double upper = 1.0;

  double width() const { return upper - lower; }
  double midpoint() const { return 0.5 * (lower + upper); }
  bool operator==(const Interval&) const = default;
};

// Product of closed intervals, optionally with one axis ranging over the
// whole real line.
class DesignRegion {
 public:
  DesignRegion() = default;
  explicit DesignRegion(std::vector<Interval> bounds,
                        std::optional<std::size_t> unbounded_axis = std::nullopt);

  static DesignRegion cube(std::size_t k, double lower, double upper);

  std::size_t dimension() const { return bounds_.size(); }
  const std::vector<Interval>& bounds() const { return bounds_; }
  const Interval& bound(std::size_t j) const { return bounds_[j]; }
  std::optional<std::size_t> unbounded_axis() const { return unbounded_axis_; }
  bool is_bounded() const { return !unbounded_axis_.has_value(); }
  bool is_unbounded(std::size_t j) const { return unbounded_axis_ && *unbounded_axis_ == j; }

  bool contains(const Point& x, double tol = 1e-9) const;
  Point clamp(const Point& x) const;

  // Coordinates divided by the axis widths (unbounded axes left as is).
  Point scaled(const Point& x) const;

  bool operator==(const DesignRegion&) const = default;

 private:
  std::vector<Interval> bounds_;
  std::optional<std::size_t> unbounded_axis_;
};

}  // namespace optdes
