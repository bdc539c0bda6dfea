#include "optdes/region.hpp"

#include "optdes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace optdes {

DesignRegion::DesignRegion(std::vector<Interval> bounds,
                           std::optional<std::size_t> unbounded_axis)
    : bounds_(std::move(bounds)), unbounded_axis_(unbounded_axis) {
  if (bounds_.empty()) throw ValidationError("design region needs at least one axis");
  if (unbounded_axis_ && *unbounded_axis_ >= bounds_.size())
    throw ValidationError("unbounded axis index out of range");
  for (std::size_t j = 0; j < bounds_.size(); ++j) {
    if (is_unbounded(j)) {
      bounds_[j] = {-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
      continue;
    }
    const auto& b = bounds_[j];
    if (!(std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower < b.upper))
      throw ValidationError("design region axis " + std::to_string(j + 1) +
                            " requires finite lower < upper");
  }
}

DesignRegion DesignRegion::cube(std::size_t k, double lower, double upper) {
  return DesignRegion(std::vector<Interval>(k, Interval{lower, upper}));
}

bool DesignRegion::contains(const Point& x, double tol) const {
  if (static_cast<std::size_t>(x.size()) != bounds_.size()) return false;
  for (std::size_t j = 0; j < bounds_.size(); ++j) {
    if (!std::isfinite(x[j])) return false;
    if (is_unbounded(j)) continue;
    const double slack = tol * std::max(1.0, bounds_[j].width());
    if (x[j] < bounds_[j].lower - slack || x[j] > bounds_[j].upper + slack) return false;
  }
  return true;
}

Point DesignRegion::clamp(const Point& x) const {
  Point out = x;
  for (std::size_t j = 0; j < bounds_.size(); ++j) {
    if (is_unbounded(j)) continue;
    out[j] = std::clamp(x[j], bounds_[j].lower, bounds_[j].upper);
  }
  return out;
}

Point DesignRegion::scaled(const Point& x) const {
  Point out = x;
  for (std::size_t j = 0; j < bounds_.size(); ++j)
    if (!is_unbounded(j)) out[j] = x[j] / bounds_[j].width();
  return out;
}

}  // namespace optdes
