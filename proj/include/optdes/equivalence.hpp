#pragma once

#include "optdes/design.hpp"
#include "optdes/prior.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace optdes {

// How the design region is searched for the minimum of psi.
//
// Boxes of dimension <= tensor_max_dim are scanned on a full tensor grid with
// the given step (x_1 varying fastest). Larger boxes use lds_points
// randomly-shifted Halton points plus the 3^d lattice when it fits, followed
// by coordinate descent from the refine_starts best points.
struct GridSpec {
  double step = 0.01;
  std::size_t tensor_max_dim = 2;
  std::size_t lds_points = 4096;
  std::size_t refine_starts = 16;
  std::uint64_t seed = 0x5eed;
  // Window for an unbounded axis; derived from the weights when empty.
  std::optional<Interval> unbounded_window;
  // Absolute tolerance on min psi; 0 selects 1e-3 * p.
  double tolerance = 0.0;
  // Keep every evaluated point in the report (for plotting).
  bool keep_grid = true;
};

struct EquivalenceReport {
  double min_psi = 0.0;
  Point argmin;
  bool is_optimal = false;
  double tolerance = 0.0;
  std::vector<Point> grid;
  std::vector<double> psi;
};

inline double default_equivalence_tolerance(std::size_t p) { return 1e-3 * static_cast<double>(p); }

// Points of a tensor grid over `box` with x_1 varying fastest.
std::vector<Point> tensor_grid(const std::vector<Interval>& box, double step);

// Minimises `psi` over `box` per `grid`. Points for which `skip` returns true
// are not evaluated (used to exploit symmetry). Ties keep the lowest index.
EquivalenceReport scan_minimum(const std::vector<Interval>& box, const GridSpec& grid, std::size_t p,
                               const std::function<double(const Point&)>& psi,
                               const std::function<bool(const Point&)>& skip = {});

// Axis ranges searched for `model`, resolving an unbounded axis to the window
// where u >= 1e-6 max u (over all draws), widened by 20%.
std::vector<Interval> search_box(const ModelSpec& model, const ParameterSample& sample,
                                 const GridSpec& grid, const ContinuousDesign* design = nullptr);

EquivalenceReport equivalence_check(const ContinuousDesign& design, const ModelSpec& model,
                                    const ParameterSample& sample, const GridSpec& grid = {});
EquivalenceReport equivalence_check(const ContinuousDesign& design, const ModelSpec& model,
                                    const Prior& prior, const SampleSpec& spec, const GridSpec& grid = {});

}  // namespace optdes
