#pragma once

#include "optdes/glm.hpp"
#include "optdes/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace optdes {

// Probability measure with finite support on the design region.
struct ContinuousDesign {
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  std::size_t k() const { return points.empty() ? 0 : static_cast<std::size_t>(points.front().size()); }

  // Positive weights summing to one (to 1e-12) and points inside the region.
  void validate(const DesignRegion& region) const;
};

// n trials with integer replications at each support point.
struct ExactDesign {
  std::vector<Point> points;
  std::vector<int> reps;

  std::size_t size() const { return points.size(); }
  int n() const;
  ContinuousDesign as_continuous() const;
  void validate(const DesignRegion& region) const;
};

// Largest support an optimal locally D-optimal design ever needs.
constexpr std::size_t caratheodory_bound(std::size_t p) { return p * (p + 1) / 2 + 1; }

// Relative pivot threshold below which a symmetric matrix counts as singular.
inline constexpr double kSingularPivot = 1e-12;

InformationMatrix information_matrix(const ContinuousDesign& design, const ModelSpec& model,
                                     const ParameterVector& theta);
InformationMatrix information_matrix(const ExactDesign& design, const ModelSpec& model,
                                     const ParameterVector& theta);

// log det of a symmetric matrix via pivoted LDL'; empty when any pivot is
// non-positive or below kSingularPivot times the largest diagonal entry.
std::optional<double> log_determinant(const Matrix& m);

// -log det M, or +infinity when M is singular.
double d_objective(const InformationMatrix& m);

// (det M(design) / det M(reference))^(1/p). Throws SingularMatrixError if the
// reference is singular; returns 0 for a singular design.
double d_efficiency(const ContinuousDesign& design, const ContinuousDesign& reference,
                    const ModelSpec& model, const ParameterVector& theta);
double d_efficiency_from_objectives(double objective, double reference_objective, std::size_t p);

// Local D-optimality derivative psi(x) = p - u(x) f'(x) M^-1 f(x). Factorises
// M once so that grid scans only pay for the quadratic form.
class LocalSensitivity {
 public:
  LocalSensitivity(const ContinuousDesign& design, const ModelSpec& model, const ParameterVector& theta);

  double operator()(const Point& x) const;
  // u(x) f'(x) M^-1 f(x)
  double variance_term(const Point& x) const;
  const Matrix& inverse() const { return inverse_; }

 private:
  const ModelSpec* model_;
  ParameterVector theta_;
  Matrix inverse_;
};

double sensitivity(const Point& x, const ContinuousDesign& design, const ModelSpec& model,
                   const ParameterVector& theta);

// Merges support points closer than `radius` in region-scaled coordinates
// (weighted centroid) and drops weights below `weight_floor`, renormalising.
ContinuousDesign merge_support(const ContinuousDesign& design, const DesignRegion& region,
                               double radius = 1e-3, double weight_floor = 1e-4);

// Moves weight along null directions of the moment map until the support has
// at most p(p+1)/2 + 1 points. M(xi; theta) is preserved exactly.
ContinuousDesign caratheodory_reduce(const ContinuousDesign& design, const ModelSpec& model,
                                     const ParameterVector& theta);

// Points sorted lexicographically, weights carried along.
ContinuousDesign canonical_order(const ContinuousDesign& design);

// Equally weighted design over the given points.
ContinuousDesign equal_weights(std::vector<Point> points);

}  // namespace optdes
