#pragma once

#include "optdes/design.hpp"
#include "optdes/equivalence.hpp"
#include "optdes/optimize.hpp"

#include <cstddef>
#include <vector>

namespace optdes {

// GLM with an additive N(0, sigma2) intercept shared by the m runs of a block.
struct RandomInterceptModel {
  ModelSpec base;
  double sigma2 = 0.0;
  std::size_t m = 1;

  void validate() const;
};

using Block = std::vector<Point>;

struct BlockDesign {
  std::vector<Block> blocks;
  std::vector<double> weights;

  std::size_t size() const { return blocks.size(); }
  void validate(const RandomInterceptModel& model) const;
};

enum class ApproximationKind { ql, mql, gee };

struct ApproximationMethod {
  ApproximationKind kind = ApproximationKind::ql;
  // Working correlation for GEE; identity when empty.
  Matrix working_correlation;

  static ApproximationMethod ql() { return {ApproximationKind::ql, {}}; }
  static ApproximationMethod mql() { return {ApproximationKind::mql, {}}; }
  static ApproximationMethod gee(Matrix r) { return {ApproximationKind::gee, std::move(r)}; }
  static ApproximationMethod gee_exchangeable(std::size_t m, double alpha);
};

const char* approximation_name(ApproximationKind kind);

// Nodes and weights for E g(Z), Z ~ N(0, 1), exact for polynomials of degree
// below 2 * order.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermite gauss_hermite(std::size_t order);

// X' Delta V^-1 Delta X for one block. QL uses the marginal mean and
// covariance over the random intercept; MQL the conditional mean at zero with
// V = diag V(mu) + sigma2 delta delta'; GEE V = D^1/2 R D^1/2.
InformationMatrix block_info_matrix(const Block& block, const RandomInterceptModel& model,
                                    const ParameterVector& theta, const ApproximationMethod& method);

InformationMatrix block_design_info(const BlockDesign& design, const RandomInterceptModel& model,
                                    const ParameterVector& theta, const ApproximationMethod& method);

// Multivariate derivative function p - tr M(block) M^-1(design).
class BlockSensitivity {
 public:
  BlockSensitivity(const BlockDesign& design, const RandomInterceptModel& model, const ParameterVector& theta,
                   const ApproximationMethod& method);
  double operator()(const Block& block) const;

 private:
  const RandomInterceptModel* model_;
  ParameterVector theta_;
  ApproximationMethod method_;
  Matrix inverse_;
};

double mv_sensitivity(const Block& block, const BlockDesign& design, const RandomInterceptModel& model,
                      const ParameterVector& theta, const ApproximationMethod& method);

// Block with its points sorted lexicographically.
Block canonical_block(Block block);
// Concatenation of the block's points into one vector, and back.
Point flatten_block(const Block& block);
Block split_block(const Point& x, std::size_t m, std::size_t k);

struct BlockResult {
  BlockDesign design;
  double objective = 0.0;
  EquivalenceReport report;
};

// Equivalence scan over X^m, visiting only canonically ordered blocks.
EquivalenceReport block_equivalence_check(const BlockDesign& design, const RandomInterceptModel& model,
                                          const ParameterVector& theta, const ApproximationMethod& method,
                                          const GridSpec& grid);

// Default grid for block scans: step 0.02.
GridSpec block_grid();

BlockResult optimize_block_design(const RandomInterceptModel& model, const ParameterVector& theta,
                                  const ApproximationMethod& method, ContinuousOptOptions options);

// Information of one binary block from the marginal likelihood: Gauss-Hermite
// integration over the intercept, finite-difference Hessian of the analytic
// score, exact expectation over {0,1}^m. Logistic link, m <= 3.
InformationMatrix direct_binary_block_info(const Block& block, const RandomInterceptModel& model,
                                           const ParameterVector& theta, std::size_t quadrature_order = 32);

}  // namespace optdes
