#include "optdes/glmm.hpp"

#include "optdes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

namespace optdes {

namespace {

constexpr std::size_t kQlQuadratureOrder = 32;

bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

Matrix design_rows(const Block& block, const ModelBasis& basis) {
  Matrix x(static_cast<Eigen::Index>(block.size()), static_cast<Eigen::Index>(basis.p()));
  for (std::size_t j = 0; j < block.size(); ++j) x.row(static_cast<Eigen::Index>(j)) = basis.eval(block[j]).transpose();
  return x;
}

void check_family(const RandomInterceptModel& model) {
  const auto fam = model.base.family.kind;
  if (fam != FamilyKind::poisson && fam != FamilyKind::binomial)
    throw UnsupportedError("random-intercept blocks support Poisson and binomial responses");
}

}  // namespace

void RandomInterceptModel::validate() const {
  base.validate();
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ValidationError("sigma2 must be finite and non-negative");
  if (m < 1) throw ValidationError("block size m must be at least 1");
}

void BlockDesign::validate(const RandomInterceptModel& model) const {
  if (blocks.empty()) throw ValidationError("block design has no blocks");
  if (blocks.size() != weights.size()) throw ValidationError("block design needs one weight per block");
  double total = 0.0;
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    if (!(weights[l] > 0.0)) throw ValidationError("block weight " + std::to_string(l + 1) + " must be positive");
    total += weights[l];
    if (blocks[l].size() != model.m)
      throw ValidationError("block " + std::to_string(l + 1) + " does not have m = " + std::to_string(model.m) +
                            " points");
    for (const auto& x : blocks[l])
      if (!model.base.region.contains(x))
        throw ValidationError("block " + std::to_string(l + 1) + " has a point outside the design region");
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("block weights must sum to 1");
}

ApproximationMethod ApproximationMethod::gee_exchangeable(std::size_t m, double alpha) {
  Matrix r = Matrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m), alpha);
  r.diagonal().setOnes();
  return gee(std::move(r));
}

const char* approximation_name(ApproximationKind kind) {
  switch (kind) {
    case ApproximationKind::ql: return "QL";
    case ApproximationKind::mql: return "MQL";
    case ApproximationKind::gee: return "GEE";
  }
  return "";
}

GaussHermite gauss_hermite(std::size_t order) {
  if (order < 1) throw ValidationError("quadrature order must be at least 1");
  // Golub-Welsch for the probabilists' Hermite recurrence.
  const auto n = static_cast<Eigen::Index>(order);
  Matrix jac = Matrix::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jac);
  GaussHermite gh;
  for (Eigen::Index i = 0; i < n; ++i) {
    gh.nodes.push_back(eig.eigenvalues()[i]);
    const double v = eig.eigenvectors()(0, i);
    gh.weights.push_back(v * v);
  }
  return gh;
}

InformationMatrix block_info_matrix(const Block& block, const RandomInterceptModel& model,
                                    const ParameterVector& theta, const ApproximationMethod& method) {
  check_family(model);
  const std::size_t m = block.size();
  const auto mi = static_cast<Eigen::Index>(m);
  const Matrix x = design_rows(block, model.base.basis);
  const Vector eta = x * theta;
  const auto& link = model.base.link;
  const auto& fam = model.base.family;
  for (Eigen::Index j = 0; j < mi; ++j) link.require_admissible(eta[j]);

  Vector delta(mi);
  Matrix v(mi, mi);
  const double s2 = model.sigma2;
  if (method.kind == ApproximationKind::ql && s2 > 0.0) {
    if (fam.kind == FamilyKind::poisson && link.kind() == LinkKind::log) {
      const Vector mu = (eta.array() + 0.5 * s2).exp().matrix();
      delta = mu;
      v = std::expm1(s2) * mu * mu.transpose();
      v.diagonal() += mu;
    } else {
      static const GaussHermite gh = gauss_hermite(kQlQuadratureOrder);
      const double s = std::sqrt(s2);
      Vector mean = Vector::Zero(mi);
      Vector evar = Vector::Zero(mi);
      Matrix second = Matrix::Zero(mi, mi);
      delta.setZero();
      for (std::size_t q = 0; q < gh.nodes.size(); ++q) {
        Vector mu(mi);
        for (Eigen::Index j = 0; j < mi; ++j) {
          mu[j] = link.inverse(eta[j] + s * gh.nodes[q]);
          delta[j] += gh.weights[q] * link.mean_derivative(eta[j] + s * gh.nodes[q]);
          evar[j] += gh.weights[q] * fam.variance(mu[j]);
        }
        mean += gh.weights[q] * mu;
        second += gh.weights[q] * mu * mu.transpose();
      }
      v = second - mean * mean.transpose();
      v.diagonal() += evar;
    }
  } else {
    Vector var(mi);
    for (Eigen::Index j = 0; j < mi; ++j) {
      delta[j] = link.mean_derivative(eta[j]);
      var[j] = fam.variance(link.inverse(eta[j]));
    }
    if (method.kind == ApproximationKind::gee) {
      Matrix r = method.working_correlation.size() ? method.working_correlation : Matrix::Identity(mi, mi);
      if (r.rows() != mi || r.cols() != mi)
        throw ValidationError("working correlation must be " + std::to_string(m) + " x " + std::to_string(m));
      const Vector sd = var.cwiseSqrt();
      v = sd.asDiagonal() * r * sd.asDiagonal();
    } else {
      v = s2 * delta * delta.transpose();
      v.diagonal() += var;
    }
  }

  Eigen::LDLT<Matrix> ldlt(v);
  if (ldlt.info() != Eigen::Success || !log_determinant(v))
    throw SingularMatrixError("block variance matrix is singular");
  const Matrix dx = delta.asDiagonal() * x;
  Matrix info = dx.transpose() * ldlt.solve(dx);
  return 0.5 * (info + info.transpose());
}

InformationMatrix block_design_info(const BlockDesign& design, const RandomInterceptModel& model,
                                    const ParameterVector& theta, const ApproximationMethod& method) {
  const auto p = static_cast<Eigen::Index>(model.base.p());
  InformationMatrix m = InformationMatrix::Zero(p, p);
  for (std::size_t l = 0; l < design.size(); ++l)
    m += design.weights[l] * block_info_matrix(design.blocks[l], model, theta, method);
  return m;
}

BlockSensitivity::BlockSensitivity(const BlockDesign& design, const RandomInterceptModel& model,
                                   const ParameterVector& theta, const ApproximationMethod& method)
    : model_(&model), theta_(theta), method_(method) {
  const InformationMatrix m = block_design_info(design, model, theta, method);
  if (!log_determinant(m)) throw SingularMatrixError("block design information matrix is singular");
  inverse_ = m.ldlt().solve(Matrix::Identity(m.rows(), m.cols()));
  inverse_ = 0.5 * (inverse_ + inverse_.transpose()).eval();
}

double BlockSensitivity::operator()(const Block& block) const {
  const InformationMatrix mb = block_info_matrix(block, *model_, theta_, method_);
  return static_cast<double>(model_->base.p()) - (mb.cwiseProduct(inverse_)).sum();
}

double mv_sensitivity(const Block& block, const BlockDesign& design, const RandomInterceptModel& model,
                      const ParameterVector& theta, const ApproximationMethod& method) {
  return BlockSensitivity(design, model, theta, method)(block);
}

Block canonical_block(Block block) {
  std::stable_sort(block.begin(), block.end(), lex_less);
  return block;
}

Point flatten_block(const Block& block) {
  const Eigen::Index k = block.empty() ? 0 : block.front().size();
  Point x(static_cast<Eigen::Index>(block.size()) * k);
  for (std::size_t j = 0; j < block.size(); ++j) x.segment(static_cast<Eigen::Index>(j) * k, k) = block[j];
  return x;
}

Block split_block(const Point& x, std::size_t m, std::size_t k) {
  if (static_cast<std::size_t>(x.size()) != m * k) throw ValidationError("flattened block has the wrong length");
  Block b(m);
  for (std::size_t j = 0; j < m; ++j)
    b[j] = x.segment(static_cast<Eigen::Index>(j * k), static_cast<Eigen::Index>(k));
  return b;
}

GridSpec block_grid() {
  GridSpec g;
  g.step = 0.02;
  return g;
}

namespace {

std::vector<Interval> block_box(const RandomInterceptModel& model) {
  std::vector<Interval> box;
  for (std::size_t j = 0; j < model.m; ++j)
    for (const auto& iv : model.base.region.bounds()) box.push_back(iv);
  return box;
}

bool non_canonical(const Point& x, std::size_t m, std::size_t k) {
  const Block b = split_block(x, m, k);
  for (std::size_t j = 1; j < m; ++j)
    if (lex_less(b[j], b[j - 1])) return true;
  return false;
}

BlockDesign to_block_design(const std::vector<Point>& pts, const std::vector<double>& ws, std::size_t m,
                            std::size_t k) {
  BlockDesign d;
  for (const auto& x : pts) d.blocks.push_back(split_block(x, m, k));
  d.weights = ws;
  return d;
}

}  // namespace

EquivalenceReport block_equivalence_check(const BlockDesign& design, const RandomInterceptModel& model,
                                          const ParameterVector& theta, const ApproximationMethod& method,
                                          const GridSpec& grid) {
  model.validate();
  if (!model.base.region.is_bounded()) throw UnsupportedError("block designs need a bounded region");
  const std::size_t m = model.m;
  const std::size_t k = model.base.k();
  const BlockSensitivity psi(design, model, theta, method);
  return scan_minimum(
      block_box(model), grid, model.base.p(), [&](const Point& x) { return psi(split_block(x, m, k)); },
      [&](const Point& x) { return non_canonical(x, m, k); });
}

BlockResult optimize_block_design(const RandomInterceptModel& model, const ParameterVector& theta,
                                  const ApproximationMethod& method, ContinuousOptOptions options) {
  model.validate();
  if (!model.base.region.is_bounded()) throw UnsupportedError("block designs need a bounded region");
  const std::size_t m = model.m;
  const std::size_t k = model.base.k();
  const std::size_t p = model.base.p();

  SupportProblem problem;
  problem.box = block_box(model);
  problem.p = p;
  problem.t_min = (p + m - 1) / m;
  problem.objective = [&](const std::vector<Point>& pts, const std::vector<double>& ws) {
    try {
      return d_objective(block_design_info(to_block_design(pts, ws, m, k), model, theta, method));
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const SingularMatrixError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  problem.sensitivity = [&](const std::vector<Point>& pts, const std::vector<double>& ws) {
    auto psi = std::make_shared<BlockSensitivity>(to_block_design(pts, ws, m, k), model, theta, method);
    return std::function<double(const Point&)>([psi, m, k](const Point& x) { return (*psi)(split_block(x, m, k)); });
  };
  problem.canonical = [m, k](const Point& x) { return flatten_block(canonical_block(split_block(x, m, k))); };
  problem.skip = [m, k](const Point& x) { return non_canonical(x, m, k); };

  SupportSolution sol = optimize_support(problem, options);
  BlockResult out;
  out.design = to_block_design(sol.points, sol.weights, m, k);
  out.objective = sol.objective;
  out.report = std::move(sol.report);
  return out;
}

InformationMatrix direct_binary_block_info(const Block& block, const RandomInterceptModel& model,
                                           const ParameterVector& theta, std::size_t quadrature_order) {
  if (model.base.family.kind != FamilyKind::binomial || model.base.link.kind() != LinkKind::logistic)
    throw UnsupportedError("direct block information is implemented for the binary logistic model");
  const std::size_t m = block.size();
  if (m < 1 || m > 3) throw UnsupportedError("direct block information needs 1 <= m <= 3");
  const double s = std::sqrt(model.sigma2);
  const GaussHermite gh = s > 0.0 ? gauss_hermite(quadrature_order) : GaussHermite{{0.0}, {1.0}};
  const Matrix x = design_rows(block, model.base.basis);
  const auto p = static_cast<Eigen::Index>(model.base.p());
  const auto& link = model.base.link;

  // Marginal probability of y and its score at parameter value th.
  const auto marginal = [&](const ParameterVector& th, unsigned y, Vector* score) {
    const Vector eta = x * th;
    double total = 0.0;
    Vector num = Vector::Zero(p);
    for (std::size_t q = 0; q < gh.nodes.size(); ++q) {
      double lik = 1.0;
      Vector resid_f = Vector::Zero(p);
      for (std::size_t j = 0; j < m; ++j) {
        const double h = link.inverse(eta[static_cast<Eigen::Index>(j)] + s * gh.nodes[q]);
        const bool yj = (y >> j) & 1U;
        lik *= yj ? h : 1.0 - h;
        resid_f += ((yj ? 1.0 : 0.0) - h) * x.row(static_cast<Eigen::Index>(j)).transpose();
      }
      total += gh.weights[q] * lik;
      num += gh.weights[q] * lik * resid_f;
    }
    if (score) *score = num / total;
    return total;
  };

  const double h = 1e-5;
  InformationMatrix info = InformationMatrix::Zero(p, p);
  for (unsigned y = 0; y < (1U << m); ++y) {
    const double prob = marginal(theta, y, nullptr);
    Matrix hess(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
      ParameterVector tp = theta;
      ParameterVector tm = theta;
      tp[a] += h;
      tm[a] -= h;
      Vector sp;
      Vector sm;
      marginal(tp, y, &sp);
      marginal(tm, y, &sm);
      hess.col(a) = (sp - sm) / (2.0 * h);
    }
    info -= prob * 0.5 * (hess + hess.transpose());
  }
  return info;
}

}  // namespace optdes
