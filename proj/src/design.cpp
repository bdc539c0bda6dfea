#include "optdes/design.hpp"

#include "optdes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace optdes {

void ContinuousDesign::validate(const DesignRegion& region) const {
  if (points.empty()) throw ValidationError("design has no support points");
  if (points.size() != weights.size())
    throw ValidationError("design has " + std::to_string(points.size()) + " points but " +
                          std::to_string(weights.size()) + " weights");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0))
      throw ValidationError("design weight " + std::to_string(i + 1) + " must be positive");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("design weights must sum to 1 (sum is " + std::to_string(total) + ")");
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!region.contains(points[i]))
      throw ValidationError("design point " + std::to_string(i + 1) + " lies outside the design region");
}

int ExactDesign::n() const { return std::accumulate(reps.begin(), reps.end(), 0); }

ContinuousDesign ExactDesign::as_continuous() const {
  ContinuousDesign out;
  const double total = n();
  out.points = points;
  for (int r : reps) out.weights.push_back(r / total);
  return out;
}

void ExactDesign::validate(const DesignRegion& region) const {
  if (points.empty()) throw ValidationError("exact design has no points");
  if (points.size() != reps.size())
    throw ValidationError("exact design needs one replication count per point");
  for (std::size_t i = 0; i < reps.size(); ++i)
    if (reps[i] < 1)
      throw ValidationError("replication count " + std::to_string(i + 1) + " must be positive");
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!region.contains(points[i]))
      throw ValidationError("exact design point " + std::to_string(i + 1) + " lies outside the design region");
}

InformationMatrix information_matrix(const ContinuousDesign& design, const ModelSpec& model,
                                     const ParameterVector& theta) {
  const auto p = static_cast<Eigen::Index>(model.p());
  if (theta.size() != p)
    throw ValidationError("parameter vector length " + std::to_string(theta.size()) +
                          " differs from p = " + std::to_string(p));
  InformationMatrix m = InformationMatrix::Zero(p, p);
  for (std::size_t i = 0; i < design.points.size(); ++i) {
    const Vector f = model.basis.eval(design.points[i]);
    double u;
    try {
      u = glm_weight_eta(model.family, model.link, theta.dot(f));
    } catch (const DomainError& e) {
      throw DomainError("design point " + std::to_string(i + 1) + ": " + e.what());
    }
    m.noalias() += (design.weights[i] * u) * (f * f.transpose());
  }
  return m;
}

InformationMatrix information_matrix(const ExactDesign& design, const ModelSpec& model,
                                     const ParameterVector& theta) {
  return information_matrix(design.as_continuous(), model, theta);
}

std::optional<double> log_determinant(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  const double scale = m.diagonal().cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale)) return std::nullopt;
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Vector d = ldlt.vectorD();
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > kSingularPivot * scale)) return std::nullopt;
    total += std::log(d[i]);
  }
  return total;
}

double d_objective(const InformationMatrix& m) {
  const auto ld = log_determinant(m);
  return ld ? -*ld : std::numeric_limits<double>::infinity();
}

double d_efficiency_from_objectives(double objective, double reference_objective, std::size_t p) {
  if (!std::isfinite(reference_objective))
    throw SingularMatrixError("reference design has a singular information matrix");
  if (!std::isfinite(objective)) return 0.0;
  return std::exp((reference_objective - objective) / static_cast<double>(p));
}

double d_efficiency(const ContinuousDesign& design, const ContinuousDesign& reference,
                    const ModelSpec& model, const ParameterVector& theta) {
  const double ref = d_objective(information_matrix(reference, model, theta));
  const double obj = d_objective(information_matrix(design, model, theta));
  return d_efficiency_from_objectives(obj, ref, model.p());
}

LocalSensitivity::LocalSensitivity(const ContinuousDesign& design, const ModelSpec& model,
                                   const ParameterVector& theta)
    : model_(&model), theta_(theta) {
  const InformationMatrix m = information_matrix(design, model, theta);
  if (!log_determinant(m)) throw SingularMatrixError("information matrix of the design is singular");
  inverse_ = m.ldlt().solve(Matrix::Identity(m.rows(), m.cols()));
  inverse_ = 0.5 * (inverse_ + inverse_.transpose()).eval();
}

double LocalSensitivity::variance_term(const Point& x) const {
  const Vector f = model_->basis.eval(x);
  const double u = glm_weight_eta(model_->family, model_->link, theta_.dot(f));
  if (u == 0.0) return 0.0;
  return u * f.dot(inverse_ * f);
}

double LocalSensitivity::operator()(const Point& x) const {
  return static_cast<double>(model_->p()) - variance_term(x);
}

double sensitivity(const Point& x, const ContinuousDesign& design, const ModelSpec& model,
                   const ParameterVector& theta) {
  return LocalSensitivity(design, model, theta)(x);
}

ContinuousDesign merge_support(const ContinuousDesign& design, const DesignRegion& region,
                               double radius, double weight_floor) {
  std::vector<std::size_t> order(design.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return design.weights[a] > design.weights[b]; });

  std::vector<Point> centres;
  std::vector<Point> sums;
  std::vector<double> mass;
  for (std::size_t idx : order) {
    const Point& x = design.points[idx];
    const double w = design.weights[idx];
    const Point xs = region.scaled(x);
    std::size_t hit = centres.size();
    for (std::size_t c = 0; c < centres.size(); ++c)
      if ((region.scaled(centres[c]) - xs).norm() < radius) {
        hit = c;
        break;
      }
    if (hit == centres.size()) {
      centres.push_back(x);
      sums.push_back(w * x);
      mass.push_back(w);
    } else {
      sums[hit] += w * x;
      mass[hit] += w;
    }
  }

  ContinuousDesign out;
  double total = 0.0;
  for (std::size_t c = 0; c < centres.size(); ++c) {
    if (mass[c] < weight_floor) continue;
    out.points.push_back(region.clamp(sums[c] / mass[c]));
    out.weights.push_back(mass[c]);
    total += mass[c];
  }
  if (out.points.empty()) {
    // Every cluster fell below the floor; keep the heaviest one.
    const auto best = static_cast<std::size_t>(std::max_element(mass.begin(), mass.end()) - mass.begin());
    out.points.push_back(region.clamp(sums[best] / mass[best]));
    out.weights.push_back(1.0);
    return out;
  }
  for (double& w : out.weights) w /= total;
  return out;
}

ContinuousDesign caratheodory_reduce(const ContinuousDesign& design, const ModelSpec& model,
                                     const ParameterVector& theta) {
  const std::size_t p = model.p();
  const std::size_t bound = caratheodory_bound(p);
  ContinuousDesign cur = design;
  while (cur.size() > bound) {
    const std::size_t t = cur.size();
    // Columns: (vech(u f f'), 1) for each support point.
    Matrix moments(p * (p + 1) / 2 + 1, t);
    for (std::size_t i = 0; i < t; ++i) {
      const Vector f = model.basis.eval(cur.points[i]);
      const double u = glm_weight_eta(model.family, model.link, theta.dot(f));
      std::size_t r = 0;
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) moments(r++, i) = u * f[a] * f[b];
      moments(r, i) = 1.0;
    }
    Eigen::FullPivLU<Matrix> lu(moments);
    const Matrix kernel = lu.kernel();
    Vector dir = kernel.col(0);
    if (dir.maxCoeff() <= 0.0) dir = -dir;
    // Largest step keeping every weight non-negative.
    double step = std::numeric_limits<double>::infinity();
    std::size_t hit = 0;
    for (std::size_t i = 0; i < t; ++i)
      if (dir[i] > 0.0 && cur.weights[i] / dir[i] < step) {
        step = cur.weights[i] / dir[i];
        hit = i;
      }
    ContinuousDesign next;
    double total = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      if (i == hit) continue;
      const double w = cur.weights[i] - step * dir[i];
      if (w <= 0.0) continue;
      next.points.push_back(cur.points[i]);
      next.weights.push_back(w);
      total += w;
    }
    for (double& w : next.weights) w /= total;
    cur = std::move(next);
  }
  return cur;
}

ContinuousDesign canonical_order(const ContinuousDesign& design) {
  std::vector<std::size_t> order(design.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Point& x = design.points[a];
    const Point& y = design.points[b];
    return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
  });
  ContinuousDesign out;
  for (std::size_t i : order) {
    out.points.push_back(design.points[i]);
    out.weights.push_back(design.weights[i]);
  }
  return out;
}

ContinuousDesign equal_weights(std::vector<Point> points) {
  ContinuousDesign out;
  const double w = 1.0 / static_cast<double>(points.size());
  out.weights.assign(points.size(), w);
  out.points = std::move(points);
  return out;
}

}  // namespace optdes
