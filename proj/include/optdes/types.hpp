#pragma once

#include <Eigen/Dense>

#include <vector>

namespace optdes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A point of the design region, one coordinate per explanatory variable.
using Point = Eigen::VectorXd;

// Parameters of the linear predictor, aligned with ModelBasis terms.
using ParameterVector = Eigen::VectorXd;

// Symmetric p x p matrix M(xi; theta).
using InformationMatrix = Eigen::MatrixXd;

}  // namespace optdes
