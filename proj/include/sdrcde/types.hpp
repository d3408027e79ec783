#pragma once

#include <Eigen/Dense>

namespace sdrcde {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace sdrcde
