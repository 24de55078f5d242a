#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace esn {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

} // namespace esn
