#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace mss {

/// Row-major dynamic matrix: rows are time steps or linguistic units, columns are features.
template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = MatrixT<double>;
using Vector = Eigen::VectorXd;

using Index = Eigen::Index;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.allFinite();
}

}  // namespace mss
