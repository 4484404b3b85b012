#pragma once

#include <Eigen/Dense>

#include "expsplit/grid.hpp"

namespace expsplit {

/// mu-mode (Tucker) product: contracts dimension mu of the flattened tensor
/// v (layout x1 fastest) with the matrix e.
inline ArrayXd mode_product(const ArrayXd& v, const Eigen::MatrixXd& e,
                            const GridSpec& grid, int mu) {
  using Eigen::Map;
  using Eigen::MatrixXd;
  const Index n1 = grid.n[0];
  const Index n2 = grid.dim > 1 ? grid.n[1] : 1;
  const Index n3 = grid.dim > 2 ? grid.n[2] : 1;
  if (e.rows() != grid.n[mu] || e.cols() != grid.n[mu])
    throw std::invalid_argument("mode_product: factor size mismatch");
  if (v.size() != n1 * n2 * n3)
    throw std::invalid_argument("mode_product: field size mismatch");
  ArrayXd out(v.size());
  if (mu == 0) {
    Map<const MatrixXd> m(v.data(), n1, n2 * n3);
    Map<MatrixXd> o(out.data(), n1, n2 * n3);
    o.noalias() = e * m;
  } else if (mu == 1) {
    for (Index i3 = 0; i3 < n3; ++i3) {
      Map<const MatrixXd> s(v.data() + i3 * n1 * n2, n1, n2);
      Map<MatrixXd> o(out.data() + i3 * n1 * n2, n1, n2);
      o.noalias() = s * e.transpose();
    }
  } else {
    Map<const MatrixXd> m(v.data(), n1 * n2, n3);
    Map<MatrixXd> o(out.data(), n1 * n2, n3);
    o.noalias() = m * e.transpose();
  }
  return out;
}

}  // namespace expsplit
