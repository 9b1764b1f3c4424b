#pragma once

#include <Eigen/Dense>

#include <vector>

namespace seads {

struct Assignment {
  std::vector<int> column_of_row;
  double cost = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (rows <= cols)
/// with the Hungarian method (shortest augmenting paths with potentials),
/// O(rows^2 * cols). Deterministic: among equal reduced costs the lowest
/// column index is taken.
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace seads
