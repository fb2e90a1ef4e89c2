#pragma once

#include <vector>

#include <Eigen/Dense>

namespace dmaloc {

// Maximum-benefit assignment of every row to a distinct column.
//
// benefit(i, j) is the value of giving column j to row i; requires
// rows <= cols. Returns the column chosen for each row. Shortest augmenting
// path (Hungarian) method, O(rows^2 * cols).
std::vector<int> max_benefit_assignment(const Eigen::MatrixXd& benefit);

}  // namespace dmaloc
