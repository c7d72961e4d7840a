// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_LINALG_HPP
#define POLLING_LINALG_HPP

#include <Eigen/Dense>

namespace polling {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace polling

#endif  // POLLING_LINALG_HPP
