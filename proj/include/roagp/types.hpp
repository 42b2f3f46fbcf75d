#pragma once

#include <Eigen/Core>

namespace roagp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Axis-aligned box, used for domain hints and sampling domains.
struct Box {
  Vec lo;
  Vec hi;
};

}  // namespace roagp
