#pragma once

#include <Eigen/Dense>

namespace pnmpc::ocp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<Vec>;
using VecCRef = Eigen::Ref<const Vec>;

}  // namespace pnmpc::ocp
