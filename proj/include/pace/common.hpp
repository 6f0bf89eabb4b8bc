#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace pace {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

} // namespace pace
