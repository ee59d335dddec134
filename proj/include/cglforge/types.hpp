#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cglforge {

using cplx = std::complex<double>;
using Cmat = Eigen::MatrixXcd;
using Cvec = Eigen::VectorXcd;
using Crow = Eigen::RowVectorXcd;
using Rmat = Eigen::MatrixXd;
using Rvec = Eigen::VectorXd;

inline constexpr cplx I1{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

}  // namespace cglforge
