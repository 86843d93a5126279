#pragma once

#include <complex>

#include <Eigen/Dense>

namespace twlab {

using Cplx = std::complex<double>;
using CMat = Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr Cplx kImag{0.0, 1.0};

}  // namespace twlab
