// types.hpp - dense Eigen aliases shared by every module

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace heom {

template <typename Real> using Complex = std::complex<Real>;
template <typename Real> using Matrix2c = Eigen::Matrix<std::complex<Real>, 2, 2>;
template <typename Real> using Matrix3c = Eigen::Matrix<std::complex<Real>, 3, 3>;
template <typename Real> using Matrix4r = Eigen::Matrix<Real, 4, 4>;

using cplx = std::complex<double>;
using Mat2 = Matrix2c<double>;
using Mat3 = Matrix3c<double>;
using Mat4 = Matrix4r<double>;

inline constexpr cplx I{0.0, 1.0};

template <typename Real = double> Matrix2c<Real> sigma_x() {
    Matrix2c<Real> m;
    m << Real(0), Real(1), Real(1), Real(0);
    return m;
}

template <typename Real = double> Matrix2c<Real> sigma_y() {
    using C = std::complex<Real>;
    Matrix2c<Real> m;
    m << C(0), C(0, -1), C(0, 1), C(0);
    return m;
}

template <typename Real = double> Matrix2c<Real> sigma_z() {
    Matrix2c<Real> m;
    m << Real(1), Real(0), Real(0), Real(-1);
    return m;
}

template <typename Derived>
auto commutator(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Derived>& b) {
    return (a * b - b * a).eval();
}

// Largest entry of A - A^dagger.
template <typename Derived> double hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

// Projector |k><k| onto basis state k (1-based, matching the state labels used in configs).
inline Mat2 population_projector(int state) {
    Mat2 p = Mat2::Zero();
    p(state - 1, state - 1) = 1.0;
    return p;
}

} // namespace heom
