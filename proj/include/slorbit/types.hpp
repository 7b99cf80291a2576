#pragma once

#include <complex>

#include <Eigen/Dense>

namespace slorbit {

template <class Scalar>
using Complex = std::complex<Scalar>;

template <class Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

template <class Scalar>
using Vector2c = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

using Matrix2cd = Matrix2c<double>;
using Vector2cd = Vector2c<double>;
using cdouble = std::complex<double>;

template <class Scalar>
inline constexpr Scalar pi_v = Scalar(3.141592653589793238462643383279502884L);

inline constexpr double pi = pi_v<double>;

// Largest entry modulus, the norm used for all matrix tolerances.
template <class Derived>
auto max_abs(const Eigen::MatrixBase<Derived>& m)
{
    return m.cwiseAbs().maxCoeff();
}

// Angle reduced to [0, 2pi).
template <class Scalar>
Scalar wrap_two_pi(Scalar a)
{
    const Scalar two_pi = 2 * pi_v<Scalar>;
    a = std::fmod(a, two_pi);
    if (a < 0)
        a += two_pi;
    if (a >= two_pi)
        a -= two_pi;
    return a;
}

} // namespace slorbit
