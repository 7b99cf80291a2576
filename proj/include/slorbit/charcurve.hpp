#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "slorbit/errors.hpp"
#include "slorbit/fundsol.hpp"
#include "slorbit/types.hpp"

namespace slorbit {

template <class Scalar>
struct CharCurveValue {
    Scalar lambda{};
    Matrix2c<Scalar> gamma_matrix;
    Complex<Scalar> kappa_plus;
    Complex<Scalar> kappa_minus;
    Complex<Scalar> denominator; // y2 - dy1 + i(dy2 + y1), never below 1 in modulus
};

template <class Scalar>
Scalar wronskian_defect(const FundamentalData<Scalar>& f)
{
    return std::abs(f.wronskian() - Scalar(1));
}

template <class Scalar>
void require_wronskian(const FundamentalData<Scalar>& f)
{
    const Scalar scale = std::max(Scalar(1), std::abs(f.y1 * f.dy2) + std::abs(f.dy1 * f.y2));
    if (!(wronskian_defect(f) <= Scalar(1e-6) * scale))
        throw InvalidInputError("fundamental data violates the Wronskian identity");
}

// The boundary condition having lambda as a double eigenvalue.
template <class Scalar>
CharCurveValue<Scalar> gamma(const FundamentalData<Scalar>& f)
{
    require_wronskian(f);
    const Complex<Scalar> i(0, 1);
    const Scalar p = f.y2 + f.dy1;
    const Scalar w = f.dy2 - f.y1;
    CharCurveValue<Scalar> v;
    v.lambda = f.lambda;
    v.denominator = Complex<Scalar>(f.y2 - f.dy1, f.dy2 + f.y1);
    v.gamma_matrix << Complex<Scalar>(p, w), Scalar(2) * i, Scalar(2) * i, Complex<Scalar>(p, -w);
    v.gamma_matrix /= v.denominator;
    const Scalar root = std::sqrt(Scalar(4) + w * w);
    v.kappa_plus = Complex<Scalar>(p, root) / v.denominator;
    v.kappa_minus = Complex<Scalar>(p, -root) / v.denominator;
    return v;
}

template <class Scalar>
bool is_double_eigenvalue(const Matrix2c<Scalar>& u, const FundamentalData<Scalar>& f, Scalar tol)
{
    return max_abs(Matrix2c<Scalar>(u - gamma(f).gamma_matrix)) <= tol;
}

struct CurveHit {
    double lambda;
    double residual;
    Matrix2cd gamma_matrix;
    int point; // first hit at the same curve point (matrices within 1e-6)
};

// Local minima of |tr G - (z1 + z2)| + |det G - z1 z2| over the window that
// refine to a residual below 1e-6. Window-limited; no global claim.
std::vector<CurveHit> gamma_meets_orbit(const Potential& q, const std::array<cdouble, 2>& invariants,
                                        double lo, double hi, std::size_t grid_n,
                                        double tol = default_tol);

double orbit_residual(const Matrix2cd& g, const std::array<cdouble, 2>& invariants);

std::vector<CharCurveValue<double>> tabulate_curve(const Potential& q, double lo, double hi,
                                                   std::size_t n, double tol = default_tol);

} // namespace slorbit
