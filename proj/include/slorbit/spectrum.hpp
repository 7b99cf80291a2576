#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slorbit/bc.hpp"
#include "slorbit/charcurve.hpp"
#include "slorbit/fundsol.hpp"

namespace slorbit {

enum class Certification { prufer, robin_bracketed, scan_only };

std::string to_string(Certification c);

struct SpectrumSlice {
    std::vector<double> eigenvalues; // distinct values, ascending
    std::vector<int> multiplicities;
    std::size_t index_offset = 0;
    Certification certification = Certification::scan_only;
    double window_lo = 0.0;
    double window_hi = 0.0;

    // Values repeated by multiplicity, so entry k is lambda_{index_offset + k}.
    std::vector<double> indexed() const;
    std::size_t count() const;
};

struct SpectrumOptions {
    double tol = default_tol;
    // A value known to lie below lambda_0, e.g. shared by every point of an orbit.
    std::optional<double> lower_bound;
    // Also return every eigenvalue up to this value.
    std::optional<double> upper_limit;
    // Scan only this window; results are not anchored to lambda_0.
    std::optional<std::pair<double, double>> window;
    std::size_t index_offset = 0;
};

inline constexpr double double_root_tol = 1e-6;

// det(U - Gamma(lambda)).
template <class Scalar>
Complex<Scalar> char_complex(const Matrix2c<Scalar>& u, const FundamentalData<Scalar>& f)
{
    return Matrix2c<Scalar>(u - gamma(f).gamma_matrix).determinant();
}

// Left side of the real characteristic equation of psidot = A psi.
template <class Scalar>
Scalar char_real_u1(const HermitianBC<Scalar>& h, const FundamentalData<Scalar>& f)
{
    const Scalar g = h.a * h.c - std::norm(h.b);
    return -h.a * f.dy2 + g * f.y2 - h.c * f.y1 + f.dy1 - 2 * h.b.real();
}

template <class Scalar>
Scalar char_real_u1_derivative(const HermitianBC<Scalar>& h, const FundamentalData<Scalar>& f)
{
    const Scalar g = h.a * h.c - std::norm(h.b);
    return -h.a * f.d[3] + g * f.d[1] - h.c * f.d[0] + f.d[2];
}

namespace detail {

template <class Scalar>
Matrix2c<Scalar> char_matrix(const Matrix2c<Scalar>& u, Scalar y1, Scalar y2, Scalar dy1, Scalar dy2,
                             bool constant_part)
{
    const Matrix2c<Scalar> id = Matrix2c<Scalar>::Identity();
    const Complex<Scalar> i(0, 1);
    Matrix2c<Scalar> m, n;
    m << Scalar(0), Scalar(constant_part ? -1 : 0), dy1, dy2;
    n << Scalar(constant_part ? 1 : 0), Scalar(0), y1, y2;
    return i * (id + u) * m - (id - u) * n;
}

} // namespace detail

// Real entire function whose zeros are the eigenvalues, for any U:
// Re(conj(sqrt(det U)) det(i(I+U)M - (I-U)N)) with M, N the boundary data.
template <class Scalar>
Scalar char_real(const Matrix2c<Scalar>& u, const FundamentalData<Scalar>& f,
                 Scalar* derivative = nullptr, Scalar* imaginary = nullptr)
{
    const Complex<Scalar> rot = std::conj(std::sqrt(u.determinant()));
    const Matrix2c<Scalar> x = detail::char_matrix(u, f.y1, f.y2, f.dy1, f.dy2, true);
    const Complex<Scalar> g = rot * x.determinant();
    if (imaginary)
        *imaginary = g.imag();
    if (derivative) {
        const Matrix2c<Scalar> dx = detail::char_matrix(u, f.d[0], f.d[1], f.d[2], f.d[3], false);
        Matrix2c<Scalar> adj;
        adj << x(1, 1), -x(0, 1), -x(1, 0), x(0, 0);
        *derivative = (rot * Matrix2c<Scalar>(adj * dx).trace()).real();
    }
    return g.real();
}

// Integer that drops by one as lambda passes each eigenvalue of u. `lift`
// is a continuous branch of arg D(lambda) and arg_det_u is arg det u.
long winding_index(const Matrix2cd& u, const CharCurveValue<double>& g, double lift, double arg_det_u);

// Phases of the eigenvalues of Gamma(lambda)^* U in (-pi, pi], sorted.
std::array<double, 2> eigenphases(const Matrix2cd& u, const FundamentalData<double>& f);

// Prufer angle theta(1) with theta(0) = alpha, and optionally d theta(1) / d lambda.
double prufer_angle(const Potential& q, double alpha, double lambda, double tol = default_tol,
                    double* derivative = nullptr);

// n-th eigenvalue of a separated problem, by the Prufer angle count.
double prufer_separated(const Potential& q, const SeparatedBC<double>& s, std::size_t n,
                        double tol = default_tol, std::optional<double> below = std::nullopt);

std::vector<double> prufer_spectrum(const Potential& q, const SeparatedBC<double>& s,
                                    std::size_t n_max, double tol = default_tol);

struct RobinBracket {
    std::vector<double> lower; // psidot = (mu + nu) psi
    std::vector<double> upper; // psidot = (mu - nu) psi
};

// Comparison spectra for every point of the orbit with A-eigenvalues mu -+ nu.
RobinBracket robin_bracket(const Potential& q, double mu, double nu, std::size_t n_max,
                           double tol = default_tol);

struct ReferenceSpectra {
    std::vector<double> dirichlet;
    std::vector<double> neumann;
};

ReferenceSpectra reference_spectra(const Potential& q, std::size_t n_max, double tol = default_tol);

// A value strictly below lambda_0 for the condition u.
double certified_lower_bound(const Potential& q, const Matrix2cd& u, double tol = default_tol);

// Number of eigenvalues in (a, b] counted with multiplicity.
int eigenvalue_count(const Potential& q, const Matrix2cd& u, double a, double b,
                     double tol = default_tol);

SpectrumSlice eigenvalues(const Potential& q, const Matrix2cd& u, std::size_t n_max,
                          const SpectrumOptions& opts = {});

} // namespace slorbit
