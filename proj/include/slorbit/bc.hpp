#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>

#include "slorbit/errors.hpp"
#include "slorbit/types.hpp"

// Self-adjoint boundary conditions i(I+U) psidot = (I-U) psi with
// psi = (y(0), y(1)) and psidot = (-y'(0), y'(1)).
namespace slorbit {

inline constexpr double unitarity_tol = 1e-10;
inline constexpr double stratum_tol = 1e-8;
inline constexpr double structure_tol = 1e-12;

enum class Stratum { U0, U1 };

struct Classification {
    Stratum stratum;
    bool is_real;
    bool is_separated;
};

// psidot = A psi with A = [[a, b], [conj(b), c]].
template <class Scalar>
struct HermitianBC {
    Scalar a{};
    Scalar c{};
    Complex<Scalar> b{};

    Matrix2c<Scalar> matrix() const
    {
        Matrix2c<Scalar> m;
        m << Complex<Scalar>(a), b, std::conj(b), Complex<Scalar>(c);
        return m;
    }
};

// y(0) cos(alpha) - y'(0) sin(alpha) = 0, y(1) cos(beta) - y'(1) sin(beta) = 0.
template <class Scalar>
struct SeparatedBC {
    Scalar alpha{};
    Scalar beta{};
};

// (y(1), y'(1)) = e^{i phi} K (y(0), y'(0)) with det K = 1.
template <class Scalar>
struct CoupledBC {
    Scalar phi{};
    Scalar k11{}, k12{}, k21{}, k22{};

    Scalar det() const { return k11 * k22 - k12 * k21; }
};

template <class Scalar>
struct U0Param {
    Scalar r{};
    Scalar beta0{};
    Scalar gamma0{};
};

template <class Scalar>
Scalar unitarity_defect(const Matrix2c<Scalar>& u)
{
    return max_abs(Matrix2c<Scalar>(u.adjoint() * u - Matrix2c<Scalar>::Identity()));
}

template <class Scalar>
void require_unitary(const Matrix2c<Scalar>& u, Scalar tol = Scalar(unitarity_tol))
{
    if (!(unitarity_defect(u) <= tol))
        throw InvalidInputError("boundary matrix is not unitary");
}

template <class Scalar>
Classification classify(const Matrix2c<Scalar>& u)
{
    const Matrix2c<Scalar> id = Matrix2c<Scalar>::Identity();
    Classification c;
    c.stratum = std::abs((id + u).determinant()) <= Scalar(stratum_tol) ? Stratum::U0 : Stratum::U1;
    c.is_real = max_abs(Matrix2c<Scalar>(u - u.transpose())) <= Scalar(structure_tol);
    c.is_separated = std::max(std::abs(u(0, 1)), std::abs(u(1, 0))) <= Scalar(structure_tol);
    return c;
}

template <class Scalar>
HermitianBC<Scalar> to_hermitian(const Matrix2c<Scalar>& u)
{
    const Matrix2c<Scalar> id = Matrix2c<Scalar>::Identity();
    if (classify(u).stratum == Stratum::U0)
        throw StratumError("boundary condition lies in U0 and has no Hermitian form");
    const Complex<Scalar> mi(0, -1);
    const Matrix2c<Scalar> a = mi * (id + u).inverse() * (id - u);
    HermitianBC<Scalar> h;
    h.a = a(0, 0).real();
    h.c = a(1, 1).real();
    h.b = (a(0, 1) + std::conj(a(1, 0))) / Scalar(2);
    return h;
}

template <class Scalar>
Matrix2c<Scalar> from_hermitian(const HermitianBC<Scalar>& h)
{
    const Matrix2c<Scalar> id = Matrix2c<Scalar>::Identity();
    const Complex<Scalar> i(0, 1);
    const Matrix2c<Scalar> a = h.matrix();
    return (id - i * a) * (id + i * a).inverse();
}

template <class Scalar>
Matrix2c<Scalar> from_separated(const SeparatedBC<Scalar>& s)
{
    if (!(s.alpha >= 0 && s.alpha < pi_v<Scalar>) || !(s.beta > 0 && s.beta <= pi_v<Scalar>))
        throw InvalidInputError("separated angles must satisfy alpha in [0,pi), beta in (0,pi]");
    Matrix2c<Scalar> u = Matrix2c<Scalar>::Zero();
    u(0, 0) = -std::polar(Scalar(1), -2 * s.alpha);
    u(1, 1) = -std::polar(Scalar(1), 2 * s.beta);
    return u;
}

template <class Scalar>
std::optional<SeparatedBC<Scalar>> to_separated(const Matrix2c<Scalar>& u)
{
    if (!classify(u).is_separated)
        return std::nullopt;
    const Scalar p = pi_v<Scalar>;
    SeparatedBC<Scalar> s;
    s.alpha = std::fmod(-std::arg(-u(0, 0)) / 2 + p, p);
    if (s.alpha >= p)
        s.alpha -= p;
    s.beta = std::fmod(std::arg(-u(1, 1)) / 2 + p, p);
    if (s.beta <= 0)
        s.beta += p;
    return s;
}

// The condition psidot = c psi at both ends.
template <class Scalar>
SeparatedBC<Scalar> robin(Scalar c)
{
    return {pi_v<Scalar> / 2 + std::atan(c), pi_v<Scalar> / 2 - std::atan(c)};
}

template <class Scalar>
Matrix2c<Scalar> from_coupled(const CoupledBC<Scalar>& k)
{
    if (!(std::abs(k.det() - 1) <= Scalar(unitarity_tol)))
        throw InvalidInputError("coupled boundary matrix K must have determinant 1");
    const Complex<Scalar> i(0, 1);
    const Complex<Scalar> den(k.k12 - k.k21, k.k11 + k.k22);
    const Complex<Scalar> diag(k.k12 + k.k21, k.k22 - k.k11);
    Matrix2c<Scalar> u;
    u << diag, Scalar(2) * i * std::polar(Scalar(1), -k.phi), Scalar(2) * i * std::polar(Scalar(1), k.phi),
        std::conj(diag);
    return u / den;
}

// Canonical section: k12 > 0 when nonzero; in U0 (k12 = 0) k11 > 0.
template <class Scalar>
std::optional<CoupledBC<Scalar>> to_coupled(const Matrix2c<Scalar>& u)
{
    const Classification cls = classify(u);
    if (cls.is_separated)
        return std::nullopt;
    const Complex<Scalar> i(0, 1);
    const Scalar phi0 = -std::arg(u(0, 1) / u(1, 0)) / 2;

    CoupledBC<Scalar> k;
    k.phi = wrap_two_pi(phi0);
    const Complex<Scalar> den = Scalar(2) * i * std::polar(Scalar(1), -k.phi) / u(0, 1);
    const Complex<Scalar> diag = u(0, 0) * den;
    k.k12 = (den.real() + diag.real()) / 2;
    k.k21 = (diag.real() - den.real()) / 2;
    k.k11 = (den.imag() - diag.imag()) / 2;
    k.k22 = (den.imag() + diag.imag()) / 2;

    bool flip;
    if (cls.stratum == Stratum::U0) {
        k.k12 = 0;
        flip = k.k11 < 0;
    } else {
        flip = k.k12 < 0;
    }
    if (flip) {
        k.phi = wrap_two_pi(k.phi + pi_v<Scalar>);
        k.k11 = -k.k11;
        k.k12 = -k.k12;
        k.k21 = -k.k21;
        k.k22 = -k.k22;
    }
    return k;
}

template <class Scalar>
Matrix2c<Scalar> from_u0_param(const U0Param<Scalar>& p)
{
    if (!(p.r >= 0 && p.r <= 1))
        throw InvalidInputError("U0 chart radius must lie in [0,1]");
    const Scalar rc = p.r * std::cos(p.beta0);
    const Complex<Scalar> phase(-rc, std::sqrt(std::max(Scalar(0), 1 - rc * rc)));
    const Scalar w = std::sqrt(std::max(Scalar(0), 1 - p.r * p.r));
    Matrix2c<Scalar> v;
    v << std::polar(p.r, p.beta0), std::polar(w, p.gamma0), -std::polar(w, -p.gamma0),
        std::polar(p.r, -p.beta0);
    return phase * v;
}

// Cayley image of a real eigenvalue of A.
template <class Scalar>
Complex<Scalar> cayley(Scalar a)
{
    const Complex<Scalar> i(0, 1);
    return (Scalar(1) - i * a) / (Scalar(1) + i * a);
}

// Eigenvalues sorted by argument in [0, 2pi).
template <class Scalar>
std::array<Complex<Scalar>, 2> orbit_invariants(const Matrix2c<Scalar>& u)
{
    const Complex<Scalar> half_tr = (u(0, 0) + u(1, 1)) / Scalar(2);
    const Complex<Scalar> disc = std::sqrt(half_tr * half_tr - u.determinant());
    std::array<Complex<Scalar>, 2> z{half_tr + disc, half_tr - disc};
    auto key = [](const Complex<Scalar>& v) {
        Scalar a = wrap_two_pi(std::arg(v));
        return a > 2 * pi_v<Scalar> - Scalar(1e-12) ? Scalar(0) : a;
    };
    if (key(z[1]) < key(z[0]))
        std::swap(z[0], z[1]);
    return z;
}

} // namespace slorbit
