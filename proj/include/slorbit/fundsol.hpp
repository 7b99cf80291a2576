#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "slorbit/errors.hpp"
#include "slorbit/ode.hpp"
#include "slorbit/types.hpp"
#include "slorbit/potential.hpp"

namespace slorbit {

inline constexpr double default_tol = 1e-10;

// Boundary data at x = 1 of the solutions with (y1, y1') = (1, 0) and
// (y2, y2') = (0, 1) at x = 0. dy1, dy2 are y1'(1), y2'(1).
template <class Scalar = double>
struct FundamentalData {
    Scalar lambda{};
    Scalar y1{};
    Scalar y2{};
    Scalar dy1{};
    Scalar dy2{};
    bool has_derivatives = false;
    std::array<Scalar, 4> d{}; // d/dlambda of y1, y2, dy1, dy2

    Scalar wronskian() const { return y1 * dy2 - dy1 * y2; }

    template <class Other>
    FundamentalData<Other> cast() const
    {
        FundamentalData<Other> r;
        r.lambda = Other(lambda);
        r.y1 = Other(y1);
        r.y2 = Other(y2);
        r.dy1 = Other(dy1);
        r.dy2 = Other(dy2);
        r.has_derivatives = has_derivatives;
        for (int i = 0; i < 4; ++i)
            r.d[i] = Other(d[i]);
        return r;
    }
};

namespace detail {

using Work = long double;

inline void check_tol(double tol)
{
    if (!(tol > 0))
        throw InvalidInputError("tolerance must be positive");
}

} // namespace detail

template <class Scalar = double>
FundamentalData<Scalar> fundamental(const Potential& q, double lambda, double tol = default_tol)
{
    using W = detail::Work;
    using Vec = Eigen::Matrix<W, 4, 1>;
    detail::check_tol(tol);
    const W lam = lambda;
    auto rhs = [&](W x, const Vec& s) {
        const W v = W(q(double(x))) - lam;
        return Vec(s[1], v * s[0], s[3], v * s[2]);
    };
    const Vec end = ode::integrate<W, 4>(rhs, Vec(1, 0, 0, 1), W(0), W(1), W(tol), q.breakpoints());
    FundamentalData<W> f;
    f.lambda = lam;
    f.y1 = end[0];
    f.dy1 = end[1];
    f.y2 = end[2];
    f.dy2 = end[3];
    return f.template cast<Scalar>();
}

template <class Scalar = double>
FundamentalData<Scalar> fundamental_with_derivative(const Potential& q, double lambda,
                                                    double tol = default_tol)
{
    using W = detail::Work;
    using Vec = Eigen::Matrix<W, 8, 1>;
    detail::check_tol(tol);
    const W lam = lambda;
    // Slots 4..7 hold d/dlambda of slots 0..3: u'' = (q - lambda) u - y.
    auto rhs = [&](W x, const Vec& s) {
        const W v = W(q(double(x))) - lam;
        Vec d;
        d << s[1], v * s[0], s[3], v * s[2], s[5], v * s[4] - s[0], s[7], v * s[6] - s[2];
        return d;
    };
    Vec init;
    init << 1, 0, 0, 1, 0, 0, 0, 0;
    const Vec end = ode::integrate<W, 8>(rhs, init, W(0), W(1), W(tol), q.breakpoints());
    FundamentalData<W> f;
    f.lambda = lam;
    f.y1 = end[0];
    f.dy1 = end[1];
    f.y2 = end[2];
    f.dy2 = end[3];
    f.has_derivatives = true;
    f.d = {end[4], end[6], end[5], end[7]};
    return f.template cast<Scalar>();
}

struct SolutionSamples {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> dy;
};

// Solution with y(0) = y0, y'(0) = dy0, recorded on a uniform grid of n + 1 points.
SolutionSamples sample_solution(const Potential& q, double lambda, double y0, double dy0,
                                std::size_t n, double tol = default_tol);

// Sign changes of y strictly inside (0, 1).
int count_interior_zeros(const SolutionSamples& s, double zero_tol = 0.0);

} // namespace slorbit
