#include "slorbit/fundsol.hpp"

#include <algorithm>

namespace slorbit {

SolutionSamples sample_solution(const Potential& q, double lambda, double y0, double dy0,
                                std::size_t n, double tol)
{
    using W = detail::Work;
    using Vec = Eigen::Matrix<W, 2, 1>;
    detail::check_tol(tol);
    if (n < 1)
        throw InvalidInputError("solution sampling needs at least one interval");

    std::vector<double> stops;
    for (std::size_t i = 1; i < n; ++i)
        stops.push_back(double(i) / double(n));
    for (double b : q.breakpoints())
        stops.push_back(b);
    std::sort(stops.begin(), stops.end());

    const W lam = lambda;
    auto rhs = [&](W x, const Vec& s) { return Vec(s[1], (W(q(double(x))) - lam) * s[0]); };

    SolutionSamples out;
    out.x.push_back(0.0);
    out.y.push_back(y0);
    out.dy.push_back(dy0);
    auto grid = [&](W x, const Vec& s) {
        const double xd = double(x);
        const double k = xd * double(n);
        if (std::abs(k - std::round(k)) > 1e-9 * double(n))
            return; // breakpoint of the potential, not a grid node
        out.x.push_back(xd);
        out.y.push_back(double(s[0]));
        out.dy.push_back(double(s[1]));
    };
    ode::integrate<W, 2>(rhs, Vec(y0, dy0), W(0), W(1), W(tol), stops, grid);
    return out;
}

int count_interior_zeros(const SolutionSamples& s, double zero_tol)
{
    const std::size_t n = s.y.size();
    double ymax = 0.0;
    for (double v : s.y)
        ymax = std::max(ymax, std::abs(v));
    int zeros = 0;
    int last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = s.y[i];
        // End values that vanish up to integration error are boundary zeros.
        const bool end = i == 0 || i + 1 == n;
        const double cut = end ? std::max(zero_tol, 1e-7 * ymax) : zero_tol;
        const int sign = std::abs(v) <= cut ? 0 : (v > 0 ? 1 : -1);
        if (sign == 0)
            continue;
        if (last != 0 && sign != last)
            ++zeros;
        last = sign;
    }
    return zeros;
}

} // namespace slorbit
