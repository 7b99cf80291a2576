#include "slorbit/charcurve.hpp"

#include <algorithm>

namespace slorbit {

double orbit_residual(const Matrix2cd& g, const std::array<cdouble, 2>& z)
{
    return std::abs(g.trace() - (z[0] + z[1])) + std::abs(g.determinant() - z[0] * z[1]);
}

std::vector<CurveHit> gamma_meets_orbit(const Potential& q, const std::array<cdouble, 2>& z,
                                        double lo, double hi, std::size_t grid_n, double tol)
{
    if (!(lo < hi))
        throw InvalidInputError("curve window needs lo < hi");
    if (grid_n < 2)
        throw InvalidInputError("curve scan needs at least two grid points");

    auto m = [&](double lam) { return orbit_residual(gamma(fundamental(q, lam, tol)).gamma_matrix, z); };

    std::vector<double> xs(grid_n), ms(grid_n);
    for (std::size_t k = 0; k < grid_n; ++k) {
        xs[k] = lo + (hi - lo) * double(k) / double(grid_n - 1);
        ms[k] = m(xs[k]);
    }

    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    std::vector<CurveHit> hits;
    for (std::size_t k = 0; k < grid_n; ++k) {
        const bool left_ok = k == 0 || ms[k] <= ms[k - 1];
        const bool right_ok = k + 1 == grid_n || ms[k] < ms[k + 1];
        if (!left_ok || !right_ok)
            continue;
        double a = xs[k == 0 ? 0 : k - 1];
        double b = xs[k + 1 == grid_n ? k : k + 1];
        double c = b - golden * (b - a), d = a + golden * (b - a);
        double mc = m(c), md = m(d);
        while (b - a > 1e-10 * std::max(1.0, std::abs(a))) {
            if (mc < md) {
                b = d;
                d = c;
                md = mc;
                c = b - golden * (b - a);
                mc = m(c);
            } else {
                a = c;
                c = d;
                mc = md;
                d = a + golden * (b - a);
                md = m(d);
            }
        }
        const double lam = 0.5 * (a + b);
        const double res = m(lam);
        if (res >= 1e-6)
            continue;
        if (!hits.empty() && std::abs(hits.back().lambda - lam) <= 1e-6 * std::max(1.0, std::abs(lam)))
            continue;
        CurveHit h{lam, res, gamma(fundamental(q, lam, tol)).gamma_matrix, 0};
        h.point = int(hits.size());
        for (const auto& prev : hits)
            if (max_abs(Matrix2cd(prev.gamma_matrix - h.gamma_matrix)) <= 1e-6) {
                h.point = prev.point;
                break;
            }
        hits.push_back(h);
    }
    return hits;
}

std::vector<CharCurveValue<double>> tabulate_curve(const Potential& q, double lo, double hi,
                                                   std::size_t n, double tol)
{
    std::vector<CharCurveValue<double>> out;
    if (!(lo < hi) || n == 0)
        return out;
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = n == 1 ? lo : lo + (hi - lo) * double(k) / double(n - 1);
        out.push_back(gamma(fundamental(q, lam, tol)));
    }
    return out;
}

} // namespace slorbit
