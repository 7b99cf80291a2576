#include "oracle/closed_form.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

Free free_solution(double lambda)
{
    using L = long double;
    Free r{};
    const L lam = lambda;
    if (std::abs(lam) < 1e-7L) {
        r.y1 = double(1 - lam / 2);
        r.y2 = double(1 - lam / 6);
        r.dy1 = double(-lam);
        r.dy2 = double(1 - lam / 2);
        r.d_y1 = -0.5;
        r.d_y2 = -1.0 / 6.0;
        r.d_dy1 = -1.0;
        r.d_dy2 = -0.5;
        return r;
    }
    if (lam > 0) {
        const L k = std::sqrt(lam), c = std::cos(k), s = std::sin(k);
        r.y1 = double(c);
        r.y2 = double(s / k);
        r.dy1 = double(-k * s);
        r.dy2 = double(c);
        r.d_y1 = double(-s / (2 * k));
        r.d_y2 = double((k * c - s) / (2 * k * k * k));
        r.d_dy1 = double(-(s + k * c) / (2 * k));
        r.d_dy2 = r.d_y1;
    } else {
        const L k = std::sqrt(-lam), c = std::cosh(k), s = std::sinh(k);
        r.y1 = double(c);
        r.y2 = double(s / k);
        r.dy1 = double(k * s);
        r.dy2 = double(c);
        r.d_y1 = double(-s / (2 * k));
        r.d_y2 = double(-(k * c - s) / (2 * k * k * k));
        r.d_dy1 = double(-(s + k * c) / (2 * k));
        r.d_dy2 = r.d_y1;
    }
    return r;
}

double bisect(const std::function<double(double)>& f, double a, double b, double tol)
{
    double fa = f(a);
    double fb = f(b);
    if (fa == 0)
        return a;
    if (fb == 0)
        return b;
    if ((fa > 0) == (fb > 0))
        throw std::runtime_error("bisect: no sign change");
    for (int i = 0; i < 200 && std::abs(b - a) > tol * std::max(1.0, std::abs(a)); ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0)
            return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

std::vector<double> sign_change_roots(const std::function<double(double)>& f, double lo, double hi,
                                      int grid)
{
    std::vector<double> out;
    double xa = lo;
    double fa = f(xa);
    for (int i = 1; i <= grid; ++i) {
        const double xb = lo + (hi - lo) * i / grid;
        const double fb = f(xb);
        if (fa == 0)
            out.push_back(xa);
        else if ((fa > 0) != (fb > 0) && fb != 0)
            out.push_back(bisect(f, xa, xb));
        xa = xb;
        fa = fb;
    }
    if (fa == 0)
        out.push_back(xa);
    return out;
}

} // namespace oracle
