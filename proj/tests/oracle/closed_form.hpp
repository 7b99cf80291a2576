#pragma once

#include <functional>
#include <vector>

namespace oracle {

// Boundary data of q = 0 at x = 1, from cos/sin or cosh/sinh.
struct Free {
    double y1, y2, dy1, dy2;
    double d_y1, d_y2, d_dy1, d_dy2;
};

Free free_solution(double lambda);

// Plain bisection to |b - a| <= tol * max(1, |a|).
double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-15);

// All sign changes of f on a uniform grid over [lo, hi], each bisected.
std::vector<double> sign_change_roots(const std::function<double(double)>& f, double lo, double hi,
                                      int grid);

} // namespace oracle
