#pragma once

#include <string>
#include <vector>

namespace slorbit {

enum class PotentialKind { zero, constant, polynomial, sampled };

// The coefficient q of -y'' + q y = lambda y on [0, 1].
struct Potential {
    PotentialKind kind = PotentialKind::zero;
    double c = 0.0;
    std::vector<double> coeffs; // ascending powers of x
    std::vector<double> xs;
    std::vector<double> qs;

    static Potential zero();
    static Potential constant(double c);
    static Potential polynomial(std::vector<double> coeffs);
    static Potential sampled(std::vector<double> xs, std::vector<double> qs);

    // Evaluation without the range check, for integrator inner loops.
    double operator()(double x) const;

    // Interior points where q is only piecewise smooth.
    std::vector<double> breakpoints() const;

    double min_value() const;
};

double eval_potential(const Potential& q, double x);

// Reads a CSV with header "x,q".
Potential load_sampled_potential(const std::string& path);

} // namespace slorbit
