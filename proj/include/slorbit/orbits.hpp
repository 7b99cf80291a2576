#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slorbit/bc.hpp"
#include "slorbit/charcurve.hpp"
#include "slorbit/fundsol.hpp"
#include "slorbit/potential.hpp"
#include "slorbit/spectrum.hpp"
#include "slorbit/types.hpp"

namespace slorbit {

enum class OrbitKind { hermitian, exceptional };

// Conjugacy class of a boundary condition with two distinct eigenvalues.
// Hermitian orbits have Cayley eigenvalues mu +- nu; exceptional orbits
// have eigenvalues -1 and e^{i alpha}.
struct AdjointOrbit {
    OrbitKind kind = OrbitKind::hermitian;
    double mu = 0.0;
    double nu = 1.0;
    double alpha = 0.0;

    static AdjointOrbit hermitian(double mu, double nu);
    static AdjointOrbit exceptional(double alpha);

    // zeta_1, zeta_2: cayley(mu + nu), cayley(mu - nu), or -1, e^{i alpha}.
    std::array<cdouble, 2> invariants() const;
    std::string describe() const;
};

// Hermitian points use (theta, gamma); exceptional points use (t, gamma)
// with t = cos(alpha/2) sin(tau), and tau is kept in sync.
struct OrbitPoint {
    AdjointOrbit orbit;
    double theta = 0.0;
    double gamma = 0.0;
    double t = 0.0;
    double tau = 0.0;

    static OrbitPoint on_hermitian(const AdjointOrbit& o, double theta, double gamma);
    static OrbitPoint on_exceptional(const AdjointOrbit& o, double t, double gamma);
    static OrbitPoint on_exceptional_tau(const AdjointOrbit& o, double tau, double gamma);

    // theta for hermitian orbits, tau for exceptional ones.
    double coordinate() const;
};

Matrix2cd orbit_point(const OrbitPoint& p);
HermitianBC<double> hermitian_point(const OrbitPoint& p);

// Inverse of orbit_point; throws InvalidInputError if u is not on the orbit.
OrbitPoint locate_on_orbit(const AdjointOrbit& o, const Matrix2cd& u, double tol = 1e-8);

// Geodesic distance on the orbit sphere to the real circle gamma in {0, pi}.
double distance_to_real_circle(const OrbitPoint& p);

// Point at angle phi in [0, 2pi) along the real circle, starting at the pole
// theta = 0 (hermitian) or tau = pi/2 (exceptional).
OrbitPoint real_circle_point(const AdjointOrbit& o, double phi);

// Coefficients (1, y1, y2, dy1, dy2) of the characteristic equation at p.
std::array<double, 5> char_coefficients(const OrbitPoint& p);

// Vanishes exactly when lambda = f.lambda is an eigenvalue at p.
double char_on_orbit(const OrbitPoint& p, const FundamentalData<double>& f, double* derivative = nullptr);

// Nonpositive exactly on the lambda-ranges of the eigenvalue branches.
double critical_function(const AdjointOrbit& o, const FundamentalData<double>& f,
                         double* derivative = nullptr);

// The point on the real circle where f.lambda is an extreme eigenvalue,
// assuming critical_function vanishes at f.lambda.
OrbitPoint critical_point(const AdjointOrbit& o, const FundamentalData<double>& f);

// Below every eigenvalue of every point of the orbit.
double orbit_lower_bound(const Potential& q, const AdjointOrbit& o, double tol = default_tol);

std::vector<CurveHit> orbit_meets_gamma(const Potential& q, const AdjointOrbit& o, double lo, double hi,
                                        double tol = default_tol);

struct LambdaSurface {
    AdjointOrbit orbit;
    std::vector<double> coords; // theta or tau
    std::vector<double> gammas;
    std::size_t n_max = 0;
    // values[(i * gammas.size() + j) * (n_max + 1) + n]
    std::vector<double> values;

    double at(std::size_t i, std::size_t j, std::size_t n) const;
    OrbitPoint point(std::size_t i, std::size_t j) const;
    std::pair<std::size_t, std::size_t> argmin(std::size_t n) const;
    std::pair<std::size_t, std::size_t> argmax(std::size_t n) const;
    double min(std::size_t n) const;
    double max(std::size_t n) const;
};

// lambda_0..lambda_{n_max} at each (coordinate, gamma) grid point; gamma
// samples include 0 and pi when n_gamma is even.
LambdaSurface lambda_surface(const Potential& q, const AdjointOrbit& o, std::size_t n_max,
                             std::size_t n_coord, std::size_t n_gamma, double tol = default_tol);

// lambda_0..lambda_{n_max} at arbitrary points of one orbit.
std::vector<std::vector<double>> orbit_eigenvalues(const Potential& q, const AdjointOrbit& o,
                                                   const std::vector<OrbitPoint>& points, std::size_t n_max,
                                                   double tol = default_tol);

struct OrbitRange {
    std::size_t n = 0;
    double a_n = 0.0; // NaN when outside a search window
    double b_n = 0.0;
    OrbitPoint minimizer;
    OrbitPoint maximizer;
    bool touching = false; // an endpoint is a meeting point with the curve
};

struct CriticalRoot {
    double lambda = 0.0;
    bool lower = true; // a_n rather than b_n
    std::size_t n = 0;
    OrbitPoint point;
};

// Simple roots of the critical-value equation in [lo, hi], each classified
// as a_n or b_n through the eigenvalue index at its critical point.
std::vector<CriticalRoot> critical_roots(const Potential& q, const AdjointOrbit& o, double lo, double hi,
                                         double tol = default_tol);

struct CriticalOptions {
    double tol = default_tol;
    // Search only this window; ranges are then indexed but may be partial.
    std::optional<std::pair<double, double>> window;
    // Continue when the orbit meets the curve, using each meeting value as
    // the shared endpoint b_k = a_{k+1}.
    bool allow_meeting = false;
};

// [a_n, b_n] for n <= n_max.
std::vector<OrbitRange> critical_values(const Potential& q, const AdjointOrbit& o, std::size_t n_max,
                                        const CriticalOptions& opts = {});

enum class LevelShape { empty, point, circle };

struct LevelSet {
    double kappa = 0.0;
    LevelShape shape = LevelShape::empty;
    double x = 0.0;
    double x_imag = 0.0;
    double complement = 0.0; // 1 - x from its own closed form
    std::optional<OrbitPoint> point;
    std::array<cdouble, 2> rho{}; // eigenvalues of Gamma(kappa)
    std::array<cdouble, 2> zeta{};
    Matrix2cd frame = Matrix2cd::Identity(); // columns: eigenvectors for rho

    // U(x, gamma) in the frame diagonalizing Gamma(kappa).
    Matrix2cd member(double gamma) const;
};

LevelSet level_set(const Potential& q, const AdjointOrbit& o, double kappa, double tol = default_tol);

// Same construction for given eigenvalue pairs and frame.
LevelSet level_set_from(const std::array<cdouble, 2>& rho, const Matrix2cd& frame,
                        const std::array<cdouble, 2>& zeta, double kappa = 0.0);

std::string to_string(LevelShape s);

struct Counterexample {
    std::size_t n = 0;
    double coordinate = 0.0;
    double gamma = 0.0;
    double value = 0.0;
    double bound = 0.0;
};

struct TheoremCheck {
    std::string name;
    bool passed = true;
    bool skipped = false;
    bool informational = false;
    std::string detail;
    std::vector<Counterexample> counterexamples;
};

struct GridSpec {
    std::size_t n_coord = 32;
    std::size_t n_gamma = 32;
    std::size_t n_circle = 64;
};

struct OrbitReport {
    AdjointOrbit orbit;
    std::size_t n_max = 0;
    bool hypothesis_ok = true;
    std::vector<CurveHit> hits;
    std::vector<OrbitRange> ranges;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double epsilon = 1e-4;
    std::vector<TheoremCheck> checks;

    bool passed() const;
};

OrbitReport verify_orbit_theorems(const Potential& q, const AdjointOrbit& o, std::size_t n_max,
                                  const GridSpec& grid = {}, double tol = default_tol);

// Separated conditions (pi - beta, beta), the diagonal circle through the
// Dirichlet condition.
struct DiagonalScan {
    std::vector<double> betas; // ascending, in (0, pi]
    std::size_t n_max = 0;
    std::vector<double> values; // values[k * (n_max + 1) + n]
    // (k, n) where lambda_n fails to rise by more than the tolerance from betas[k].
    std::vector<std::pair<std::size_t, std::size_t>> inversions;

    double at(std::size_t k, std::size_t n) const { return values[k * (n_max + 1) + n]; }
};

DiagonalScan diagonal_scan(const Potential& q, const std::vector<double>& betas, std::size_t n_max,
                           double tol = default_tol, double inversion_tol = 1e-10);

} // namespace slorbit
