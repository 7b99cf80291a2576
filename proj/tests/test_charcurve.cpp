#include <catch_amalgamated.hpp>

#include "oracle/closed_form.hpp"
#include "slorbit/bc.hpp"
#include "slorbit/charcurve.hpp"

using namespace slorbit;

namespace {

const double pi2 = pi * pi;

Matrix2cd mat(cdouble a, cdouble b, cdouble c, cdouble d)
{
    Matrix2cd m;
    m << a, b, c, d;
    return m;
}

FundamentalData<double> free_data(double lam)
{
    const auto o = oracle::free_solution(lam);
    FundamentalData<double> f;
    f.lambda = lam;
    f.y1 = o.y1;
    f.y2 = o.y2;
    f.dy1 = o.dy1;
    f.dy2 = o.dy2;
    return f;
}

double symmetry_defect(const Matrix2cd& g)
{
    return max_abs(Matrix2cd(g - g.transpose()));
}

} // namespace

TEST_CASE("Gamma at the first Dirichlet eigenvalue", "[charcurve]")
{
    const auto v = gamma(fundamental(Potential::zero(), pi2));
    CHECK(max_abs(Matrix2cd(v.gamma_matrix - mat(0, -1, -1, 0))) < 1e-8);
    CHECK(std::abs(v.kappa_plus + 1.0) < 1e-8);
    CHECK(std::abs(v.kappa_minus - 1.0) < 1e-8);

    const auto exact = gamma(free_data(pi2));
    CHECK(max_abs(Matrix2cd(exact.gamma_matrix - mat(0, -1, -1, 0))) < 1e-14);
}

TEST_CASE("kappa alternates at the Dirichlet eigenvalues", "[charcurve]")
{
    for (int n = 0; n <= 5; ++n) {
        const double lam = (n + 1) * (n + 1) * pi2;
        const auto v = gamma(fundamental(Potential::zero(), lam));
        const double sign = (n % 2 == 0) ? -1.0 : 1.0;
        INFO("n = " << n);
        CHECK(std::abs(v.kappa_plus - sign) <= 1e-6);
        CHECK(std::abs(v.kappa_minus + sign) <= 1e-6);
    }
}

TEST_CASE("Gamma at lambda = pi^2/4", "[charcurve]")
{
    const auto f = free_data(pi2 / 4);
    CHECK(std::abs(f.y1) < 1e-15);
    CHECK(std::abs(f.y2 - 2 / pi) < 1e-15);
    CHECK(std::abs(f.dy1 + pi / 2) < 1e-15);
    CHECK(std::abs(f.dy2) < 1e-15);
    const auto v = gamma(f);
    CHECK(unitarity_defect(v.gamma_matrix) < 1e-14);
    CHECK(symmetry_defect(v.gamma_matrix) < 1e-14);
}

TEST_CASE("Gamma is unitary, symmetric, with kappa as eigenvalues", "[charcurve]")
{
    const std::vector<Potential> qs{Potential::zero(), Potential::constant(-3.0),
                                    Potential::sampled({0, 0.4, 1}, {2, -1, 0.5})};
    for (const auto& q : qs) {
        double worst = 0, worst_kappa = 0, min_den = 1e300;
        for (int k = 0; k < 1000; ++k) {
            const double lam = -50.0 + 2050.0 * k / 999.0;
            const auto v = gamma(fundamental(q, lam));
            worst = std::max({worst, unitarity_defect(v.gamma_matrix), symmetry_defect(v.gamma_matrix)});
            const auto z = orbit_invariants(v.gamma_matrix);
            const double d1 = std::min(std::abs(z[0] - v.kappa_plus), std::abs(z[0] - v.kappa_minus));
            const double d2 = std::min(std::abs(z[1] - v.kappa_plus), std::abs(z[1] - v.kappa_minus));
            worst_kappa = std::max({worst_kappa, d1, d2});
            min_den = std::min(min_den, std::abs(v.denominator));
        }
        CHECK(worst <= 1e-8);
        CHECK(worst_kappa <= 1e-8);
        CHECK(min_den >= 1 - 1e-6);
    }
}

TEST_CASE("Gamma rejects data violating the Wronskian", "[charcurve]")
{
    FundamentalData<double> f;
    f.y1 = 1;
    f.y2 = 1;
    f.dy1 = 1;
    f.dy2 = 1;
    CHECK_THROWS_AS(gamma(f), InvalidInputError);
}

TEST_CASE("Gamma has eigenvalue -1 exactly at Dirichlet eigenvalues", "[charcurve]")
{
    // |kappa+ + 1| |kappa- + 1| sampled on a fine grid: local minima that reach
    // zero sit at (n+1)^2 pi^2 and nowhere else.
    const auto q = Potential::zero();
    auto h = [&](double lam) {
        const auto v = gamma(fundamental(q, lam));
        return std::abs(v.kappa_plus + 1.0) * std::abs(v.kappa_minus + 1.0);
    };
    std::vector<double> zeros;
    const int n = 4000;
    const double lo = 1.0, hi = 400.0;
    double prev2 = h(lo), prev1 = h(lo + (hi - lo) / n);
    for (int k = 2; k <= n; ++k) {
        const double x = lo + (hi - lo) * k / n;
        const double cur = h(x);
        if (prev1 < prev2 && prev1 <= cur && prev1 < 1e-2)
            zeros.push_back(lo + (hi - lo) * (k - 1) / n);
        prev2 = prev1;
        prev1 = cur;
    }
    REQUIRE(zeros.size() == 6);
    for (std::size_t i = 0; i < zeros.size(); ++i)
        CHECK(std::abs(zeros[i] - (i + 1) * (i + 1) * pi2) < 0.2);
}

TEST_CASE("double eigenvalue detection", "[charcurve]")
{
    const auto q = Potential::zero();
    const auto f = fundamental(q, pi2);
    CHECK(is_double_eigenvalue(gamma(f).gamma_matrix, f, 1e-9));
    CHECK_FALSE(is_double_eigenvalue<double>(Matrix2cd::Identity(), f, 1e-6));
    const auto f4 = fundamental(q, 4 * pi2);
    CHECK(is_double_eigenvalue(mat(0, 1, 1, 0), f4, 1e-6));
    CHECK_FALSE(is_double_eigenvalue(mat(0, -1, -1, 0), f4, 1e-6));
    CHECK(is_double_eigenvalue(mat(0, -1, -1, 0), f, 1e-6));
}

TEST_CASE("curve meets the orbit through the periodic condition", "[charcurve]")
{
    const std::array<cdouble, 2> z{1.0, -1.0};
    const auto hits = gamma_meets_orbit(Potential::zero(), z, 1.0, 50.0, 400);
    REQUIRE(hits.size() == 2);
    CHECK(std::abs(hits[0].lambda - pi2) < 1e-6);
    CHECK(std::abs(hits[1].lambda - 4 * pi2) < 1e-6);
    CHECK(hits[0].residual < 1e-6);
    CHECK(hits[0].point == 0);
    CHECK(hits[1].point == 1);

    const auto wide = gamma_meets_orbit(Potential::zero(), z, 1.0, 100.0, 800);
    REQUIRE(wide.size() == 3);
    CHECK(wide[2].point == 0); // Gamma(9 pi^2) = Gamma(pi^2)
}

TEST_CASE("curve misses the orbit O(0,1)", "[charcurve]")
{
    const std::array<cdouble, 2> z{cayley(-1.0), cayley(1.0)};
    CHECK(std::abs(z[0] - cdouble(0, 1)) < 1e-15);
    CHECK(gamma_meets_orbit(Potential::zero(), z, 0.1, 100.0, 800).empty());
    CHECK(gamma_meets_orbit(Potential::zero(), z, 5.0, 5.0 + 1e-9, 2).empty());
    CHECK_THROWS_AS(gamma_meets_orbit(Potential::zero(), z, 5.0, 5.0, 10), InvalidInputError);
}

TEST_CASE("curve tabulation", "[charcurve]")
{
    const auto rows = tabulate_curve(Potential::zero(), 1.0, 100.0, 50);
    REQUIRE(rows.size() == 50);
    CHECK(rows.front().lambda == 1.0);
    CHECK(rows.back().lambda == 100.0);
    CHECK(tabulate_curve(Potential::zero(), 3.0, 3.0, 10).empty());
}
