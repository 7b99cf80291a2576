// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracle/closed_form.hpp"
#include "oracle/fd_oracle.hpp"
#include "slorbit/orbits.hpp"

using namespace slorbit;
using nlohmann::json;

namespace {

const double pi2 = pi * pi;
namespace fs = std::filesystem;

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why)
    {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v)
{
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Potential sampled_q()
{
    return Potential::sampled({0.0, 0.25, 0.5, 0.75, 1.0}, {3.0, -2.0, 1.0, 4.0, 0.0});
}

fs::path workdir()
{
    const fs::path d = fs::temp_directory_path() / ("slorbit_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(SLORBIT_CLI) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<double>> read_csv(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            row.push_back(std::strtod(cell.c_str(), nullptr));
        rows.push_back(row);
    }
    return rows;
}

void write_json(const fs::path& p, const json& j)
{
    std::ofstream(p) << j.dump(2);
}

Matrix2cd random_unitary(std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    Matrix2cd z;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            z(i, j) = cdouble(n(rng), n(rng));
    Eigen::HouseholderQR<Matrix2cd> qr(z);
    return qr.householderQ();
}

// Roots of the two signed forms of a closed-form critical-value equation.
std::vector<double> both_signs(const std::function<double(double, double)>& f, double lo, double hi)
{
    std::vector<double> out;
    for (double s : {1.0, -1.0}) {
        const auto r = oracle::sign_change_roots([&](double l) { return f(l, s); }, lo, hi, 40000);
        out.insert(out.end(), r.begin(), r.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Verdict dirichlet_closed_form(const fs::path& dir)
{
    Verdict v;
    write_json(dir / "c1.json", {{"potential", {{"kind", "zero"}}},
                                 {"bc", {{"separated", {{"alpha", 0.0}, {"beta", pi}}}}},
                                 {"n_max", 9}});
    const auto t0 = std::chrono::steady_clock::now();
    const int code = run_cli("eigs --config " + (dir / "c1.json").string() + " --out " + (dir / "c1.csv").string());
    const double secs = seconds_since(t0);
    v.require(code == 0, "exit code " + std::to_string(code));
    const auto rows = read_csv(dir / "c1.csv");
    v.require(rows.size() == 10, std::to_string(rows.size()) + " rows");
    double worst = 0;
    for (std::size_t n = 0; n < rows.size(); ++n)
        worst = std::max(worst, std::abs(rows[n][1] - (n + 1) * (n + 1) * pi2) / ((n + 1) * (n + 1) * pi2));
    v.require(worst <= 1e-8, "relative error " + num(worst));
    v.require(secs < 5, "runtime " + num(secs) + " s");
    if (v.pass)
        v.detail = "max relative error " + num(worst) + ", " + num(secs) + " s";
    return v;
}

Verdict curve_values()
{
    Verdict v;
    const auto q = Potential::zero();
    double kap = 0;
    for (int n = 0; n <= 5; ++n) {
        const auto g = gamma(fundamental(q, (n + 1) * (n + 1) * pi2));
        const double s = n % 2 == 0 ? -1.0 : 1.0;
        kap = std::max({kap, std::abs(g.kappa_plus - s), std::abs(g.kappa_minus + s)});
    }
    double defect = 0;
    for (int k = 0; k < 1000; ++k) {
        const double l = -50.0 + 2050.0 * k / 999.0;
        const Matrix2cd m = gamma(fundamental(q, l)).gamma_matrix;
        defect = std::max({defect, unitarity_defect(m), std::abs(m(0, 1) - m(1, 0))});
    }
    v.require(kap <= 1e-6, "kappa error " + num(kap));
    v.require(defect <= 1e-8, "unitarity/symmetry defect " + num(defect));
    if (v.pass)
        v.detail = "kappa error " + num(kap) + ", defect " + num(defect);
    return v;
}

Verdict hermitian_range(const fs::path& dir)
{
    // The orbit meets the curve at lambda = 0 (b_0 = a_1 = 0), so the windowed
    // ranges are checked against 2 cos k + k sin k = +-2 for lambda > 0.
    Verdict v;
    const double lo = 0.01, hi = 400.0;
    write_json(dir / "c3.json", {{"potential", {{"kind", "zero"}}},
                                 {"orbit", {{"kind", "hermitian"}, {"parameters", {{"mu", 1.0}, {"nu", 1.0}}}}},
                                 {"n_max", 6},
                                 {"grid", {{"n_coord", 8}, {"n_gamma", 8}, {"n_circle", 32}}}});
    const int code = run_cli("orbit-range --config " + (dir / "c3.json").string() + " --window 0.01:400 --out " +
                             (dir / "c3.csv").string());
    v.require(code == 0, "exit code " + std::to_string(code));
    std::vector<double> got;
    for (const auto& r : read_csv(dir / "c3.csv"))
        for (double x : {r[1], r[2]})
            if (std::isfinite(x))
                got.push_back(x);
    const auto expect = both_signs(
        [](double l, double s) {
            const double k = std::sqrt(l);
            return 2 * std::cos(k) + k * std::sin(k) - 2 * s;
        },
        lo, hi);
    v.require(got.size() == expect.size(),
              std::to_string(got.size()) + " roots against " + std::to_string(expect.size()));
    double worst = 0;
    for (std::size_t k = 0; k < std::min(got.size(), expect.size()); ++k)
        worst = std::max(worst, std::abs(got[k] - expect[k]) / std::max(1.0, expect[k]));
    v.require(worst <= 1e-8, "root error " + num(worst));
    for (std::size_t k = 1; k < got.size(); ++k)
        v.require(got[k - 1] < got[k], "interlacing fails at root " + std::to_string(k));

    CriticalOptions m;
    m.allow_meeting = true;
    const auto full = critical_values(Potential::zero(), AdjointOrbit::hermitian(1, 1), 2, m);
    v.require(full.size() == 3, "full range count");
    if (full.size() == 3) {
        v.require(full[0].a_n < full[0].b_n && full[1].b_n < full[2].a_n && full[2].a_n < full[2].b_n,
                  "full interlacing");
        v.require(full[0].touching && std::abs(full[0].b_n) < 1e-6 && std::abs(full[1].a_n) < 1e-6,
                  "meeting point at 0 not found");
    }
    if (v.pass)
        v.detail = std::to_string(got.size()) + " roots in (0.01, 400), max error " + num(worst) +
                   "; b0 = a1 = 0 where the orbit meets the curve";
    return v;
}

Verdict exceptional_range()
{
    Verdict v;
    const auto r = critical_values(Potential::zero(), AdjointOrbit::exceptional(pi / 2), 3);
    const auto expect = both_signs(
        [](double l, double s) {
            const double k = std::sqrt(l);
            return std::cos(k) + std::sin(k) / k - s;
        },
        0.01, r.back().b_n + 1);
    v.require(expect.size() == 2 * r.size(), "root count");
    double worst = 0, tmax = 0, gmax = 0;
    for (std::size_t n = 0; n < r.size() && 2 * n + 1 < expect.size(); ++n) {
        worst = std::max({worst, rel(r[n].a_n, expect[2 * n]), rel(r[n].b_n, expect[2 * n + 1])});
        for (const auto& p : {r[n].minimizer, r[n].maximizer}) {
            tmax = std::max(tmax, std::abs(p.t));
            gmax = std::max(gmax, std::min(std::abs(p.gamma), std::abs(p.gamma - pi)));
        }
    }
    v.require(worst <= 1e-8, "root error " + num(worst));
    v.require(tmax <= 1e-6, "|t| " + num(tmax));
    v.require(gmax <= 1e-6, "gamma offset " + num(gmax));
    if (v.pass)
        v.detail = "max error " + num(worst) + ", |t| <= " + num(tmax);
    return v;
}

Verdict range_containment()
{
    Verdict v;
    const double eps = 1e-4;
    int combos = 0, touching = 0;
    for (const auto& q : {Potential::zero(), Potential::constant(5.0), sampled_q()}) {
        for (const auto& o : {AdjointOrbit::hermitian(0, 1), AdjointOrbit::hermitian(1, 1),
                              AdjointOrbit::exceptional(pi / 2), AdjointOrbit::exceptional(3 * pi / 2)}) {
            CriticalOptions opts;
            opts.allow_meeting = true;
            const auto r = critical_values(q, o, 3, opts);
            const auto s = lambda_surface(q, o, 3, 32, 32);
            const double cell = (s.coords[1] - s.coords[0]) * (o.kind == OrbitKind::hermitian ? 2 : 1) +
                                (s.gammas[1] - s.gammas[0]);
            for (std::size_t n = 0; n <= 3; ++n) {
                touching += r[n].touching;
                const double slack = eps * std::max(1.0, std::abs(r[n].b_n));
                v.require(s.min(n) >= r[n].a_n - slack && s.max(n) <= r[n].b_n + slack,
                          o.describe() + " n=" + std::to_string(n) + " leaves [a_n, b_n]");
                for (const auto& [i, j] : {s.argmin(n), s.argmax(n)})
                    v.require(distance_to_real_circle(s.point(i, j)) <= cell,
                              o.describe() + " n=" + std::to_string(n) + " extremum off the real circle");
            }
            ++combos;
        }
    }
    if (v.pass)
        v.detail = std::to_string(combos) + " orbit/potential pairs, " + std::to_string(touching) +
                   " endpoint(s) at meeting points";
    return v;
}

Verdict comparison_bounds()
{
    Verdict v;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> mu(-3, 3), nu(0.1, 3), th(0, pi / 2), ga(0, 2 * pi), al(0, pi);
    int hv = 0, ev = 0;
    for (const auto& q : {Potential::zero(), sampled_q()}) {
        for (int k = 0; k < 50; ++k) {
            const auto o = AdjointOrbit::hermitian(mu(rng), nu(rng));
            const auto b = robin_bracket(q, o.mu, o.nu, 5);
            const auto ev_n = eigenvalues(q, orbit_point(OrbitPoint::on_hermitian(o, th(rng), ga(rng))), 5).indexed();
            for (std::size_t n = 0; n <= 5; ++n) {
                const double t = 1e-8 * std::max(1.0, std::abs(ev_n[n]));
                hv += ev_n[n] < b.lower[n] - t || ev_n[n] > b.upper[n] + t;
            }
        }
        const auto neumann = reference_spectra(q, 5).neumann;
        for (int k = 0; k < 50; ++k) {
            const auto o = AdjointOrbit::exceptional(al(rng));
            std::uniform_real_distribution<double> tau(-pi / 2, pi / 2);
            const auto ev_n =
                eigenvalues(q, orbit_point(OrbitPoint::on_exceptional_tau(o, tau(rng), ga(rng))), 5).indexed();
            for (std::size_t n = 0; n <= 5; ++n)
                ev += ev_n[n] < neumann[n] - 1e-8 * std::max(1.0, std::abs(ev_n[n]));
        }
    }
    v.require(hv == 0, std::to_string(hv) + " Robin bracket violations");
    v.require(ev == 0, std::to_string(ev) + " Neumann bound violations");
    if (v.pass)
        v.detail = "200 points over two potentials, no violations";
    return v;
}

Verdict oracle_equivalence()
{
    Verdict v;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0, 1), ang(-pi, pi);
    const auto q = sampled_q();
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const Matrix2cd u = k % 2 == 0 ? random_unitary(rng)
                                       : from_u0_param(U0Param<double>{uni(rng), ang(rng), ang(rng)});
        const auto ev = eigenvalues(q, u, 5).indexed();
        const auto fd = oracle::fd_eigenvalues(q, u, 6, 4000);
        for (std::size_t n = 0; n < 6; ++n)
            worst = std::max(worst, rel(ev[n], fd[n]));
    }
    const double secs = seconds_since(t0);
    v.require(worst <= 1e-3, "relative error " + num(worst));
    v.require(secs < 60, "runtime " + num(secs) + " s");
    if (v.pass)
        v.detail = "max relative error " + num(worst) + ", " + num(secs) + " s";
    return v;
}

Verdict level_sets()
{
    Verdict v;
    const auto worked = level_set_from({cdouble(1, 0), cdouble(-1, 0)}, Matrix2cd::Identity(),
                                       {std::polar(1.0, pi / 3), std::polar(1.0, -pi / 3)});
    v.require(worked.shape == LevelShape::circle && std::abs(worked.x - 0.5) < 1e-12,
              "worked example gives x = " + num(worked.x));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> kap(-5, 200), par(-2, 2), al(0.1, 2 * pi - 0.1);
    const auto q = sampled_q();
    int circles = 0, pairs = 0;
    double worst_member = 0;
    while (pairs < 10) {
        const auto o = pairs % 2 == 0 ? AdjointOrbit::hermitian(par(rng), std::abs(par(rng)) + 0.1)
                                      : AdjointOrbit::exceptional(al(rng));
        const double kappa = kap(rng);
        const auto ls = level_set(q, o, kappa);
        if (ls.shape == LevelShape::point)
            continue;
        ++pairs;
        const Matrix2cd g = gamma(fundamental(q, kappa)).gamma_matrix;
        Eigen::ComplexEigenSolver<Matrix2cd> es(g);
        const int first = std::abs(es.eigenvalues()(0) - ls.rho[0]) < std::abs(es.eigenvalues()(1) - ls.rho[0]) ? 0 : 1;
        Matrix2cd frame;
        frame.col(0) = es.eigenvectors().col(first).normalized();
        frame.col(1) = es.eigenvectors().col(1 - first).normalized();
        // Brute force: |det(U(x, gamma) - Gamma)| over a 100 x 100 grid.
        double best = 1e300, best_x = -1, spread = 0;
        for (int i = 0; i < 100; ++i) {
            const double x = i / 99.0;
            double rlo = 1e300, rhi = 0;
            for (int j = 0; j < 100; ++j) {
                Vector2cd a(std::sqrt(x), std::sqrt(1 - x) * std::polar(1.0, 2 * pi * j / 100));
                Vector2cd b(-std::conj(a(1)), std::conj(a(0)));
                const Matrix2cd w = ls.zeta[0] * a * a.adjoint() + ls.zeta[1] * b * b.adjoint();
                const double d = std::abs(Matrix2cd(frame * w * frame.adjoint() - g).determinant());
                rlo = std::min(rlo, d);
                rhi = std::max(rhi, d);
            }
            spread = std::max(spread, rhi - rlo);
            if (rlo < best) {
                best = rlo;
                best_x = x;
            }
        }
        v.require(spread < 1e-8, "determinant depends on gamma");
        if (ls.shape == LevelShape::circle) {
            ++circles;
            v.require(std::abs(best_x - ls.x) <= 1.0 / 99 + 1e-9, "grid zero at x = " + num(best_x) +
                                                                       " against " + num(ls.x));
            for (int j = 0; j < 8; ++j) {
                SpectrumOptions opts;
                opts.upper_limit = kappa + 1.0;
                const auto ev = eigenvalues(q, ls.member(2 * pi * j / 8), 0, opts).eigenvalues;
                double near = 1e300;
                for (double e : ev)
                    near = std::min(near, std::abs(e - kappa) / std::max(1.0, std::abs(kappa)));
                worst_member = std::max(worst_member, near);
            }
        } else {
            v.require(best_x == 0.0 || best_x == 1.0, "empty level set with an interior grid zero");
        }
    }
    v.require(circles > 0, "no circle among the pairs");
    v.require(worst_member <= 1e-6, "member eigenvalue error " + num(worst_member));
    if (v.pass)
        v.detail = std::to_string(circles) + " circles among 10 pairs, member error " + num(worst_member);
    return v;
}

Verdict diagonal_monotone()
{
    Verdict v;
    std::vector<double> betas;
    for (int k = 1; k <= 128; ++k)
        betas.push_back(pi * k / 128);
    std::size_t inv = 0;
    for (const auto& q : {Potential::zero(), Potential::constant(-3.0), sampled_q()})
        inv += diagonal_scan(q, betas, 4, default_tol, 1e-10).inversions.size();
    v.require(inv == 0, std::to_string(inv) + " inversions");
    if (v.pass)
        v.detail = "3 potentials x 128 beta x n <= 4, no inversions";
    return v;
}

Verdict periodic_double()
{
    Verdict v;
    const auto q = Potential::zero();
    const Matrix2cd u = from_coupled(CoupledBC<double>{0.0, 1.0, 0.0, 0.0, 1.0});
    const auto s = eigenvalues(q, u, 2);
    bool found = false;
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
        found = found || (rel(s.eigenvalues[i], 4 * pi2) < 1e-8 && s.multiplicities[i] == 2);
    v.require(found, "4 pi^2 not reported with multiplicity 2");
    const double dist = max_abs(Matrix2cd(u - gamma(fundamental(q, 4 * pi2)).gamma_matrix));
    v.require(dist <= 1e-6, "curve distance " + num(dist));
    if (v.pass)
        v.detail = "multiplicity 2, |U - Gamma| = " + num(dist);
    return v;
}

} // namespace

int main()
{
    const fs::path dir = workdir();
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"Dirichlet closed form", [&] { return dirichlet_closed_form(dir); }},
        {"characteristic-curve values", curve_values},
        {"hermitian orbit range equation", [&] { return hermitian_range(dir); }},
        {"exceptional orbit critical values", exceptional_range},
        {"range containment", range_containment},
        {"comparison bounds", comparison_bounds},
        {"finite-difference oracle", oracle_equivalence},
        {"level sets", level_sets},
        {"diagonal monotonicity", diagonal_monotone},
        {"double eigenvalue detection", periodic_double},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        failures += !v.pass;
        std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    fs::remove_all(dir);
    return failures;
}
