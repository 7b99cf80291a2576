#include "slorbit/spectrum.hpp"

#include <algorithm>
#include <limits>

namespace slorbit {

std::string to_string(Certification c)
{
    switch (c) {
    case Certification::prufer:
        return "prufer";
    case Certification::robin_bracketed:
        return "robin_bracketed";
    case Certification::scan_only:
        return "scan_only";
    }
    return "scan_only";
}

std::vector<double> SpectrumSlice::indexed() const
{
    std::vector<double> out;
    for (std::size_t k = 0; k < eigenvalues.size(); ++k)
        for (int m = 0; m < multiplicities[k]; ++m)
            out.push_back(eigenvalues[k]);
    return out;
}

std::size_t SpectrumSlice::count() const
{
    std::size_t n = 0;
    for (int m : multiplicities)
        n += std::size_t(m);
    return n;
}

namespace {

double principal(double a)
{
    return std::remainder(a, 2 * pi);
}

std::pair<double, double> su2_phases(const Matrix2cd& w)
{
    const double omega = std::arg(w.determinant()) / 2;
    const Matrix2cd v = w * std::polar(1.0, -omega);
    const cdouble a = (v(0, 0) + std::conj(v(1, 1))) / 2.0;
    const cdouble b = (v(0, 1) - std::conj(v(1, 0))) / 2.0;
    const double eta = std::atan2(std::sqrt(a.imag() * a.imag() + std::norm(b)), a.real());
    return {omega + eta, omega - eta};
}

double scale_of(double x)
{
    return std::max(1.0, std::abs(x));
}

// Counts eigenvalues through the winding of the phases of Gamma^* U.
// M = (arg det U + 2 arg D - sum of phases in [0, 2pi)) / 2pi is an integer
// that drops by one each time an eigenvalue is passed.
class PhaseCounter {
public:
    struct Sample {
        double lambda;
        cdouble d;
        double lift;
        long m;
    };

    PhaseCounter(const Potential& q, const Matrix2cd& u, double tol)
        : q_(q), u_(u), tol_(tol), arg_det_u_(std::arg(u.determinant())) {}

    Sample at(double lambda) const { return make(lambda, nullptr, nullptr); }

    Sample after(double lambda, const Sample& ref, double* delta = nullptr) const
    {
        return make(lambda, &ref, delta);
    }

private:
    Sample make(double lambda, const Sample* ref, double* delta) const
    {
        const auto f = fundamental(q_, lambda, tol_);
        const auto g = gamma(f);
        Sample s;
        s.lambda = lambda;
        s.d = g.denominator;
        const double step = ref ? std::arg(s.d / ref->d) : 0.0;
        s.lift = ref ? ref->lift + step : std::arg(s.d);
        if (delta)
            *delta = step;
        s.m = winding_index(u_, g, s.lift, arg_det_u_);
        return s;
    }

    const Potential& q_;
    Matrix2cd u_;
    double tol_;
    double arg_det_u_;
};

struct Root {
    double lambda;
    int multiplicity;
};

class Solver {
public:
    Solver(const Potential& q, const Matrix2cd& u, double tol)
        : q_(q), u_(u), tol_(tol), counter_(q, u, tol), cls_(classify(u))
    {
        if (cls_.stratum == Stratum::U1)
            h_ = to_hermitian(u);
    }

    // Samples from start until the count reaches target and lambda passes
    // `until`, or until `stop` is reached; one further step is always taken.
    std::vector<PhaseCounter::Sample> scan(double start, long target, double until,
                                           std::optional<double> stop) const
    {
        std::vector<PhaseCounter::Sample> s{counter_.at(start)};
        const double cap = 1e9;
        double h = std::min(1.0, pi * pi / 4);
        const double qmin = q_.min_value();
        bool extra = false;
        for (;;) {
            const auto& last = s.back();
            const bool reached = s.front().m - last.m >= target && last.lambda >= until;
            if (stop && last.lambda >= *stop)
                break;
            if (reached) {
                if (extra)
                    break;
                extra = true;
            }
            if (last.lambda > cap)
                throw IncompleteSpectrumError("eigenvalue scan exceeded lambda = 1e9", {}, {});
            h = std::min(h, std::max(1.0, 0.5 * std::sqrt(std::abs(last.lambda - qmin))));
            double next = last.lambda + h;
            if (stop)
                next = std::min(next, *stop);
            double delta = 0, d1 = 0;
            const auto cand = counter_.after(next, last, &delta);
            const auto mid = counter_.after(0.5 * (last.lambda + next), last, &d1);
            const double d2 = std::arg(cand.d / mid.d);
            auto bad = [](double d) { return d < -pi / 4 || d > 1e-9; };
            if (bad(delta) || bad(d1) || bad(d2) || std::abs(d1 + d2 - delta) > 1e-6) {
                h /= 2;
                if (h < 1e-12 * scale_of(last.lambda))
                    throw IntegrationError("eigenvalue scan step collapsed near lambda = " +
                                           std::to_string(last.lambda));
                continue;
            }
            s.push_back(mid);
            s.push_back(cand);
            if (std::abs(delta) < pi / 16)
                h *= 2;
        }
        return s;
    }

    void isolate(const PhaseCounter::Sample& a, const PhaseCounter::Sample& b,
                 std::vector<Root>& roots) const
    {
        const long c = a.m - b.m;
        if (c <= 0)
            return;
        if (c == 1) {
            roots.push_back({refine_simple(a, b), 1});
            return;
        }
        if (b.lambda - a.lambda <= 1e-12 * scale_of(a.lambda)) {
            const double mid = 0.5 * (a.lambda + b.lambda);
            if (is_double_eigenvalue(u_, fundamental(q_, mid, tol_), double_root_tol)) {
                roots.push_back({mid, 2});
            } else {
                for (long k = 0; k < c; ++k)
                    roots.push_back({mid, 1});
            }
            return;
        }
        const auto mid = counter_.after(0.5 * (a.lambda + b.lambda), a);
        isolate(a, mid, roots);
        isolate(mid, b, roots);
    }

private:
    double value(const FundamentalData<double>& f, double* deriv) const
    {
        if (cls_.stratum == Stratum::U1) {
            if (deriv)
                *deriv = char_real_u1_derivative(h_, f);
            return char_real_u1(h_, f);
        }
        return char_real(u_, f, deriv);
    }

    double refine_simple(const PhaseCounter::Sample& a, const PhaseCounter::Sample& b) const
    {
        double lo = a.lambda, hi = b.lambda;
        double flo = value(fundamental(q_, lo, tol_), nullptr);
        double fhi = value(fundamental(q_, hi, tol_), nullptr);
        if (flo == 0)
            return lo;
        if (fhi == 0)
            return hi;
        if ((flo > 0) == (fhi > 0))
            return refine_by_count(a, b);

        double x = lo - flo * (hi - lo) / (fhi - flo);
        if (!(x > lo && x < hi))
            x = 0.5 * (lo + hi);
        double last_abs = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 100; ++it) {
            double df = 0;
            const double fx = value(fundamental_with_derivative(q_, x, tol_), &df);
            if (fx == 0)
                return x;
            if ((fx > 0) == (flo > 0)) {
                lo = x;
                flo = fx;
            } else {
                hi = x;
                fhi = fx;
            }
            double xn = x - fx / df;
            if (!std::isfinite(xn) || !(xn > lo && xn < hi) || std::abs(fx) > 0.5 * last_abs)
                xn = 0.5 * (lo + hi);
            last_abs = std::abs(fx);
            if (std::abs(xn - x) <= 1e-14 * scale_of(x) || hi - lo <= 1e-14 * scale_of(x))
                return xn;
            x = xn;
        }
        return x;
    }

    double refine_by_count(PhaseCounter::Sample a, PhaseCounter::Sample b) const
    {
        while (b.lambda - a.lambda > 1e-13 * scale_of(a.lambda)) {
            const auto mid = counter_.after(0.5 * (a.lambda + b.lambda), a);
            if (a.m - mid.m >= 1)
                b = mid;
            else
                a = mid;
        }
        return 0.5 * (a.lambda + b.lambda);
    }

    const Potential& q_;
    Matrix2cd u_;
    double tol_;
    PhaseCounter counter_;
    Classification cls_;
    HermitianBC<double> h_{};
};

double robin_ground_bound(const Potential& q, double c, double tol)
{
    if (c <= 0)
        return prufer_separated(q, {pi / 2, pi / 2}, 0, tol);
    if (c > 50)
        return q.min_value() - c * c - 2 * c - 1;
    return prufer_separated(q, robin(c), 0, tol);
}

std::vector<Root> merge_doubles(std::vector<Root> roots, const Potential& q, const Matrix2cd& u,
                                double tol)
{
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.lambda < b.lambda; });
    std::vector<Root> out;
    for (const auto& r : roots) {
        if (!out.empty() && out.back().multiplicity == 1 && r.multiplicity == 1 &&
            std::abs(r.lambda - out.back().lambda) <= 1e-7 * scale_of(r.lambda)) {
            const double mid = 0.5 * (r.lambda + out.back().lambda);
            if (is_double_eigenvalue(u, fundamental(q, mid, tol), double_root_tol)) {
                out.back() = {mid, 2};
                continue;
            }
        }
        out.push_back(r);
    }
    return out;
}

} // namespace

long winding_index(const Matrix2cd& u, const CharCurveValue<double>& g, double lift, double arg_det_u)
{
    const auto [p1, p2] = su2_phases(Matrix2cd(g.gamma_matrix.adjoint() * u));
    const double sum = wrap_two_pi(p1) + wrap_two_pi(p2);
    return std::lround((arg_det_u + 2 * lift - sum) / (2 * pi));
}

std::array<double, 2> eigenphases(const Matrix2cd& u, const FundamentalData<double>& f)
{
    const auto g = gamma(f);
    const auto [p1, p2] = su2_phases(Matrix2cd(g.gamma_matrix.adjoint() * u));
    std::array<double, 2> out{principal(p1), principal(p2)};
    for (double& p : out)
        if (p <= -pi)
            p += 2 * pi;
    std::sort(out.begin(), out.end());
    return out;
}

double prufer_angle(const Potential& q, double alpha, double lambda, double tol, double* derivative)
{
    using Vec = Eigen::Vector2d;
    auto rhs = [&](double x, const Vec& s) {
        const double v = lambda - q(x);
        const double sn = std::sin(s[0]), cs = std::cos(s[0]);
        return Vec(cs * cs + v * sn * sn, sn * sn + s[1] * 2 * sn * cs * (v - 1));
    };
    const Vec end = ode::integrate<double, 2>(rhs, Vec(alpha, 0.0), 0.0, 1.0, tol, q.breakpoints());
    if (derivative)
        *derivative = end[1];
    return end[0];
}

double prufer_separated(const Potential& q, const SeparatedBC<double>& s, std::size_t n, double tol,
                        std::optional<double> below)
{
    if (!(s.alpha >= 0 && s.alpha < pi) || !(s.beta > 0 && s.beta <= pi))
        throw InvalidInputError("separated angles must satisfy alpha in [0,pi), beta in (0,pi]");
    const double target = s.beta + double(n) * pi;
    auto phi = [&](double lam, double* d) { return prufer_angle(q, s.alpha, lam, tol, d) - target; };

    double lo = below ? *below : std::min(q.min_value(), 0.0) - 1.0;
    double flo = phi(lo, nullptr);
    while (flo >= 0) {
        lo = 2 * lo - 10;
        flo = phi(lo, nullptr);
    }
    double hi = std::max(lo, 0.0) + 1.0;
    double fhi = phi(hi, nullptr);
    while (fhi <= 0) {
        lo = hi;
        flo = fhi;
        hi = hi + 2 * (hi - std::min(lo, 0.0)) + 1;
        fhi = phi(hi, nullptr);
    }

    double x = lo - flo * (hi - lo) / (fhi - flo);
    for (int it = 0; it < 200; ++it) {
        double d = 0;
        const double fx = phi(x, &d);
        if (fx == 0)
            return x;
        if (fx < 0)
            lo = x;
        else
            hi = x;
        double xn = x - fx / d;
        if (!std::isfinite(xn) || !(xn > lo && xn < hi))
            xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-14 * scale_of(x) || hi - lo <= 1e-14 * scale_of(x))
            return xn;
        x = xn;
    }
    return x;
}

std::vector<double> prufer_spectrum(const Potential& q, const SeparatedBC<double>& s,
                                    std::size_t n_max, double tol)
{
    std::vector<double> out;
    std::optional<double> below;
    for (std::size_t n = 0; n <= n_max; ++n) {
        out.push_back(prufer_separated(q, s, n, tol, below));
        below = out.back();
    }
    return out;
}

RobinBracket robin_bracket(const Potential& q, double mu, double nu, std::size_t n_max, double tol)
{
    if (!(nu >= 0))
        throw InvalidInputError("robin_bracket needs nu >= 0");
    return {prufer_spectrum(q, robin(mu + nu), n_max, tol), prufer_spectrum(q, robin(mu - nu), n_max, tol)};
}

ReferenceSpectra reference_spectra(const Potential& q, std::size_t n_max, double tol)
{
    return {prufer_spectrum(q, {0.0, pi}, n_max, tol), prufer_spectrum(q, {pi / 2, pi / 2}, n_max, tol)};
}

double certified_lower_bound(const Potential& q, const Matrix2cd& u, double tol)
{
    const auto cls = classify(u);
    double ground;
    if (cls.stratum == Stratum::U1) {
        const auto h = to_hermitian(u);
        const double c = 0.5 * (h.a + h.c) + std::hypot(0.5 * (h.a - h.c), std::abs(h.b));
        ground = robin_ground_bound(q, c, tol);
    } else {
        auto z = orbit_invariants(u);
        const cdouble other = std::abs(z[0] + 1.0) > std::abs(z[1] + 1.0) ? z[0] : z[1];
        const double alpha = wrap_two_pi(std::arg(other));
        if (std::abs(other + 1.0) <= stratum_tol || alpha <= pi)
            ground = robin_ground_bound(q, 0.0, tol);
        else
            ground = robin_ground_bound(q, -std::tan(alpha / 2), tol);
    }
    return ground - (0.25 + 1e-3 * std::abs(ground));
}

int eigenvalue_count(const Potential& q, const Matrix2cd& u, double a, double b, double tol)
{
    if (!(a < b))
        return 0;
    Solver solver(q, u, tol);
    const auto s = solver.scan(a, 0, b, b);
    return int(s.front().m - s.back().m);
}

SpectrumSlice eigenvalues(const Potential& q, const Matrix2cd& u, std::size_t n_max,
                          const SpectrumOptions& opts)
{
    require_unitary(u);
    const double tol = opts.tol;
    const auto cls = classify(u);
    const long needed = long(n_max) + 1;

    SpectrumSlice slice;
    slice.index_offset = opts.window ? opts.index_offset : 0;

    if (cls.is_separated && !opts.window) {
        const auto s = *to_separated(u);
        slice.certification = Certification::prufer;
        std::optional<double> below;
        for (std::size_t n = 0;; ++n) {
            const bool more = n <= n_max || (opts.upper_limit && below && *below <= *opts.upper_limit);
            if (!more)
                break;
            const double lam = prufer_separated(q, s, n, tol, below);
            if (n > n_max && lam > *opts.upper_limit)
                break;
            slice.eigenvalues.push_back(lam);
            slice.multiplicities.push_back(1);
            below = lam;
        }
        slice.window_lo = slice.eigenvalues.front();
        slice.window_hi = slice.eigenvalues.back();
    } else {
        Solver solver(q, u, tol);
        double start;
        std::optional<double> stop;
        if (opts.window) {
            start = opts.window->first;
            stop = opts.window->second;
            if (!(start < *stop))
                throw InvalidInputError("spectrum window needs lo < hi");
            slice.certification = Certification::scan_only;
        } else {
            start = opts.lower_bound ? *opts.lower_bound : certified_lower_bound(q, u, tol);
            slice.certification = Certification::robin_bracketed;
        }
        const double until = opts.upper_limit ? *opts.upper_limit : -std::numeric_limits<double>::infinity();
        const auto samples = solver.scan(start, needed, until, stop);
        std::vector<Root> roots;
        for (std::size_t k = 1; k < samples.size(); ++k)
            solver.isolate(samples[k - 1], samples[k], roots);
        roots = merge_doubles(std::move(roots), q, u, tol);

        long count = 0;
        for (const auto& r : roots) {
            const bool wanted = count < needed || (opts.upper_limit && r.lambda <= *opts.upper_limit);
            if (!wanted)
                break;
            slice.eigenvalues.push_back(r.lambda);
            slice.multiplicities.push_back(r.multiplicity);
            count += r.multiplicity;
        }
        slice.window_lo = start;
        slice.window_hi = samples.back().lambda;
        if (count < needed)
            throw IncompleteSpectrumError("found " + std::to_string(count) + " of " +
                                              std::to_string(needed) + " eigenvalues in the window",
                                          slice.eigenvalues, slice.multiplicities);
    }

    if (!opts.window && opts.index_offset > 0) {
        std::size_t dropped = 0;
        SpectrumSlice trimmed = slice;
        trimmed.eigenvalues.clear();
        trimmed.multiplicities.clear();
        for (std::size_t k = 0; k < slice.eigenvalues.size(); ++k) {
            int m = slice.multiplicities[k];
            while (m > 0 && dropped < opts.index_offset) {
                --m;
                ++dropped;
            }
            if (m > 0) {
                trimmed.eigenvalues.push_back(slice.eigenvalues[k]);
                trimmed.multiplicities.push_back(m);
            }
        }
        trimmed.index_offset = opts.index_offset;
        slice = trimmed;
    }
    return slice;
}

} // namespace slorbit
