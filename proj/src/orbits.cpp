#include "slorbit/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace slorbit {

namespace {

constexpr double coord_slack = 1e-12;

double scale_of(double x)
{
    return std::max(1.0, std::abs(x));
}

void check_orbit(const AdjointOrbit& o)
{
    if (o.kind == OrbitKind::hermitian) {
        if (!std::isfinite(o.mu) || !std::isfinite(o.nu) || !(o.nu > 0))
            throw InvalidInputError("hermitian orbit needs finite mu and nu > 0");
    } else {
        if (!(o.alpha >= 0 && o.alpha < 2 * pi) || std::abs(o.alpha - pi) < 1e-12)
            throw InvalidInputError("exceptional orbit needs alpha in [0,pi) or (pi,2pi)");
    }
}

// Two distinct points realized by separated conditions.
std::array<OrbitPoint, 2> separated_points(const AdjointOrbit& o)
{
    if (o.kind == OrbitKind::hermitian)
        return {OrbitPoint::on_hermitian(o, 0.0, 0.0), OrbitPoint::on_hermitian(o, pi / 2, 0.0)};
    return {OrbitPoint::on_exceptional_tau(o, pi / 2, 0.0), OrbitPoint::on_exceptional_tau(o, -pi / 2, 0.0)};
}

template <class Fn>
double bracketed_root(Fn&& fn, double lo, double flo, double hi, double fhi)
{
    if (flo == 0)
        return lo;
    if (fhi == 0)
        return hi;
    double x = lo - flo * (hi - lo) / (fhi - flo);
    if (!(x > lo && x < hi))
        x = 0.5 * (lo + hi);
    double last_abs = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        double d = 0;
        const double fx = fn(x, &d);
        if (fx == 0)
            return x;
        if ((fx > 0) == (flo > 0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        double xn = x - fx / d;
        if (!std::isfinite(xn) || !(xn > lo && xn < hi) || std::abs(fx) > 0.5 * last_abs)
            xn = 0.5 * (lo + hi);
        last_abs = std::abs(fx);
        if (std::abs(xn - x) <= 1e-14 * scale_of(x) || hi - lo <= 1e-14 * scale_of(x))
            return xn;
        x = xn;
    }
    return x;
}

struct Bracket {
    double estimate;
    double lo;
    double hi;
    std::size_t interval; // index of the right node
};

// Fundamental data on a lambda grid, shared by every point of an orbit. The
// grid follows arg D closely enough for eigenvalue counting at the nodes.
class Table {
public:
    Table(const Potential& q, double lo, double hi, double tol) : q_(q), tol_(tol)
    {
        const double qmin = q.min_value();
        push(fundamental_with_derivative(q, lo, tol), std::nullopt);
        double h = 0.25;
        while (nodes_.back().lambda < hi) {
            const double x = nodes_.back().lambda;
            h = std::min(h, 0.25 * std::max(1.0, 0.25 * std::sqrt(std::abs(x - qmin))));
            const double x1 = std::min(hi, x + h);
            const auto fm = fundamental_with_derivative(q, 0.5 * (x + x1), tol);
            const auto f1 = fundamental_with_derivative(q, x1, tol);
            const cdouble d0 = curve_.back().denominator;
            const cdouble dm = gamma(fm).denominator, d1 = gamma(f1).denominator;
            const double s1 = std::arg(dm / d0), s2 = std::arg(d1 / dm), st = std::arg(d1 / d0);
            auto bad = [](double d) { return d < -pi / 4 || d > 1e-9; };
            if (bad(s1) || bad(s2) || std::abs(s1 + s2 - st) > 1e-6) {
                h /= 2;
                if (h < 1e-12 * scale_of(x))
                    throw IntegrationError("orbit table step collapsed near lambda = " + std::to_string(x));
                continue;
            }
            push(fm, s1);
            push(f1, s2);
            if (std::abs(st) < pi / 16)
                h *= 2;
        }
    }

    // Sign changes of value(f, &d) located on the cubic Hermite interpolant.
    template <class Value>
    std::vector<Bracket> sign_changes(Value&& value, std::size_t count) const
    {
        std::vector<Bracket> out;
        double d0 = 0;
        double g0 = value(nodes_[0], &d0);
        for (std::size_t k = 1; k < nodes_.size() && out.size() < count; ++k) {
            double d1 = 0;
            const double g1 = value(nodes_[k], &d1);
            const double x0 = nodes_[k - 1].lambda, h = nodes_[k].lambda - x0;
            interval_roots(g0, d0 * h, g1, d1 * h,
                           [&](double s) { out.push_back({x0 + s * h, x0, nodes_[k].lambda, k}); });
            g0 = g1;
            d0 = d1;
        }
        return out;
    }

    // First `count` eigenvalues at p, or empty if the interpolated roots
    // disagree with the eigenvalue count at the nodes.
    std::vector<double> roots(const OrbitPoint& p, std::size_t count) const
    {
        const auto c = char_coefficients(p);
        auto value = [&](const FundamentalData<double>& f, double* d) {
            *d = c[1] * f.d[0] + c[2] * f.d[1] + c[3] * f.d[2] + c[4] * f.d[3];
            return c[0] + c[1] * f.y1 + c[2] * f.y2 + c[3] * f.dy1 + c[4] * f.dy2;
        };
        const auto br = sign_changes(value, count);
        if (br.size() < count)
            return {};

        const Matrix2cd u = orbit_point(p);
        const double adu = std::arg(u.determinant());
        long prev = winding_index(u, curve_[0], lifts_[0], adu);
        std::size_t next = 0;
        for (std::size_t k = 1; k <= br.back().interval; ++k) {
            const long m = winding_index(u, curve_[k], lifts_[k], adu);
            long found = 0;
            while (next < br.size() && br[next].interval == k) {
                ++found;
                ++next;
            }
            if (prev - m != found)
                return {};
            prev = m;
        }

        std::vector<double> out;
        for (std::size_t k = 0; k < count; ++k) {
            double d = 0;
            const double g = value(fundamental_with_derivative(q_, br[k].estimate, tol_), &d);
            const double step = g / d;
            const double r = br[k].estimate - step;
            out.push_back(std::isfinite(step) && r >= br[k].lo && r <= br[k].hi ? r : br[k].estimate);
        }
        for (std::size_t k = 1; k < out.size(); ++k)
            if (!(out[k] - out[k - 1] > 1e-9 * scale_of(out[k])))
                return {};
        return out;
    }

private:
    // Roots in (0, 1] of the cubic Hermite interpolant with end values g0, g1
    // and scaled slopes m0, m1.
    template <class Emit>
    static void interval_roots(double g0, double m0, double g1, double m1, Emit&& emit)
    {
        auto h = [&](double s) {
            const double s2 = s * s, s3 = s2 * s;
            return (2 * s3 - 3 * s2 + 1) * g0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * g1 +
                   (s3 - s2) * m1;
        };
        // H'(s) = A s^2 + B s + C
        const double A = 6 * g0 + 3 * m0 - 6 * g1 + 3 * m1;
        const double B = -6 * g0 - 4 * m0 + 6 * g1 - 2 * m1;
        const double C = m0;
        std::vector<double> cuts{0.0};
        if (std::abs(A) > 1e-300) {
            const double disc = B * B - 4 * A * C;
            if (disc > 0) {
                const double sq = std::sqrt(disc);
                for (double s : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)})
                    if (s > 0 && s < 1)
                        cuts.push_back(s);
            }
        } else if (std::abs(B) > 1e-300) {
            const double s = -C / B;
            if (s > 0 && s < 1)
                cuts.push_back(s);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.push_back(1.0);
        for (std::size_t k = 1; k < cuts.size(); ++k) {
            double a = cuts[k - 1], b = cuts[k];
            double fa = k == 1 ? g0 : h(a), fb = k + 1 == cuts.size() ? g1 : h(b);
            if (fb == 0) {
                emit(b);
                continue;
            }
            if (fa == 0 || (fa > 0) == (fb > 0))
                continue;
            for (int it = 0; it < 60; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = h(m);
                if ((fm > 0) == (fa > 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            emit(0.5 * (a + b));
        }
    }

    void push(const FundamentalData<double>& f, std::optional<double> step)
    {
        const auto g = gamma(f);
        lifts_.push_back(step ? lifts_.back() + *step : std::arg(g.denominator));
        nodes_.push_back(f);
        curve_.push_back(g);
    }

    const Potential& q_;
    double tol_;
    std::vector<FundamentalData<double>> nodes_;
    std::vector<CharCurveValue<double>> curve_;
    std::vector<double> lifts_;
};

std::vector<double> fallback_eigenvalues(const Potential& q, const OrbitPoint& p, std::size_t n_max,
                                         double lower, double tol)
{
    SpectrumOptions opts;
    opts.tol = tol;
    opts.lower_bound = lower;
    auto ev = eigenvalues(q, orbit_point(p), n_max, opts).indexed();
    ev.resize(n_max + 1);
    return ev;
}

double cos_half(const AdjointOrbit& o)
{
    return std::cos(o.alpha / 2);
}

} // namespace

AdjointOrbit AdjointOrbit::hermitian(double mu, double nu)
{
    AdjointOrbit o;
    o.kind = OrbitKind::hermitian;
    o.mu = mu;
    o.nu = nu;
    check_orbit(o);
    return o;
}

AdjointOrbit AdjointOrbit::exceptional(double alpha)
{
    AdjointOrbit o;
    o.kind = OrbitKind::exceptional;
    o.alpha = alpha;
    check_orbit(o);
    return o;
}

std::array<cdouble, 2> AdjointOrbit::invariants() const
{
    if (kind == OrbitKind::hermitian)
        return {cayley(mu + nu), cayley(mu - nu)};
    return {cdouble(-1.0, 0.0), std::polar(1.0, alpha)};
}

std::string AdjointOrbit::describe() const
{
    std::ostringstream s;
    s.precision(17);
    if (kind == OrbitKind::hermitian)
        s << "hermitian(mu=" << mu << ", nu=" << nu << ")";
    else
        s << "exceptional(alpha=" << alpha << ")";
    return s.str();
}

OrbitPoint OrbitPoint::on_hermitian(const AdjointOrbit& o, double theta, double gamma)
{
    check_orbit(o);
    if (o.kind != OrbitKind::hermitian)
        throw InvalidInputError("theta coordinates belong to hermitian orbits");
    if (!(theta >= -coord_slack && theta <= pi / 2 + coord_slack) || !std::isfinite(gamma))
        throw InvalidInputError("hermitian orbit point needs theta in [0,pi/2] and finite gamma");
    OrbitPoint p;
    p.orbit = o;
    p.theta = std::clamp(theta, 0.0, pi / 2);
    p.gamma = wrap_two_pi(gamma);
    return p;
}

OrbitPoint OrbitPoint::on_exceptional(const AdjointOrbit& o, double t, double gamma)
{
    check_orbit(o);
    if (o.kind != OrbitKind::exceptional)
        throw InvalidInputError("t coordinates belong to exceptional orbits");
    const double c = cos_half(o);
    if (!(std::abs(t) <= std::abs(c) + coord_slack) || !std::isfinite(gamma))
        throw InvalidInputError("exceptional orbit point needs |t| <= |cos(alpha/2)| and finite gamma");
    OrbitPoint p;
    p.orbit = o;
    p.t = std::clamp(t, -std::abs(c), std::abs(c));
    p.tau = std::asin(std::clamp(p.t / c, -1.0, 1.0));
    p.gamma = wrap_two_pi(gamma);
    return p;
}

OrbitPoint OrbitPoint::on_exceptional_tau(const AdjointOrbit& o, double tau, double gamma)
{
    check_orbit(o);
    if (o.kind != OrbitKind::exceptional)
        throw InvalidInputError("tau coordinates belong to exceptional orbits");
    if (!(std::abs(tau) <= pi / 2 + coord_slack) || !std::isfinite(gamma))
        throw InvalidInputError("exceptional orbit point needs tau in [-pi/2,pi/2] and finite gamma");
    OrbitPoint p;
    p.orbit = o;
    p.tau = std::clamp(tau, -pi / 2, pi / 2);
    p.t = cos_half(o) * std::sin(p.tau);
    p.gamma = wrap_two_pi(gamma);
    return p;
}

double OrbitPoint::coordinate() const
{
    return orbit.kind == OrbitKind::hermitian ? theta : tau;
}

HermitianBC<double> hermitian_point(const OrbitPoint& p)
{
    if (p.orbit.kind != OrbitKind::hermitian)
        throw StratumError("exceptional orbit points have no hermitian form");
    const double mu = p.orbit.mu, nu = p.orbit.nu;
    const double c2 = std::cos(2 * p.theta), s2 = std::sin(2 * p.theta);
    return {mu - nu * c2, mu + nu * c2, std::polar(nu * s2, -p.gamma)};
}

Matrix2cd orbit_point(const OrbitPoint& p)
{
    check_orbit(p.orbit);
    if (p.orbit.kind == OrbitKind::hermitian)
        return from_hermitian(hermitian_point(p));
    const double a = p.orbit.alpha;
    const double s = std::sin(a / 2), c = cos_half(p.orbit);
    const double w = std::sqrt(std::max(0.0, c * c - p.t * p.t));
    const cdouble i(0, 1);
    const cdouble e = std::polar(w, p.gamma - pi / 2);
    Matrix2cd v;
    if (a < pi) {
        v << cdouble(s, p.t), e, -std::conj(e), cdouble(s, -p.t);
        return Matrix2cd(i * std::polar(1.0, a / 2) * v);
    }
    v << cdouble(-s, p.t), e, -std::conj(e), cdouble(-s, -p.t);
    return Matrix2cd(-i * std::polar(1.0, a / 2) * v);
}

OrbitPoint locate_on_orbit(const AdjointOrbit& o, const Matrix2cd& u, double tol)
{
    check_orbit(o);
    OrbitPoint p;
    if (o.kind == OrbitKind::hermitian) {
        if (classify(u).stratum != Stratum::U1)
            throw InvalidInputError("matrix has eigenvalue -1 and is not on a hermitian orbit");
        const auto h = to_hermitian(u);
        const double theta = 0.5 * std::atan2(std::abs(h.b), 0.5 * (h.c - h.a));
        const double gamma = std::abs(h.b) > 1e-14 ? -std::arg(h.b) : 0.0;
        p = OrbitPoint::on_hermitian(o, theta, gamma);
    } else {
        const cdouble i(0, 1);
        const cdouble phase = (o.alpha < pi ? i : -i) * std::polar(1.0, o.alpha / 2);
        const Matrix2cd v = u / phase;
        const double c = std::abs(cos_half(o));
        const double t = std::clamp(v(0, 0).imag(), -c, c);
        const double gamma = std::abs(v(0, 1)) > 1e-14 ? std::arg(v(0, 1)) + pi / 2 : 0.0;
        p = OrbitPoint::on_exceptional(o, t, gamma);
    }
    if (!(max_abs(Matrix2cd(orbit_point(p) - u)) <= tol * 10))
        throw InvalidInputError("matrix is not on the orbit " + o.describe());
    return p;
}

double distance_to_real_circle(const OrbitPoint& p)
{
    const double r = p.orbit.kind == OrbitKind::hermitian ? std::sin(2 * p.theta) * std::sin(p.gamma)
                                                          : std::cos(p.tau) * std::sin(p.gamma);
    return std::asin(std::min(1.0, std::abs(r)));
}

OrbitPoint real_circle_point(const AdjointOrbit& o, double phi)
{
    phi = wrap_two_pi(phi);
    const bool first = phi <= pi;
    if (o.kind == OrbitKind::hermitian)
        return first ? OrbitPoint::on_hermitian(o, phi / 2, 0.0) : OrbitPoint::on_hermitian(o, pi - phi / 2, pi);
    return first ? OrbitPoint::on_exceptional_tau(o, pi / 2 - phi, 0.0)
                 : OrbitPoint::on_exceptional_tau(o, phi - 3 * pi / 2, pi);
}

std::array<double, 5> char_coefficients(const OrbitPoint& p)
{
    if (p.orbit.kind == OrbitKind::hermitian) {
        const double mu = p.orbit.mu, nu = p.orbit.nu;
        const double c2 = std::cos(2 * p.theta), s2 = std::sin(2 * p.theta);
        return {2 * nu * s2 * std::cos(p.gamma), mu + nu * c2, nu * nu - mu * mu, -1.0, mu - nu * c2};
    }
    const double s = std::sin(p.orbit.alpha / 2), c = cos_half(p.orbit);
    const double w = std::sqrt(std::max(0.0, c * c - p.t * p.t));
    const double k = 2 * std::cos(p.gamma) * w;
    if (p.orbit.alpha < pi)
        return {k, -c + p.t, -2 * s, 0.0, -c - p.t};
    return {k, c + p.t, 2 * s, 0.0, c - p.t};
}

double char_on_orbit(const OrbitPoint& p, const FundamentalData<double>& f, double* derivative)
{
    const auto c = char_coefficients(p);
    if (derivative) {
        if (!f.has_derivatives)
            throw InvalidInputError("derivative requested from data without lambda-derivatives");
        *derivative = c[1] * f.d[0] + c[2] * f.d[1] + c[3] * f.d[2] + c[4] * f.d[3];
    }
    return c[0] + c[1] * f.y1 + c[2] * f.y2 + c[3] * f.dy1 + c[4] * f.dy2;
}

double critical_function(const AdjointOrbit& o, const FundamentalData<double>& f, double* derivative)
{
    check_orbit(o);
    if (derivative && !f.has_derivatives)
        throw InvalidInputError("derivative requested from data without lambda-derivatives");
    const double p = f.dy2 - f.y1;
    const double dp = derivative ? f.d[3] - f.d[0] : 0.0;
    if (o.kind == OrbitKind::hermitian) {
        const double mu = o.mu, nu = o.nu;
        const double r = mu * (f.dy2 + f.y1) + (nu * nu - mu * mu) * f.y2 - f.dy1;
        if (derivative) {
            const double dr = mu * (f.d[3] + f.d[0]) + (nu * nu - mu * mu) * f.d[1] - f.d[2];
            *derivative = 2 * r * dr - 2 * nu * nu * p * dp;
        }
        return r * r - nu * nu * (p * p + 4);
    }
    const double tn = std::tan(o.alpha / 2);
    const double s = f.dy2 + f.y1 + 2 * tn * f.y2;
    if (derivative) {
        const double ds = f.d[3] + f.d[0] + 2 * tn * f.d[1];
        *derivative = 2 * s * ds - 2 * p * dp;
    }
    return s * s - (p * p + 4);
}

OrbitPoint critical_point(const AdjointOrbit& o, const FundamentalData<double>& f)
{
    check_orbit(o);
    const double p = f.dy2 - f.y1;
    if (o.kind == OrbitKind::hermitian) {
        const double r = o.mu * (f.dy2 + f.y1) + (o.nu * o.nu - o.mu * o.mu) * f.y2 - f.dy1;
        const double delta = std::atan2(2.0, p);
        const double two_theta = std::remainder(r > 0 ? -delta : pi - delta, 2 * pi);
        const double theta = 0.5 * two_theta;
        return theta >= 0 ? OrbitPoint::on_hermitian(o, theta, 0.0) : OrbitPoint::on_hermitian(o, -theta, pi);
    }
    const double s = f.dy2 + f.y1 + 2 * std::tan(o.alpha / 2) * f.y2;
    const double sigma = o.alpha < pi ? -1.0 : 1.0;
    const double sg = s > 0 ? 1.0 : -1.0;
    return OrbitPoint::on_exceptional_tau(o, std::atan2(sg * sigma * p, 2.0), s > 0 ? 0.0 : pi);
}

double orbit_lower_bound(const Potential& q, const AdjointOrbit& o, double tol)
{
    check_orbit(o);
    return certified_lower_bound(q, orbit_point(separated_points(o)[0]), tol);
}

std::vector<CurveHit> orbit_meets_gamma(const Potential& q, const AdjointOrbit& o, double lo, double hi,
                                        double tol)
{
    check_orbit(o);
    const auto n = std::size_t(std::max(64.0, 4.0 * (hi - lo)));
    return gamma_meets_orbit(q, o.invariants(), lo, hi, n, tol);
}

std::vector<std::vector<double>> orbit_eigenvalues(const Potential& q, const AdjointOrbit& o,
                                                   const std::vector<OrbitPoint>& points, std::size_t n_max,
                                                   double tol)
{
    check_orbit(o);
    const double lower = orbit_lower_bound(q, o, tol);
    const double top = prufer_spectrum(q, {0.0, pi}, n_max, tol).back() + 1.0;
    const Table table(q, lower, top, tol);

    std::vector<std::vector<double>> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        std::vector<double> ev = table.roots(p, n_max + 1);
        if (ev.empty()) {
            try {
                ev = fallback_eigenvalues(q, p, n_max, lower, tol);
            } catch (const IncompleteSpectrumError& e) {
                std::ostringstream s;
                s.precision(17);
                s << e.what() << " at orbit point (" << p.coordinate() << ", " << p.gamma << ")";
                throw IncompleteSpectrumError(s.str(), e.found(), e.multiplicities());
            }
        }
        out.push_back(std::move(ev));
    }
    return out;
}

double LambdaSurface::at(std::size_t i, std::size_t j, std::size_t n) const
{
    return values[(i * gammas.size() + j) * (n_max + 1) + n];
}

OrbitPoint LambdaSurface::point(std::size_t i, std::size_t j) const
{
    if (orbit.kind == OrbitKind::hermitian)
        return OrbitPoint::on_hermitian(orbit, coords[i], gammas[j]);
    return OrbitPoint::on_exceptional_tau(orbit, coords[i], gammas[j]);
}

std::pair<std::size_t, std::size_t> LambdaSurface::argmin(std::size_t n) const
{
    std::pair<std::size_t, std::size_t> best{0, 0};
    for (std::size_t i = 0; i < coords.size(); ++i)
        for (std::size_t j = 0; j < gammas.size(); ++j)
            if (at(i, j, n) < at(best.first, best.second, n))
                best = {i, j};
    return best;
}

std::pair<std::size_t, std::size_t> LambdaSurface::argmax(std::size_t n) const
{
    std::pair<std::size_t, std::size_t> best{0, 0};
    for (std::size_t i = 0; i < coords.size(); ++i)
        for (std::size_t j = 0; j < gammas.size(); ++j)
            if (at(i, j, n) > at(best.first, best.second, n))
                best = {i, j};
    return best;
}

double LambdaSurface::min(std::size_t n) const
{
    const auto [i, j] = argmin(n);
    return at(i, j, n);
}

double LambdaSurface::max(std::size_t n) const
{
    const auto [i, j] = argmax(n);
    return at(i, j, n);
}

LambdaSurface lambda_surface(const Potential& q, const AdjointOrbit& o, std::size_t n_max,
                             std::size_t n_coord, std::size_t n_gamma, double tol)
{
    if (n_coord < 2 || n_gamma < 2)
        throw InvalidInputError("surface grid needs at least 2 x 2 points");
    LambdaSurface s;
    s.orbit = o;
    s.n_max = n_max;
    const bool herm = o.kind == OrbitKind::hermitian;
    for (std::size_t i = 0; i < n_coord; ++i) {
        const double u = double(i) / double(n_coord - 1);
        s.coords.push_back(herm ? u * pi / 2 : -pi / 2 + u * pi);
    }
    for (std::size_t j = 0; j < n_gamma; ++j)
        s.gammas.push_back(2 * pi * double(j) / double(n_gamma));

    std::vector<OrbitPoint> pts;
    for (std::size_t i = 0; i < n_coord; ++i)
        for (std::size_t j = 0; j < n_gamma; ++j)
            pts.push_back(s.point(i, j));
    for (const auto& ev : orbit_eigenvalues(q, o, pts, n_max, tol))
        s.values.insert(s.values.end(), ev.begin(), ev.end());
    return s;
}

std::vector<CriticalRoot> critical_roots(const Potential& q, const AdjointOrbit& o, double lo, double hi,
                                         double tol)
{
    check_orbit(o);
    if (!(lo < hi))
        throw InvalidInputError("critical-value window needs lo < hi");
    auto fder = [&](double lam, double* d) {
        return critical_function(o, fundamental_with_derivative(q, lam, tol), d);
    };
    const Table table(q, lo, hi, tol);
    const auto brackets = table.sign_changes(
        [&](const FundamentalData<double>& f, double* d) { return critical_function(o, f, d); },
        std::numeric_limits<std::size_t>::max());
    const double lower = std::min(orbit_lower_bound(q, o, tol), lo - 1.0);

    std::vector<CriticalRoot> out;
    for (const auto& b : brackets) {
        double d = 0;
        const double flo = fder(b.lo, &d), fhi = fder(b.hi, &d);
        double r = b.estimate;
        if ((flo > 0) != (fhi > 0)) {
            r = bracketed_root(fder, b.lo, flo, b.hi, fhi);
        } else {
            for (int it = 0; it < 20; ++it) {
                const double step = fder(r, &d) / d;
                if (!std::isfinite(step) || r - step < b.lo || r - step > b.hi)
                    break;
                r -= step;
                if (std::abs(step) <= 1e-14 * scale_of(r))
                    break;
            }
        }
        const auto f = fundamental_with_derivative(q, r, tol);
        critical_function(o, f, &d);
        CriticalRoot c;
        c.lambda = r;
        c.lower = d < 0;
        c.point = critical_point(o, f);
        c.n = std::size_t(eigenvalue_count(q, orbit_point(c.point), lower, r - 1e-7 * scale_of(r), tol));
        out.push_back(c);
    }
    return out;
}

namespace {

struct Endpoint {
    double lambda;
    int kind; // 0 lower, 1 upper, 2 both
    OrbitPoint point;
};

std::vector<double> hit_values(const std::vector<CurveHit>& hits)
{
    std::vector<double> v;
    for (const auto& h : hits)
        v.push_back(h.lambda);
    return v;
}

} // namespace

std::vector<OrbitRange> critical_values(const Potential& q, const AdjointOrbit& o, std::size_t n_max,
                                        const CriticalOptions& opts)
{
    check_orbit(o);
    const double tol = opts.tol;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto fval = [&](double lam) { return critical_function(o, fundamental(q, lam, tol)); };
    auto fder = [&](double lam, double* d) {
        return critical_function(o, fundamental_with_derivative(q, lam, tol), d);
    };
    const double lower = orbit_lower_bound(q, o, tol);

    if (opts.window) {
        const auto [lo, hi] = *opts.window;
        if (!(lo < hi))
            throw InvalidInputError("critical-value window needs lo < hi");
        const auto hits = orbit_meets_gamma(q, o, lo, hi, tol);
        if (!hits.empty() && !opts.allow_meeting)
            throw HypothesisError("orbit " + o.describe() + " meets the characteristic curve", hit_values(hits));
        std::vector<OrbitRange> out(n_max + 1);
        std::vector<bool> used(n_max + 1, false);
        for (std::size_t n = 0; n <= n_max; ++n) {
            out[n].n = n;
            out[n].a_n = out[n].b_n = nan;
        }
        auto place = [&](std::size_t n, bool is_lower, double lam, const OrbitPoint& p, bool touch) {
            if (n > n_max)
                return;
            double& slot = is_lower ? out[n].a_n : out[n].b_n;
            if (!std::isnan(slot))
                throw Error("critical value " + std::to_string(n) + " found twice in the window");
            slot = lam;
            (is_lower ? out[n].minimizer : out[n].maximizer) = p;
            out[n].touching = out[n].touching || touch;
            used[n] = true;
        };
        for (const auto& c : critical_roots(q, o, lo, hi, tol))
            place(c.n, c.lower, c.lambda, c.point, false);
        for (const auto& h : hits) {
            const auto p = critical_point(o, fundamental(q, h.lambda, tol));
            const auto k = std::size_t(
                eigenvalue_count(q, orbit_point(p), std::min(lower, lo - 1.0), h.lambda - 1e-7 * scale_of(h.lambda), tol));
            place(k, false, h.lambda, p, true);
            place(k + 1, true, h.lambda, p, true);
        }
        std::vector<OrbitRange> kept;
        for (std::size_t n = 0; n <= n_max; ++n)
            if (used[n])
                kept.push_back(out[n]);
        for (std::size_t k = 0; k < kept.size(); ++k) {
            const auto& r = kept[k];
            if (!std::isnan(r.a_n) && !std::isnan(r.b_n) && !(r.a_n < r.b_n))
                throw Error("critical values fail to interlace at n = " + std::to_string(r.n));
            if (k > 0 && kept[k - 1].n + 1 == r.n && !std::isnan(kept[k - 1].b_n) && !std::isnan(r.a_n)) {
                const bool ok = r.touching ? kept[k - 1].b_n <= r.a_n : kept[k - 1].b_n < r.a_n;
                if (!ok)
                    throw Error("critical values fail to interlace at n = " + std::to_string(r.n));
            }
        }
        return kept;
    }

    SpectrumOptions sopts;
    sopts.tol = tol;
    sopts.lower_bound = lower;
    const auto sep = separated_points(o);
    const auto s0 = eigenvalues(q, orbit_point(sep[0]), n_max + 1, sopts).indexed();
    const auto s1 = eigenvalues(q, orbit_point(sep[1]), n_max + 1, sopts).indexed();
    const double top = std::max(s0[n_max + 1], s1[n_max + 1]);

    double start = lower;
    double fs = fval(start);
    for (int k = 0; fs <= 0; ++k) {
        if (k > 60)
            throw Error("no point below the first eigenvalue band was found");
        start -= 1.0 + std::abs(start);
        fs = fval(start);
    }

    const auto hits = orbit_meets_gamma(q, o, start, top, tol);
    if (!hits.empty()) {
        if (!opts.allow_meeting)
            throw HypothesisError("orbit " + o.describe() + " meets the characteristic curve", hit_values(hits));
        // Simple roots and meeting values, read off in order.
        std::vector<Endpoint> seq;
        for (const auto& c : critical_roots(q, o, start, top, tol)) {
            bool near_hit = false;
            for (const auto& h : hits)
                near_hit = near_hit || std::abs(h.lambda - c.lambda) <= 1e-6 * scale_of(h.lambda);
            if (!near_hit)
                seq.push_back({c.lambda, c.lower ? 0 : 1, c.point});
        }
        for (const auto& h : hits)
            seq.push_back({h.lambda, 2, critical_point(o, fundamental(q, h.lambda, tol))});
        std::sort(seq.begin(), seq.end(), [](const Endpoint& a, const Endpoint& b) { return a.lambda < b.lambda; });
        std::vector<Endpoint> flat;
        for (const auto& e : seq) {
            const bool want_lower = flat.size() % 2 == 0;
            if (e.kind == 2) {
                if (want_lower)
                    throw Error("meeting value " + std::to_string(e.lambda) + " does not close a band");
                flat.push_back(e);
                flat.push_back(e);
            } else {
                if ((e.kind == 0) != want_lower)
                    throw Error("critical values fail to alternate near " + std::to_string(e.lambda));
                flat.push_back(e);
            }
        }
        if (flat.size() < 2 * (n_max + 1))
            throw Error("too few critical values below " + std::to_string(top));
        std::vector<OrbitRange> out;
        for (std::size_t n = 0; n <= n_max; ++n) {
            const auto& a = flat[2 * n];
            const auto& b = flat[2 * n + 1];
            out.push_back({n, a.lambda, b.lambda, a.point, b.point, a.kind == 2 || b.kind == 2});
        }
        return out;
    }

    // Find a point of the requested sign in (lo, hi) by successive halving.
    auto search = [&](double lo, double hi, bool positive, double& at, double& value) {
        for (int depth = 0; depth <= 12; ++depth) {
            const int parts = 1 << depth;
            for (int k = 0; k < parts; ++k) {
                const double x = lo + (hi - lo) * (2 * k + 1) / (2.0 * parts);
                const double v = fval(x);
                if (positive ? v > 0 : v <= 0) {
                    at = x;
                    value = v;
                    return true;
                }
            }
        }
        return false;
    };

    std::vector<OrbitRange> out;
    double gap = start, fgap = fs;
    for (std::size_t n = 0; n <= n_max; ++n) {
        const double lo_n = std::min(s0[n], s1[n]), hi_n = std::max(s0[n], s1[n]);
        double band = 0.5 * (lo_n + hi_n), fband = fval(band);
        if (fband > 0) {
            const double pad = 1e-9 * scale_of(hi_n);
            if (!search(lo_n - pad, hi_n + pad, false, band, fband))
                throw Error("the eigenvalue band " + std::to_string(n) + " could not be located");
        }
        const double lo_next = std::min(s0[n + 1], s1[n + 1]);
        double next_gap = 0, fnext = 0;
        if (!search(hi_n, lo_next, true, next_gap, fnext))
            throw HypothesisError("bands " + std::to_string(n) + " and " + std::to_string(n + 1) + " of orbit " +
                                      o.describe() + " touch",
                                  {});
        OrbitRange r;
        r.n = n;
        r.a_n = bracketed_root(fder, gap, fgap, band, fband);
        r.b_n = bracketed_root(fder, band, fband, next_gap, fnext);
        r.minimizer = critical_point(o, fundamental(q, r.a_n, tol));
        r.maximizer = critical_point(o, fundamental(q, r.b_n, tol));
        if (!(r.a_n < r.b_n) || (!out.empty() && !(out.back().b_n < r.a_n)))
            throw Error("critical values fail to interlace at n = " + std::to_string(n));
        out.push_back(r);
        gap = next_gap;
        fgap = fnext;
    }
    return out;
}

std::string to_string(LevelShape s)
{
    switch (s) {
    case LevelShape::empty:
        return "empty";
    case LevelShape::point:
        return "point";
    case LevelShape::circle:
        return "circle";
    }
    return "unknown";
}

Matrix2cd LevelSet::member(double gamma) const
{
    const double a = std::sqrt(std::clamp(x, 0.0, 1.0)), b = std::sqrt(std::clamp(1 - x, 0.0, 1.0));
    Matrix2cd v;
    v << a, -std::polar(b, -gamma), std::polar(b, gamma), a;
    Matrix2cd d = Matrix2cd::Zero();
    d(0, 0) = zeta[0];
    d(1, 1) = zeta[1];
    return frame * v * d * v.adjoint() * frame.adjoint();
}

LevelSet level_set_from(const std::array<cdouble, 2>& rho, const Matrix2cd& frame,
                        const std::array<cdouble, 2>& zeta, double kappa)
{
    LevelSet ls;
    ls.kappa = kappa;
    ls.rho = rho;
    ls.zeta = zeta;
    ls.frame = frame;
    const cdouble den = (rho[0] - rho[1]) * (zeta[0] - zeta[1]);
    const cdouble x = -(zeta[1] - rho[0]) * (zeta[0] - rho[1]) / den;
    const cdouble comp = (zeta[0] - rho[0]) * (zeta[1] - rho[1]) / den;
    ls.x = x.real();
    ls.x_imag = x.imag();
    ls.complement = comp.real();

    bool coincide = false;
    for (const auto& z : zeta)
        for (const auto& r : rho)
            if (std::abs(z - r) <= 1e-8)
                coincide = true;
    if (coincide) {
        ls.x = ls.x < 0.5 ? 0.0 : 1.0;
        ls.shape = LevelShape::point;
    } else if (ls.x >= -1e-12 && ls.x <= 1 + 1e-12) {
        ls.x = std::clamp(ls.x, 0.0, 1.0);
        ls.shape = LevelShape::circle;
    }
    return ls;
}

LevelSet level_set(const Potential& q, const AdjointOrbit& o, double kappa, double tol)
{
    check_orbit(o);
    const auto g = gamma(fundamental(q, kappa, tol));
    const Matrix2cd& m = g.gamma_matrix;
    Vector2cd v1(m(0, 1), g.kappa_plus - m(0, 0));
    v1.normalize();
    Matrix2cd frame;
    frame << v1(0), -std::conj(v1(1)), v1(1), std::conj(v1(0));
    auto ls = level_set_from({g.kappa_plus, g.kappa_minus}, frame, o.invariants(), kappa);
    if (ls.shape == LevelShape::point)
        ls.point = locate_on_orbit(o, ls.member(0.0), 1e-6);
    return ls;
}

bool OrbitReport::passed() const
{
    if (!hypothesis_ok)
        return false;
    for (const auto& c : checks)
        if (!c.skipped && !c.informational && !c.passed)
            return false;
    return true;
}

OrbitReport verify_orbit_theorems(const Potential& q, const AdjointOrbit& o, std::size_t n_max,
                                  const GridSpec& grid, double tol)
{
    check_orbit(o);
    OrbitReport rep;
    rep.orbit = o;
    rep.n_max = n_max;
    rep.window_lo = orbit_lower_bound(q, o, tol);
    rep.window_hi = prufer_spectrum(q, {0.0, pi}, n_max + 1, tol).back();
    CriticalOptions copts;
    copts.tol = tol;
    try {
        rep.ranges = critical_values(q, o, n_max, copts);
    } catch (const HypothesisError&) {
        rep.hypothesis_ok = false;
        rep.hits = orbit_meets_gamma(q, o, rep.window_lo, rep.window_hi, tol);
        copts.allow_meeting = true;
        try {
            rep.ranges = critical_values(q, o, n_max, copts);
        } catch (const Error&) {
            rep.ranges.clear();
        }
    }

    const auto surf = lambda_surface(q, o, n_max, grid.n_coord, grid.n_gamma, tol);
    auto make_ce = [&](std::size_t i, std::size_t j, std::size_t n, double bound) {
        return Counterexample{n, surf.coords[i], surf.gammas[j], surf.at(i, j, n), bound};
    };
    auto skipped = [&](const std::string& name) {
        TheoremCheck c;
        c.name = name;
        c.skipped = true;
        c.detail = "orbit meets the characteristic curve";
        return c;
    };

    if (rep.hypothesis_ok) {
        TheoremCheck c;
        c.name = "range_containment";
        for (std::size_t n = 0; n <= n_max; ++n)
            for (std::size_t i = 0; i < surf.coords.size(); ++i)
                for (std::size_t j = 0; j < surf.gammas.size(); ++j) {
                    const double v = surf.at(i, j, n);
                    if (v < rep.ranges[n].a_n - rep.epsilon)
                        c.counterexamples.push_back(make_ce(i, j, n, rep.ranges[n].a_n));
                    else if (v > rep.ranges[n].b_n + rep.epsilon)
                        c.counterexamples.push_back(make_ce(i, j, n, rep.ranges[n].b_n));
                }
        c.passed = c.counterexamples.empty();
        rep.checks.push_back(c);

        TheoremCheck il;
        il.name = "interlacing";
        for (std::size_t n = 0; n <= n_max; ++n) {
            const bool ok = rep.ranges[n].a_n < rep.ranges[n].b_n &&
                            (n == 0 || rep.ranges[n - 1].b_n < rep.ranges[n].a_n);
            if (!ok)
                il.counterexamples.push_back({n, 0, 0, rep.ranges[n].a_n, rep.ranges[n].b_n});
        }
        il.passed = il.counterexamples.empty();
        rep.checks.push_back(il);

        TheoremCheck loc;
        loc.name = "extrema_on_real_circle";
        const double dc = surf.coords[1] - surf.coords[0];
        const double cell = (o.kind == OrbitKind::hermitian ? 2 * dc : dc) + (surf.gammas[1] - surf.gammas[0]);
        for (std::size_t n = 0; n <= n_max; ++n)
            for (const auto& [i, j] : {surf.argmin(n), surf.argmax(n)}) {
                const double d = distance_to_real_circle(surf.point(i, j));
                if (d > cell)
                    loc.counterexamples.push_back(make_ce(i, j, n, d));
            }
        loc.passed = loc.counterexamples.empty();
        std::ostringstream det;
        det << "cell diameter " << cell;
        loc.detail = det.str();
        rep.checks.push_back(loc);
    } else {
        rep.checks.push_back(skipped("range_containment"));
        rep.checks.push_back(skipped("interlacing"));
        rep.checks.push_back(skipped("extrema_on_real_circle"));
    }

    TheoremCheck lem;
    lem.name = "lemma_bounds";
    if (o.kind == OrbitKind::hermitian) {
        const auto br = robin_bracket(q, o.mu, o.nu, n_max, tol);
        for (std::size_t n = 0; n <= n_max; ++n)
            for (std::size_t i = 0; i < surf.coords.size(); ++i)
                for (std::size_t j = 0; j < surf.gammas.size(); ++j) {
                    const double v = surf.at(i, j, n);
                    if (v < br.lower[n] - 1e-8)
                        lem.counterexamples.push_back(make_ce(i, j, n, br.lower[n]));
                    else if (v > br.upper[n] + 1e-8)
                        lem.counterexamples.push_back(make_ce(i, j, n, br.upper[n]));
                }
        lem.detail = "robin(mu+nu) <= lambda_n <= robin(mu-nu)";
    } else if (o.alpha < pi) {
        const auto neu = reference_spectra(q, n_max, tol).neumann;
        for (std::size_t n = 0; n <= n_max; ++n)
            for (std::size_t i = 0; i < surf.coords.size(); ++i)
                for (std::size_t j = 0; j < surf.gammas.size(); ++j)
                    if (surf.at(i, j, n) < neu[n] - 1e-8)
                        lem.counterexamples.push_back(make_ce(i, j, n, neu[n]));
        lem.detail = "lambda_n >= neumann_n";
    } else {
        lem.skipped = true;
        lem.detail = "no comparison bound for alpha in (pi, 2pi)";
    }
    lem.passed = lem.counterexamples.empty();
    rep.checks.push_back(lem);

    if (rep.hypothesis_ok) {
        const std::size_t m = std::max<std::size_t>(grid.n_circle, 8);
        std::vector<OrbitPoint> pts;
        for (std::size_t k = 0; k < m; ++k)
            pts.push_back(real_circle_point(o, 2 * pi * double(k) / double(m)));
        const auto ev = orbit_eigenvalues(q, o, pts, n_max, tol);

        TheoremCheck two;
        two.name = "two_critical_points";
        TheoremCheck nd;
        nd.name = "nondegenerate_critical_points";
        nd.informational = true;
        for (std::size_t n = 0; n <= n_max; ++n) {
            std::vector<double> diff(m);
            for (std::size_t k = 0; k < m; ++k)
                diff[k] = ev[(k + 1) % m][n] - ev[k][n];
            const double floor = 1e-11 * scale_of(ev[0][n]);
            int last = 0, first = 0, changes = 0;
            std::vector<std::size_t> at;
            for (std::size_t k = 0; k < m; ++k) {
                const int sg = diff[k] > floor ? 1 : (diff[k] < -floor ? -1 : 0);
                if (sg == 0)
                    continue;
                if (first == 0)
                    first = sg;
                else if (sg != last) {
                    ++changes;
                    at.push_back(k);
                }
                last = sg;
            }
            if (first != 0 && last != first) {
                ++changes;
                at.push_back(0);
            }
            if (changes != 2) {
                const auto p = pts[at.empty() ? 0 : at.front()];
                two.counterexamples.push_back({n, p.coordinate(), p.gamma, double(changes), 2.0});
            }
            for (std::size_t k : at) {
                const double second = ev[(k + 1) % m][n] - 2 * ev[k][n] + ev[(k + m - 1) % m][n];
                if (!(std::abs(second) > 1e-9 * scale_of(ev[k][n])))
                    nd.counterexamples.push_back({n, pts[k].coordinate(), pts[k].gamma, second, 0.0});
            }
        }
        two.passed = two.counterexamples.empty();
        nd.passed = nd.counterexamples.empty();
        std::ostringstream det;
        det << m << " samples along the real circle";
        two.detail = det.str();
        nd.detail = "second difference at each sign change";
        rep.checks.push_back(two);
        rep.checks.push_back(nd);
    } else {
        rep.checks.push_back(skipped("two_critical_points"));
        rep.checks.push_back(skipped("nondegenerate_critical_points"));
    }
    return rep;
}

DiagonalScan diagonal_scan(const Potential& q, const std::vector<double>& betas, std::size_t n_max, double tol,
                           double inversion_tol)
{
    SpectrumOptions opts;
    opts.tol = tol;
    DiagonalScan out;
    out.betas = betas;
    out.n_max = n_max;
    for (std::size_t k = 0; k < betas.size(); ++k) {
        const double b = betas[k];
        if (!(b > 0 && b <= pi) || (k > 0 && !(b > betas[k - 1])))
            throw InvalidInputError("diagonal scan needs ascending beta in (0, pi]");
        const auto ev = eigenvalues(q, from_separated(SeparatedBC<double>{pi - b, b}), n_max, opts).indexed();
        out.values.insert(out.values.end(), ev.begin(), ev.begin() + static_cast<std::ptrdiff_t>(n_max + 1));
    }
    for (std::size_t k = 0; k + 1 < betas.size(); ++k)
        for (std::size_t n = 0; n <= n_max; ++n)
            if (!(out.at(k + 1, n) - out.at(k, n) > inversion_tol))
                out.inversions.emplace_back(k, n);
    return out;
}

} // namespace slorbit
