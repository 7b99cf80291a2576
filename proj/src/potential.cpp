#include "slorbit/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "slorbit/errors.hpp"

namespace slorbit {

Potential Potential::zero()
{
    return {};
}

Potential Potential::constant(double c)
{
    Potential q;
    q.kind = PotentialKind::constant;
    q.c = c;
    return q;
}

Potential Potential::polynomial(std::vector<double> coeffs)
{
    if (coeffs.empty())
        throw InvalidInputError("polynomial potential needs at least one coefficient");
    Potential q;
    q.kind = PotentialKind::polynomial;
    q.coeffs = std::move(coeffs);
    return q;
}

Potential Potential::sampled(std::vector<double> xs, std::vector<double> qs)
{
    if (xs.size() != qs.size() || xs.size() < 2)
        throw InvalidInputError("sampled potential needs equal-length grids with at least 2 points");
    if (xs.front() != 0.0 || xs.back() != 1.0)
        throw InvalidInputError("sampled potential grid must start at 0 and end at 1");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw InvalidInputError("sampled potential grid must be strictly increasing");
    for (double v : qs)
        if (!std::isfinite(v))
            throw InvalidInputError("sampled potential values must be finite");
    Potential q;
    q.kind = PotentialKind::sampled;
    q.xs = std::move(xs);
    q.qs = std::move(qs);
    return q;
}

double Potential::operator()(double x) const
{
    switch (kind) {
    case PotentialKind::zero:
        return 0.0;
    case PotentialKind::constant:
        return c;
    case PotentialKind::polynomial: {
        double v = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
            v = v * x + *it;
        return v;
    }
    case PotentialKind::sampled: {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = it == xs.begin() ? 0 : std::size_t(it - xs.begin()) - 1;
        if (i + 1 >= xs.size())
            i = xs.size() - 2;
        const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return qs[i] + w * (qs[i + 1] - qs[i]);
    }
    }
    return 0.0;
}

std::vector<double> Potential::breakpoints() const
{
    if (kind != PotentialKind::sampled)
        return {};
    return {xs.begin() + 1, xs.end() - 1};
}

double Potential::min_value() const
{
    switch (kind) {
    case PotentialKind::zero:
        return 0.0;
    case PotentialKind::constant:
        return c;
    case PotentialKind::sampled:
        return *std::min_element(qs.begin(), qs.end());
    case PotentialKind::polynomial: {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 1000; ++i)
            m = std::min(m, (*this)(i / 1000.0));
        return m;
    }
    }
    return 0.0;
}

double eval_potential(const Potential& q, double x)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("potential evaluated outside [0,1]");
    return q(x);
}

Potential load_sampled_potential(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open sampled potential file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("empty sampled potential file: " + path);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "x,q")
        throw ConfigError("sampled potential file must start with header x,q: " + path);

    std::vector<double> xs, qs;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || std::getline(fields, extra, ','))
            throw ConfigError("malformed row " + std::to_string(row) + " in " + path);
        try {
            std::size_t ua = 0, ub = 0;
            const double x = std::stod(a, &ua);
            const double v = std::stod(b, &ub);
            if (ua != a.size() || ub != b.size())
                throw std::invalid_argument("trailing characters");
            xs.push_back(x);
            qs.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("non-numeric row " + std::to_string(row) + " in " + path);
        }
    }
    try {
        return Potential::sampled(std::move(xs), std::move(qs));
    } catch (const InvalidInputError& e) {
        throw ConfigError(std::string(e.what()) + ": " + path);
    }
}

} // namespace slorbit
