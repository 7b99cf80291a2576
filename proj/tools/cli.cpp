#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>

namespace slorbit::cli {

namespace {

struct Schema {
    std::set<std::string> required;
    std::set<std::string> optional;
    std::set<std::string> grid;
    std::string format; // of the main artifact
};

const std::map<std::string, Schema>& schemas()
{
    static const std::map<std::string, Schema> s = {
        {"eigs", {{"potential", "bc"}, {"n_max", "tol", "window", "output"}, {}, "csv"}},
        {"curve", {{"potential", "window"}, {"tol", "grid", "output"}, {"points"}, "csv"}},
        {"orbit-scan", {{"potential", "orbit"}, {"n_max", "tol", "grid", "output"}, {"n_coord", "n_gamma"}, "csv"}},
        {"orbit-range",
         {{"potential", "orbit"},
          {"n_max", "tol", "window", "grid", "output", "allow_meeting"},
          {"n_coord", "n_gamma", "n_circle"},
          "csv"}},
        {"levelset", {{"potential", "orbit", "kappa"}, {"tol", "output"}, {}, "json"}},
        {"diag-scan", {{"potential"}, {"n_max", "tol", "grid", "output"}, {"n_beta"}, "csv"}},
        {"check", {{}, {"potential", "orbits", "n_max", "tol", "grid"}, {"n_coord", "n_gamma", "n_circle"}, ""}},
    };
    return s;
}

void only_keys(const json& j, const std::set<std::string>& keys, const std::string& where)
{
    if (!j.is_object())
        throw ConfigError(where + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!keys.count(k))
            throw ConfigError("unknown key '" + k + "' in " + where);
}

double number(const json& j, const std::string& key)
{
    if (!j.contains(key))
        throw ConfigError("missing key '" + key + "'");
    if (!j.at(key).is_number())
        throw ConfigError("'" + key + "' must be a number");
    return j.at(key).get<double>();
}

std::size_t count(const json& j, const std::string& key, std::size_t fallback)
{
    if (!j.contains(key))
        return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError("'" + key + "' must be a non-negative integer");
    return j.at(key).get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& key)
{
    if (!j.contains(key) || !j.at(key).is_array())
        throw ConfigError("'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number())
            throw ConfigError("'" + key + "' must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::pair<double, double> window_of(const json& j)
{
    const auto w = numbers(j, "window");
    if (w.size() != 2)
        throw ConfigError("'window' must be [lo, hi]");
    return {w[0], w[1]};
}

double tol_of(const json& j)
{
    const double t = j.contains("tol") ? number(j, "tol") : default_tol;
    if (!(t > 0))
        throw ConfigError("'tol' must be positive");
    return t;
}

std::size_t grid_value(const json& j, const std::string& key, std::size_t fallback)
{
    return j.contains("grid") ? count(j.at("grid"), key, fallback) : fallback;
}

json output_of(const json& j)
{
    if (!j.contains("output"))
        return json::object();
    const json& o = j.at("output");
    if (o.is_string())
        return json{{"path", o}};
    return o;
}

// Main artifact stream: the configured file or the fallback stream.
class Sink {
public:
    Sink(const json& output, std::ostream& fallback)
    {
        if (output.contains("path")) {
            path_ = output.at("path").get<std::string>();
            file_.open(path_, std::ios::binary);
            if (!file_)
                throw ConfigError("cannot write output file: " + path_);
            stream_ = &file_;
        } else {
            stream_ = &fallback;
        }
    }
    std::ostream& get() { return *stream_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

class Csv {
public:
    explicit Csv(std::ostream& os) : os_(os) {}

    void row(std::initializer_list<std::string> fields)
    {
        bool first = true;
        for (const auto& f : fields) {
            if (!first)
                os_ << ',';
            first = false;
            os_ << f;
        }
        os_ << "\r\n";
    }

private:
    std::ostream& os_;
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

json complex_json(cdouble z) { return json::array({z.real(), z.imag()}); }

json nan_as_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json point_json(const OrbitPoint& p)
{
    json j{{"coordinate", p.coordinate()}, {"gamma", p.gamma}};
    if (p.orbit.kind == OrbitKind::exceptional)
        j["t"] = p.t;
    return j;
}

json orbit_json(const AdjointOrbit& o)
{
    if (o.kind == OrbitKind::hermitian)
        return {{"kind", "hermitian"}, {"parameters", {{"mu", o.mu}, {"nu", o.nu}}}};
    return {{"kind", "exceptional"}, {"parameters", {{"alpha", o.alpha}}}};
}

void write_slice(Csv& csv, const std::vector<double>& values, const std::vector<int>& mult, std::size_t offset,
                 const std::string& cert)
{
    std::size_t n = offset;
    for (std::size_t i = 0; i < values.size(); ++i)
        for (int k = 0; k < mult[i]; ++k)
            csv.row({fmt(n++), fmt(values[i]), std::to_string(mult[i]), cert});
}

int cmd_eigs(const Job& job, std::ostream& out, std::ostream& err)
{
    const auto& c = job.config;
    const auto q = parse_potential(c.at("potential"), job.base_dir);
    const Matrix2cd u = parse_bc(c.at("bc"));
    SpectrumOptions opts;
    opts.tol = tol_of(c);
    if (c.contains("window"))
        opts.window = window_of(c);
    const std::size_t n_max = count(c, "n_max", 5);

    Sink sink(output_of(c), out);
    Csv csv(sink.get());
    csv.row({"n", "lambda", "multiplicity", "certification"});
    try {
        const auto s = eigenvalues(q, u, n_max, opts);
        write_slice(csv, s.eigenvalues, s.multiplicities, s.index_offset, to_string(s.certification));
    } catch (const IncompleteSpectrumError& e) {
        write_slice(csv, e.found(), e.multiplicities(), 0, "incomplete");
        err << "incomplete spectrum: " << e.what() << '\n';
        return incomplete;
    }
    return ok;
}

int cmd_curve(const Job& job, std::ostream& out, std::ostream&)
{
    const auto& c = job.config;
    const auto q = parse_potential(c.at("potential"), job.base_dir);
    const auto [lo, hi] = window_of(c);
    const auto rows = tabulate_curve(q, lo, hi, grid_value(c, "points", 200), tol_of(c));

    Sink sink(output_of(c), out);
    Csv csv(sink.get());
    csv.row({"lambda", "g11_re", "g11_im", "g12_re", "g12_im", "g22_re", "g22_im", "kappa_plus_arg",
             "kappa_minus_arg", "unitarity_defect"});
    for (const auto& g : rows) {
        const Matrix2cd& m = g.gamma_matrix;
        csv.row({fmt(g.lambda), fmt(m(0, 0).real()), fmt(m(0, 0).imag()), fmt(m(0, 1).real()), fmt(m(0, 1).imag()),
                 fmt(m(1, 1).real()), fmt(m(1, 1).imag()), fmt(std::arg(g.kappa_plus)), fmt(std::arg(g.kappa_minus)),
                 fmt(unitarity_defect(m))});
    }
    return ok;
}

int cmd_orbit_scan(const Job& job, std::ostream& out, std::ostream&)
{
    const auto& c = job.config;
    const auto q = parse_potential(c.at("potential"), job.base_dir);
    const auto o = parse_orbit(c.at("orbit"));
    const std::size_t n_max = count(c, "n_max", 3);
    const auto s = lambda_surface(q, o, n_max, grid_value(c, "n_coord", 32), grid_value(c, "n_gamma", 32), tol_of(c));

    Sink sink(output_of(c), out);
    Csv csv(sink.get());
    csv.row({"theta_or_tau", "gamma", "n", "lambda"});
    for (std::size_t i = 0; i < s.coords.size(); ++i)
        for (std::size_t j = 0; j < s.gammas.size(); ++j)
            for (std::size_t n = 0; n <= n_max; ++n)
                csv.row({fmt(s.coords[i]), fmt(s.gammas[j]), fmt(n), fmt(s.at(i, j, n))});
    return ok;
}

json report_json(const OrbitReport& r)
{
    json checks = json::array();
    for (const auto& t : r.checks) {
        json ce = json::array();
        for (const auto& x : t.counterexamples)
            ce.push_back({{"n", x.n}, {"coordinate", x.coordinate}, {"gamma", x.gamma}, {"value", x.value},
                          {"bound", x.bound}});
        checks.push_back({{"name", t.name},
                          {"passed", t.passed},
                          {"skipped", t.skipped},
                          {"informational", t.informational},
                          {"detail", t.detail},
                          {"counterexamples", ce}});
    }
    json hits = json::array();
    for (const auto& h : r.hits)
        hits.push_back({{"lambda", h.lambda}, {"residual", h.residual}});
    return {{"orbit", orbit_json(r.orbit)}, {"n_max", r.n_max},      {"hypothesis_ok", r.hypothesis_ok},
            {"hits", hits},                 {"window", {r.window_lo, r.window_hi}},
            {"epsilon", r.epsilon},         {"passed", r.passed()},  {"checks", checks}};
}

json ranges_json(const std::vector<OrbitRange>& ranges)
{
    json out = json::array();
    for (const auto& r : ranges)
        out.push_back({{"n", r.n},
                       {"a_n", nan_as_null(r.a_n)},
                       {"b_n", nan_as_null(r.b_n)},
                       {"minimizer", point_json(r.minimizer)},
                       {"maximizer", point_json(r.maximizer)},
                       {"touching", r.touching}});
    return out;
}

std::string report_path(const json& output, const std::string& main)
{
    if (output.contains("report"))
        return output.at("report").get<std::string>();
    if (main.empty())
        return {};
    std::filesystem::path p(main);
    p.replace_extension(".report.json");
    return p.string();
}

int cmd_orbit_range(const Job& job, std::ostream& out, std::ostream& err)
{
    const auto& c = job.config;
    const auto q = parse_potential(c.at("potential"), job.base_dir);
    const auto o = parse_orbit(c.at("orbit"));
    const std::size_t n_max = count(c, "n_max", 3);
    const GridSpec grid{grid_value(c, "n_coord", 32), grid_value(c, "n_gamma", 32), grid_value(c, "n_circle", 64)};
    CriticalOptions opts;
    opts.tol = tol_of(c);
    if (c.contains("window"))
        opts.window = window_of(c);
    if (c.contains("allow_meeting")) {
        if (!c.at("allow_meeting").is_boolean())
            throw ConfigError("'allow_meeting' must be a boolean");
        opts.allow_meeting = c.at("allow_meeting").get<bool>();
    }

    int code = ok;
    std::vector<OrbitRange> ranges;
    std::vector<double> meeting;
    try {
        ranges = critical_values(q, o, n_max, opts);
    } catch (const HypothesisError& e) {
        meeting = e.hits();
        err << "hypothesis: " << e.what() << '\n';
        code = incomplete;
    }
    const auto rep = verify_orbit_theorems(q, o, n_max, grid, opts.tol);
    if (code != ok)
        ranges = rep.ranges;
    else if (rep.hypothesis_ok && !rep.passed())
        code = check_failed;

    const json output = output_of(c);
    Sink sink(output, out);
    Csv csv(sink.get());
    csv.row({"n", "a_n", "b_n", "min_theta", "min_gamma", "max_theta", "max_gamma"});
    for (const auto& r : ranges)
        csv.row({fmt(r.n), fmt(r.a_n), fmt(r.b_n), fmt(r.minimizer.coordinate()), fmt(r.minimizer.gamma),
                 fmt(r.maximizer.coordinate()), fmt(r.maximizer.gamma)});

    json report = report_json(rep);
    report["ranges"] = ranges_json(ranges);
    report["hypothesis_flag"] = code == incomplete;
    report["meeting_values"] = meeting;
    if (opts.window)
        report["search_window"] = {opts.window->first, opts.window->second};
    const std::string rp = report_path(output, sink.path());
    if (!rp.empty()) {
        std::ofstream f(rp, std::ios::binary);
        if (!f)
            throw ConfigError("cannot write report file: " + rp);
        f << report.dump(2) << '\n';
    }
    for (const auto& t : rep.checks)
        err << t.name << ": " << (t.skipped ? "skipped" : t.passed ? "passed" : "FAILED") << '\n';
    return code;
}

int cmd_levelset(const Job& job, std::ostream& out, std::ostream&)
{
    const auto& c = job.config;
    const auto q = parse_potential(c.at("potential"), job.base_dir);
    const auto o = parse_orbit(c.at("orbit"));
    const auto ls = level_set(q, o, number(c, "kappa"), tol_of(c));
    json j{{"orbit", orbit_json(o)},
           {"kappa", ls.kappa},
           {"shape", to_string(ls.shape)},
           {"x", ls.x},
           {"x_imag", ls.x_imag},
           {"complement", ls.complement},
           {"rho", {complex_json(ls.rho[0]), complex_json(ls.rho[1])}},
           {"zeta", {complex_json(ls.zeta[0]), complex_json(ls.zeta[1])}},
           {"point", ls.point ? point_json(*ls.point) : json(nullptr)}};
    Sink sink(output_of(c), out);
    sink.get() << j.dump(2) << '\n';
    return ok;
}

std::vector<double> beta_grid(std::size_t n)
{
    std::vector<double> b;
    for (std::size_t k = 1; k <= n; ++k)
        b.push_back(pi * double(k) / double(n));
    return b;
}

int cmd_diag_scan(const Job& job, std::ostream& out, std::ostream& err)
{
    const auto& c = job.config;
    const auto q = parse_potential(c.at("potential"), job.base_dir);
    const std::size_t n_max = count(c, "n_max", 4);
    const auto d = diagonal_scan(q, beta_grid(grid_value(c, "n_beta", 128)), n_max, tol_of(c));

    Sink sink(output_of(c), out);
    Csv csv(sink.get());
    csv.row({"beta", "n", "lambda"});
    for (std::size_t k = 0; k < d.betas.size(); ++k)
        for (std::size_t n = 0; n <= n_max; ++n)
            csv.row({fmt(d.betas[k]), fmt(n), fmt(d.at(k, n))});
    for (const auto& [k, n] : d.inversions)
        err << "non-monotone: n=" << n << " between beta=" << fmt(d.betas[k]) << " and " << fmt(d.betas[k + 1])
            << '\n';
    return d.inversions.empty() ? ok : check_failed;
}

struct Suite {
    std::ostream& err;
    int failures = 0;

    void report(const std::string& module, const std::string& name, bool pass, const std::string& detail = {})
    {
        err << (pass ? "PASS " : "FAIL ") << module << '.' << name;
        if (!detail.empty())
            err << "  " << detail;
        err << '\n';
        if (!pass)
            ++failures;
    }

    void skip(const std::string& module, const std::string& name, const std::string& why)
    {
        err << "SKIP " << module << '.' << name << "  " << why << '\n';
    }
};

int cmd_check(const Job& job, std::ostream&, std::ostream& err)
{
    const auto& c = job.config;
    const auto q = c.contains("potential") ? parse_potential(c.at("potential"), job.base_dir) : Potential::zero();
    const double tol = tol_of(c);
    const std::size_t n_max = count(c, "n_max", 3);
    const GridSpec grid{grid_value(c, "n_coord", 16), grid_value(c, "n_gamma", 16), grid_value(c, "n_circle", 48)};
    std::vector<AdjointOrbit> orbits;
    if (c.contains("orbits")) {
        if (!c.at("orbits").is_array())
            throw ConfigError("'orbits' must be an array");
        for (const auto& o : c.at("orbits"))
            orbits.push_back(parse_orbit(o));
    } else {
        orbits = {AdjointOrbit::hermitian(0, 1), AdjointOrbit::exceptional(pi / 2),
                  AdjointOrbit::exceptional(3 * pi / 2)};
    }

    Suite s{err};
    std::mt19937_64 rng(20261014);
    std::uniform_real_distribution<double> uni(-2, 2);

    double wr = 0;
    for (double l : {-50.0, -5.0, 0.0, 5.0, 50.0, 500.0})
        wr = std::max(wr, wronskian_defect(fundamental(q, l, tol)));
    s.report("fundsol", "wronskian", wr <= 1e-8, "max defect " + fmt(wr));

    double trip = 0;
    for (int k = 0; k < 32; ++k) {
        const HermitianBC<double> h{uni(rng), uni(rng), cdouble(uni(rng), uni(rng))};
        const auto back = to_hermitian(from_hermitian(h));
        trip = std::max({trip, std::abs(back.a - h.a), std::abs(back.c - h.c), std::abs(back.b - h.b)});
    }
    s.report("bc", "hermitian_round_trip", trip <= 1e-10, "max error " + fmt(trip));

    double defect = 0, sym = 0;
    for (const auto& g : tabulate_curve(q, -50, 2000, 1000, tol)) {
        defect = std::max(defect, unitarity_defect(g.gamma_matrix));
        sym = std::max(sym, std::abs(g.gamma_matrix(0, 1) - g.gamma_matrix(1, 0)));
    }
    s.report("charcurve", "unitary_symmetric", defect <= 1e-8 && sym <= 1e-8,
             "unitarity " + fmt(defect) + " symmetry " + fmt(sym));

    const auto ref = reference_spectra(q, n_max, tol);
    SpectrumOptions plain;
    plain.tol = tol;
    SpectrumOptions scan = plain;
    scan.window = std::make_pair(ref.dirichlet[0] - 1.0, ref.dirichlet[n_max] + 0.5);
    const auto dir = eigenvalues(q, -Matrix2cd::Identity(), n_max, scan).indexed();
    double dd = dir.size() == n_max + 1 ? 0.0 : 1.0;
    for (std::size_t n = 0; n < std::min(dir.size(), n_max + 1); ++n)
        dd = std::max(dd, std::abs(dir[n] - ref.dirichlet[n]) / std::max(1.0, std::abs(ref.dirichlet[n])));
    s.report("spectrum", "dirichlet_scan_vs_prufer", dd <= 1e-8, "max relative error " + fmt(dd));

    const double kappa = ref.dirichlet[0] + 1.0;
    const auto curve_u = gamma(fundamental(q, kappa, tol)).gamma_matrix;
    SpectrumOptions upto = plain;
    upto.upper_limit = kappa + 1.0;
    const auto dbl = eigenvalues(q, curve_u, 0, upto);
    bool doubled = false;
    for (std::size_t i = 0; i < dbl.eigenvalues.size(); ++i)
        doubled = doubled || (std::abs(dbl.eigenvalues[i] - kappa) <= 1e-6 * std::max(1.0, kappa) &&
                              dbl.multiplicities[i] == 2);
    s.report("spectrum", "curve_double_eigenvalue", doubled, "lambda " + fmt(kappa));

    for (const auto& o : orbits) {
        const auto rep = verify_orbit_theorems(q, o, n_max, grid, tol);
        if (!rep.hypothesis_ok) {
            s.skip("orbits", o.describe(), "orbit meets the characteristic curve");
            continue;
        }
        for (const auto& t : rep.checks) {
            if (t.skipped)
                s.skip("orbits", o.describe() + "." + t.name, t.detail);
            else if (t.informational)
                err << "INFO " << "orbits." << o.describe() << '.' << t.name << "  " << t.detail << '\n';
            else
                s.report("orbits", o.describe() + "." + t.name, t.passed, t.detail);
        }
        double worst = 0;
        for (double k : {ref.dirichlet[0] + 0.5, 0.5 * (ref.dirichlet[1] + ref.dirichlet[2])}) {
            const auto ls = level_set(q, o, k, tol);
            if (ls.shape != LevelShape::circle)
                continue;
            const auto f = fundamental(q, k, tol);
            for (int j = 0; j < 8; ++j)
                worst = std::max(worst, std::abs(char_complex<double>(ls.member(2 * pi * j / 8), f)));
        }
        s.report("orbits", o.describe() + ".level_set_members", worst <= 1e-6, "max residual " + fmt(worst));
    }

    const auto d = diagonal_scan(q, beta_grid(32), std::min<std::size_t>(n_max, 4), tol);
    s.report("orbits", "diagonal_monotone", d.inversions.empty(),
             std::to_string(d.inversions.size()) + " inversions");

    err << (s.failures == 0 ? "all checks passed" : std::to_string(s.failures) + " checks failed") << '\n';
    return s.failures == 0 ? ok : check_failed;
}

} // namespace

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
}

Potential parse_potential(const json& j, const std::filesystem::path& base_dir)
{
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("potential needs a string 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "zero") {
        only_keys(j, {"kind"}, "potential");
        return Potential::zero();
    }
    if (kind == "constant") {
        only_keys(j, {"kind", "c"}, "potential");
        return Potential::constant(number(j, "c"));
    }
    if (kind == "polynomial") {
        only_keys(j, {"kind", "coeffs"}, "potential");
        return Potential::polynomial(numbers(j, "coeffs"));
    }
    if (kind == "sampled") {
        if (j.contains("file")) {
            only_keys(j, {"kind", "file"}, "potential");
            std::filesystem::path p = j.at("file").get<std::string>();
            if (p.is_relative())
                p = base_dir / p;
            return load_sampled_potential(p.string());
        }
        only_keys(j, {"kind", "xs", "qs"}, "potential");
        return Potential::sampled(numbers(j, "xs"), numbers(j, "qs"));
    }
    throw ConfigError("unknown potential kind '" + kind + "'");
}

Matrix2cd parse_bc(const json& j)
{
    if (!j.is_object() || j.size() != 1)
        throw ConfigError("bc must be an object with exactly one of unitary, hermitian, separated, coupled, u0");
    const auto& [kind, v] = *j.items().begin();
    if (kind == "unitary") {
        if (!v.is_array() || v.size() != 4)
            throw ConfigError("bc.unitary must list four [re, im] entries");
        Matrix2cd u;
        for (int k = 0; k < 4; ++k) {
            const auto& e = v.at(k);
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ConfigError("bc.unitary entries must be [re, im]");
            u(k / 2, k % 2) = cdouble(e[0].get<double>(), e[1].get<double>());
        }
        require_unitary(u);
        return u;
    }
    if (kind == "hermitian") {
        only_keys(v, {"a", "c", "b_re", "b_im"}, "bc.hermitian");
        return from_hermitian(HermitianBC<double>{number(v, "a"), number(v, "c"),
                                                  cdouble(number(v, "b_re"), number(v, "b_im"))});
    }
    if (kind == "separated") {
        only_keys(v, {"alpha", "beta"}, "bc.separated");
        return from_separated(SeparatedBC<double>{number(v, "alpha"), number(v, "beta")});
    }
    if (kind == "coupled") {
        only_keys(v, {"phi", "k"}, "bc.coupled");
        const auto k = numbers(v, "k");
        if (k.size() != 4)
            throw ConfigError("bc.coupled.k must be [k11, k12, k21, k22]");
        return from_coupled(CoupledBC<double>{number(v, "phi"), k[0], k[1], k[2], k[3]});
    }
    if (kind == "u0") {
        only_keys(v, {"r", "beta0", "gamma0"}, "bc.u0");
        return from_u0_param(U0Param<double>{number(v, "r"), number(v, "beta0"), number(v, "gamma0")});
    }
    throw ConfigError("unknown bc kind '" + kind + "'");
}

AdjointOrbit parse_orbit(const json& j)
{
    only_keys(j, {"kind", "parameters"}, "orbit");
    if (!j.contains("kind") || !j.at("kind").is_string() || !j.contains("parameters"))
        throw ConfigError("orbit needs 'kind' and 'parameters'");
    const auto kind = j.at("kind").get<std::string>();
    const json& p = j.at("parameters");
    if (kind == "hermitian") {
        only_keys(p, {"mu", "nu"}, "orbit.parameters");
        return AdjointOrbit::hermitian(number(p, "mu"), number(p, "nu"));
    }
    if (kind == "exceptional") {
        only_keys(p, {"alpha"}, "orbit.parameters");
        return AdjointOrbit::exceptional(number(p, "alpha"));
    }
    throw ConfigError("unknown orbit kind '" + kind + "'");
}

Job prepare(const std::string& command, json config, const std::filesystem::path& base_dir, const Overrides& o)
{
    const auto it = schemas().find(command);
    if (it == schemas().end())
        throw ConfigError("unknown command '" + command + "'");
    const Schema& s = it->second;
    if (!config.is_object())
        throw ConfigError("config must be a JSON object");

    auto allowed = [&](const std::string& key, const std::string& flag) {
        if (!s.required.count(key) && !s.optional.count(key))
            throw ConfigError(flag + " is not used by " + command);
    };
    if (o.tol) {
        allowed("tol", "--tol");
        config["tol"] = *o.tol;
    }
    if (o.n_max) {
        allowed("n_max", "--n-max");
        config["n_max"] = *o.n_max;
    }
    if (o.window) {
        allowed("window", "--window");
        config["window"] = {o.window->first, o.window->second};
    }
    if (o.out) {
        allowed("output", "--out");
        json out = output_of(config);
        out["path"] = *o.out;
        config["output"] = out;
    }

    std::set<std::string> keys = s.required;
    keys.insert(s.optional.begin(), s.optional.end());
    only_keys(config, keys, command + " config");
    for (const auto& k : s.required)
        if (!config.contains(k))
            throw ConfigError("missing key '" + k + "' for " + command);
    if (config.contains("grid"))
        only_keys(config.at("grid"), s.grid, "grid");
    if (config.contains("output")) {
        const json out = output_of(config);
        only_keys(out, command == "orbit-range" ? std::set<std::string>{"path", "format", "report"}
                                                : std::set<std::string>{"path", "format"},
                  "output");
        for (const auto& [k, v] : out.items())
            if (!v.is_string())
                throw ConfigError("output." + k + " must be a string");
        if (out.contains("format") && out.at("format").get<std::string>() != s.format)
            throw ConfigError(command + " writes " + s.format + " output");
    }
    if (config.contains("tol"))
        tol_of(config);
    return Job{command, std::move(config), base_dir};
}

int run(const Job& job, std::ostream& out, std::ostream& err)
{
    try {
        const std::string& c = job.command;
        if (c == "eigs")
            return cmd_eigs(job, out, err);
        if (c == "curve")
            return cmd_curve(job, out, err);
        if (c == "orbit-scan")
            return cmd_orbit_scan(job, out, err);
        if (c == "orbit-range")
            return cmd_orbit_range(job, out, err);
        if (c == "levelset")
            return cmd_levelset(job, out, err);
        if (c == "diag-scan")
            return cmd_diag_scan(job, out, err);
        if (c == "check")
            return cmd_check(job, out, err);
        throw ConfigError("unknown command '" + c + "'");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const InvalidInputError& e) {
        err << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const IncompleteSpectrumError& e) {
        err << "incomplete spectrum: " << e.what() << '\n';
        return incomplete;
    } catch (const HypothesisError& e) {
        err << "hypothesis: " << e.what() << '\n';
        return incomplete;
    } catch (const Error& e) {
        err << "computation failed: " << e.what() << '\n';
        return incomplete;
    }
}

} // namespace slorbit::cli
