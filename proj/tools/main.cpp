#include <CLI11.hpp>

#include <iostream>

#include "cli.hpp"

namespace {

std::pair<double, double> parse_window(const std::string& s)
{
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw slorbit::ConfigError("--window expects lo:hi");
    try {
        std::size_t used = 0;
        const double lo = std::stod(s.substr(0, colon), &used);
        if (used != colon)
            throw std::invalid_argument("lo");
        const std::string rest = s.substr(colon + 1);
        const double hi = std::stod(rest, &used);
        if (used != rest.size())
            throw std::invalid_argument("hi");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw slorbit::ConfigError("--window expects lo:hi, got '" + s + "'");
    }
}

} // namespace

int main(int argc, char** argv)
{
    using namespace slorbit::cli;

    CLI::App app{"Eigenvalues of -y'' + q y = lambda y on [0, 1] under self-adjoint boundary conditions"};
    app.require_subcommand(1);

    std::string config_path;
    double tol = 0;
    std::size_t n_max = 0;
    std::string window, out;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"eigs", "indexed eigenvalues for one boundary condition"},
        {"curve", "tabulate the characteristic curve over a window"},
        {"orbit-scan", "eigenvalue surfaces over an orbit"},
        {"orbit-range", "critical values of an orbit and the theorem report"},
        {"levelset", "boundary conditions of an orbit with a given eigenvalue"},
        {"diag-scan", "eigenvalues along the diagonal circle"},
        {"check", "run the invariant suite"},
    };
    std::vector<CLI::App*> subs;
    std::vector<CLI::Option*> tol_opts, n_opts, window_opts, out_opts;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        auto* cfg = sub->add_option("--config", config_path, "JSON config file");
        if (name != "check")
            cfg->required();
        tol_opts.push_back(sub->add_option("--tol", tol, "integration tolerance"));
        n_opts.push_back(sub->add_option("--n-max", n_max, "highest eigenvalue index"));
        window_opts.push_back(sub->add_option("--window", window, "lambda window lo:hi"));
        out_opts.push_back(sub->add_option("--out", out, "output path"));
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    for (std::size_t k = 0; k < subs.size(); ++k) {
        if (!subs[k]->parsed())
            continue;
        try {
            Overrides o;
            if (*tol_opts[k])
                o.tol = tol;
            if (*n_opts[k])
                o.n_max = n_max;
            if (*window_opts[k])
                o.window = parse_window(window);
            if (*out_opts[k])
                o.out = out;
            json config = json::object();
            std::filesystem::path base = ".";
            if (!config_path.empty()) {
                config = load_config(config_path);
                base = std::filesystem::path(config_path).parent_path();
                if (base.empty())
                    base = ".";
            }
            const Job job = prepare(subs[k]->get_name(), std::move(config), base, o);
            return run(job, std::cout, std::cerr);
        } catch (const slorbit::ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return config_error;
        } catch (const slorbit::Error& e) {
            std::cerr << "invalid input: " << e.what() << '\n';
            return config_error;
        }
    }
    return config_error;
}
