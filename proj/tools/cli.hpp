#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "slorbit/orbits.hpp"

namespace slorbit::cli {

using nlohmann::json;

enum Exit : int { ok = 0, config_error = 1, incomplete = 2, check_failed = 3 };

struct Overrides {
    std::optional<double> tol;
    std::optional<std::size_t> n_max;
    std::optional<std::pair<double, double>> window;
    std::optional<std::string> out;
};

// Relative paths inside a config resolve against its directory.
struct Job {
    std::string command;
    json config = json::object();
    std::filesystem::path base_dir = ".";
};

json load_config(const std::string& path);

Potential parse_potential(const json& j, const std::filesystem::path& base_dir);
Matrix2cd parse_bc(const json& j);
AdjointOrbit parse_orbit(const json& j);

// Applies flag overrides and rejects keys the command does not use.
Job prepare(const std::string& command, json config, const std::filesystem::path& base_dir,
            const Overrides& o);

// Writes artifacts to the configured output (or `out`) and diagnostics to `err`.
int run(const Job& job, std::ostream& out, std::ostream& err);

std::string format_double(double v);

} // namespace slorbit::cli
