#include "fraclab/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "infinity") return HUGE_VAL;
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return (long)d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

std::string num(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string to_string(Command c) {
    switch (c) {
    case Command::constants: return "constants";
    case Command::kernel: return "kernel";
    case Command::kato: return "kato";
    case Command::duhamel: return "duhamel";
    case Command::lpgrowth: return "lpgrowth";
    case Command::all: return "all";
    }
    return "?";
}

Command parse_command(const std::string& name) {
    for (Command c : {Command::constants, Command::kernel, Command::kato, Command::duhamel, Command::lpgrowth,
                      Command::all})
        if (to_string(c) == name) return c;
    throw ConfigError("unknown command '" + name + "'");
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{"command", "suite", "alpha", "n",       "m",      "potential",
                                               "theta_list", "N",   "L",     "tmin",    "tmax",   "beta",
                                               "p",       "oracle", "terms", "epsilon", "samples", "tol",
                                               "out",     "seed"};
    return keys;
}

void set_config_key(ExperimentConfig& cfg, const std::string& key_in, const std::string& value_in) {
    const std::string key = trim(key_in), v = trim(value_in);
    if (key == "command") cfg.command = parse_command(v);
    else if (key == "suite") cfg.suite = v;
    else if (key == "alpha") cfg.alpha = to_double(key, v);
    else if (key == "n") cfg.n = (int)to_long(key, v);
    else if (key == "m") cfg.m = (int)to_long(key, v);
    else if (key == "potential") cfg.potential = v;
    else if (key == "theta_list") {
        cfg.theta_list.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.theta_list.push_back(to_double(key, trim(item)));
    } else if (key == "N") cfg.N = (int)to_long(key, v);
    else if (key == "L") cfg.L = to_double(key, v);
    else if (key == "tmin") cfg.tmin = to_double(key, v);
    else if (key == "tmax") cfg.tmax = to_double(key, v);
    else if (key == "beta") cfg.beta = to_double(key, v);
    else if (key == "p") cfg.p = to_double(key, v);
    else if (key == "oracle") cfg.oracle = v;
    else if (key == "terms") cfg.terms = (int)to_long(key, v);
    else if (key == "epsilon") cfg.epsilon = to_double(key, v);
    else if (key == "samples") cfg.samples = to_long(key, v);
    else if (key == "tol") cfg.tol = to_double(key, v);
    else if (key == "out") cfg.out = v;
    else if (key == "seed") {
        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError("config key 'seed': expected a nonnegative integer, got '" + v + "'");
        cfg.seed = std::stoull(v);
    } else
        throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        set_config_key(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

void validate_config(const ExperimentConfig& c) {
    auto bad = [](const std::string& key, const std::string& why) {
        throw ConfigError("config key '" + key + "': " + why);
    };
    if (!(c.alpha > 0) || !std::isfinite(c.alpha)) bad("alpha", "must be positive");
    if (c.n < 1 || c.n > 3) bad("n", "must be 1, 2 or 3");
    if (c.m < 1 || c.m > 12) bad("m", "must lie in 1..12");
    if (c.N < 2 || (c.N & (c.N - 1)) != 0) bad("N", "must be a power of two");
    if (!(c.L > 0) || !std::isfinite(c.L)) bad("L", "must be positive");
    if (!(c.tmin > 0) || !(c.tmax >= c.tmin) || !std::isfinite(c.tmax)) bad("tmin", "need 0 < tmin <= tmax < inf");
    if (!(c.beta >= 0) || !std::isfinite(c.beta)) bad("beta", "must be nonnegative");
    if (!(c.p >= 1)) bad("p", "must be >= 1 (or inf)");
    if (c.theta_list.empty()) bad("theta_list", "must not be empty");
    for (double th : c.theta_list)
        if (!(th > 0 && th <= 1)) bad("theta_list", "entries must lie in (0, 1]");
    if (c.oracle != "none" && c.oracle != "poisson" && c.oracle != "gaussian")
        bad("oracle", "must be none, poisson or gaussian");
    if (c.terms < 0 || c.terms > 20) bad("terms", "must lie in 0..20");
    if (!(c.epsilon > 0 && c.epsilon < 1)) bad("epsilon", "must lie in (0, 1)");
    if (c.samples < 1) bad("samples", "must be positive");
    if (!(c.tol >= 0)) bad("tol", "must be nonnegative");
    if (c.out.empty()) bad("out", "must not be empty");
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
    std::string thetas;
    for (std::size_t i = 0; i < c.theta_list.size(); ++i) thetas += (i ? "," : "") + num(c.theta_list[i]);
    return {{"command", to_string(c.command)},
            {"suite", c.suite},
            {"alpha", num(c.alpha)},
            {"n", std::to_string(c.n)},
            {"m", std::to_string(c.m)},
            {"potential", c.potential},
            {"theta_list", thetas},
            {"N", std::to_string(c.N)},
            {"L", num(c.L)},
            {"tmin", num(c.tmin)},
            {"tmax", num(c.tmax)},
            {"beta", num(c.beta)},
            {"p", num(c.p)},
            {"oracle", c.oracle},
            {"terms", std::to_string(c.terms)},
            {"epsilon", num(c.epsilon)},
            {"samples", std::to_string(c.samples)},
            {"tol", num(c.tol)},
            {"out", c.out},
            {"seed", std::to_string(c.seed)}};
}

Potential resolve_potential(const std::string& source, int n) {
    std::error_code ec;
    try {
        if (std::filesystem::is_regular_file(source, ec)) return load_potential_file(source, n);
        return parse_potential(source, n);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config key 'potential': ") + e.what());
    }
}

} // namespace fraclab
