#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fraclab/potential.hpp"

namespace fraclab {

// Invalid configuration: unknown key, unparsable value, or a value outside its domain.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { constants, kernel, kato, duhamel, lpgrowth, all };
std::string to_string(Command c);
Command parse_command(const std::string& name);

struct ExperimentConfig {
    Command command = Command::kernel;
    std::string suite;                 // empty: parametric run driven by the fields below
    double alpha = 0.5;
    int n = 1;
    int m = 1;                         // polyharmonic order for constants
    std::string potential = "zero";    // kind name, declarative entry, or file path
    std::vector<double> theta_list{1.0, 0.5, 0.25, 0.125};
    int N = 256;
    double L = 40.0;
    double tmin = 0.1;
    double tmax = 10.0;
    double beta = 0.6;
    double p = 1.0;                    // "inf" accepted
    std::string oracle = "none";       // kernel: none | poisson | gaussian
    int terms = 6;                     // Duhamel series terms
    double epsilon = 0.5;              // V^eps threshold
    long samples = 100000;             // Monte-Carlo sample count
    double tol = 0.0;                  // 0: the experiment's own tolerance
    std::string out = "fraclab_out";
    std::uint64_t seed = 20240601;
};

// Sets one key; throws ConfigError naming the key on unknown keys or bad values.
void set_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
// Flat "key = value" lines, '#' comments; later lines override earlier ones.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});
void validate_config(const ExperimentConfig& cfg);
const std::vector<std::string>& config_keys();
// Every key with its current value, in config_keys() order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);
// A file path is loaded as a potential file, anything else parsed as an entry.
Potential resolve_potential(const std::string& source, int n);

} // namespace fraclab
