#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bec/errors.hpp"

namespace bec::cli {

struct KeySpec {
    std::string name;
    std::string fallback; // empty means required
    std::string help;
};

struct CommandSpec {
    std::string name;
    std::string summary;
    std::vector<KeySpec> keys;
};

inline const std::vector<CommandSpec>& commands()
{
    static const std::vector<CommandSpec> table{
        {"tf", "closed-form Thomas-Fermi profile, quadrature energy and stability sweep",
         {{"alpha1", "", "mass of component 1"},
          {"alpha2", "", "mass of component 2"},
          {"g", "", "intra-species coupling of component 2 (> 1)"},
          {"K", "", "inter-species coupling (>= sqrt g)"},
          {"h", "0", "radial step, 0 for R2/4096"},
          {"stability", "1", "run the perturbation sweep (0/1)"},
          {"n-random", "50", "random bump perturbations"}}},
        {"gp-minimize", "constrained minimization of the two-component energy on a square grid",
         {{"epsilon", "", "small parameter in (0, 1]"},
          {"g", "4", "intra-species coupling"},
          {"K", "2", "inter-species coupling"},
          {"alpha1", "1.5707963267948966", "mass of component 1"},
          {"alpha2", "1.5707963267948966", "mass of component 2"},
          {"n", "128", "grid points per axis"},
          {"tol", "1e-6", "projected gradient tolerance"},
          {"max-iter", "20000", "iteration cap"},
          {"potential", "harmonic", "harmonic or none"}}},
        {"sigma1d", "optimal one-dimensional transition profile",
         {{"lambda", "", "stiffness ratio in (0, 1]"},
          {"K", "", "coupling (> 1)"},
          {"L", "0", "half width, 0 for automatic"},
          {"n", "16001", "grid nodes"},
          {"tol", "1e-10", "gradient tolerance"}}},
        {"sigma-sweep", "surface tension over a list of couplings with bounds",
         {{"lambda", "", "stiffness ratio in (0, 1]"},
          {"K-list", "", "comma separated couplings (> 1)"},
          {"n", "16001", "grid nodes"},
          {"workers", "0", "worker threads, 0 for all cores"}}},
        {"shape-stability", "second-variation spectrum of the weighted perimeter against R",
         {{"R-min", "", "smallest weight radius (> 1)"},
          {"R-max", "", "largest weight radius"},
          {"R-steps", "1000", "radii in the diagram"},
          {"k-max", "4", "highest Fourier mode"},
          {"t", "1e-3", "amplitude for the direct second-order check"}}},
        {"shape-regimes", "symmetry breaking versus rigidity of the limit functional",
         {{"R", "", "weight radius (> 1)"},
          {"alpha-frac", "0.5", "target volume as a fraction of the total weight"},
          {"sigma-K", "1", "surface tension coefficient"},
          {"xi-max", "100", "largest coupling in the sweep"},
          {"xi-steps", "401", "sweep points"},
          {"convention", "half", "complement coefficient: half (xi/2) or full (xi)"},
          {"families", "ball,annulus,cap,disk,fourier", "competitor families"},
          {"samples", "200", "random shapes for the stability constants"}}},
        {"crossover-check", "energy splitting around the one-component minimizer",
         {{"epsilon", "0.2", "small parameter"},
          {"xi", "1.5", "crossover coupling, g = 1 + epsilon xi"},
          {"K", "3", "inter-species coupling"},
          {"alpha1", "1", "mass of component 1"},
          {"alpha2", "0.6", "mass of component 2"},
          {"n", "48", "grid points per axis"},
          {"tols", "1e-3,1e-4,1e-5,1e-6", "tolerances for the reference solve"}}},
    };
    return table;
}

inline const std::vector<KeySpec>& common_keys()
{
    static const std::vector<KeySpec> keys{
        {"out", "", "output directory (default $BEC_OUT_DIR or ./becseg-out)"},
        {"seed", "1", "seed for randomized families"},
        {"plot", "0", "also write a matplotlib script (0/1)"},
        {"config", "", "key = value file; flags override it"},
    };
    return keys;
}

inline std::string usage()
{
    std::ostringstream s;
    s << "usage: becseg <command> [--config FILE] [--key value ...]\n\ncommands:\n";
    for (const auto& c : commands()) {
        s << "  " << c.name << "\n      " << c.summary << "\n";
        for (const auto& k : c.keys)
            s << "      --" << k.name << (k.fallback.empty() ? " (required)" : " [" + k.fallback + "]") << "  " << k.help
              << "\n";
    }
    s << "\ncommon:\n";
    for (const auto& k : common_keys()) s << "  --" << k.name << "  " << k.help << "\n";
    return s.str();
}

struct ExperimentConfig {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::string output_dir;
    std::uint64_t seed = 1;
    bool plot = false;
    std::vector<std::string> warnings;

    const std::string& at(const std::string& key) const
    {
        auto it = parameters.find(key);
        if (it == parameters.end()) throw usage_error("missing key '" + key + "'");
        return it->second;
    }

    double real(const std::string& key) const
    {
        const std::string& s = at(key);
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0') throw usage_error("key '" + key + "': not a number: '" + s + "'");
        return v;
    }

    long integer(const std::string& key) const
    {
        const std::string& s = at(key);
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (s.empty() || *end != '\0') throw usage_error("key '" + key + "': not an integer: '" + s + "'");
        return v;
    }

    std::vector<double> reals(const std::string& key) const
    {
        std::vector<double> out;
        std::stringstream ss(at(key));
        for (std::string item; std::getline(ss, item, ',');) {
            char* end = nullptr;
            const double v = std::strtod(item.c_str(), &end);
            if (item.empty() || *end != '\0') throw usage_error("key '" + key + "': bad list entry '" + item + "'");
            out.push_back(v);
        }
        if (out.empty()) throw usage_error("key '" + key + "': empty list");
        return out;
    }

    std::vector<std::string> words(const std::string& key) const
    {
        std::vector<std::string> out;
        std::stringstream ss(at(key));
        for (std::string item; std::getline(ss, item, ',');)
            if (!item.empty()) out.push_back(item);
        return out;
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::map<std::string, std::string> read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw usage_error("cannot read config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw usage_error(path + ":" + std::to_string(no) + ": expected key = value");
        const std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (k.empty()) throw usage_error(path + ":" + std::to_string(no) + ": empty key");
        kv[k] = v;
    }
    return kv;
}

} // namespace detail

// args excludes the program name. `env_out` stands in for the output directory variable.
inline ExperimentConfig parse_config(const std::vector<std::string>& args, const char* env_out = std::getenv("BEC_OUT_DIR"))
{
    if (args.empty()) throw usage_error("no command given");
    ExperimentConfig cfg;
    cfg.command = args[0];
    const CommandSpec* spec = nullptr;
    for (const auto& c : commands())
        if (c.name == cfg.command) spec = &c;
    if (!spec) throw usage_error("unknown command '" + cfg.command + "'");

    auto known = [&](const std::string& k) {
        for (const auto& s : spec->keys)
            if (s.name == k) return true;
        for (const auto& s : common_keys())
            if (s.name == k) return true;
        return false;
    };

    std::map<std::string, std::string> flags;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0 || a.size() == 2) throw usage_error("expected --key, got '" + a + "'");
        std::string key = a.substr(2), value;
        const auto eq = key.find('=');
        if (eq != std::string::npos) {
            value = key.substr(eq + 1);
            key.erase(eq);
        } else {
            if (i + 1 >= args.size()) throw usage_error("missing value for --" + key);
            value = args[++i];
        }
        if (!known(key)) throw usage_error("unknown key '" + key + "' for command " + cfg.command);
        if (flags.count(key)) cfg.warnings.push_back("--" + key + " given more than once; using '" + value + "'");
        flags[key] = value;
    }

    std::map<std::string, std::string> merged;
    if (flags.count("config")) {
        for (const auto& [k, v] : detail::read_config_file(flags["config"])) {
            if (!known(k) || k == "config") throw usage_error("unknown key '" + k + "' in config file");
            merged[k] = v;
        }
    }
    for (const auto& [k, v] : flags) merged[k] = v;

    for (const auto& s : spec->keys) {
        if (!merged.count(s.name)) {
            if (s.fallback.empty()) throw usage_error("missing required key '" + s.name + "' for command " + cfg.command);
            merged[s.name] = s.fallback;
        }
    }
    for (const auto& s : common_keys())
        if (!merged.count(s.name) && !s.fallback.empty()) merged[s.name] = s.fallback;

    cfg.output_dir = merged.count("out") ? merged["out"] : (env_out && *env_out ? env_out : "becseg-out");
    merged.erase("out");
    merged.erase("config");
    cfg.parameters = merged;
    const long seed = cfg.integer("seed");
    if (seed < 0) throw usage_error("key 'seed' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    const long plot = cfg.integer("plot");
    if (plot != 0 && plot != 1) throw usage_error("key 'plot' must be 0 or 1");
    cfg.plot = plot == 1;
    return cfg;
}

} // namespace bec::cli
