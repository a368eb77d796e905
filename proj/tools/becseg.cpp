#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "bec/cli/config.hpp"
#include "bec/cli/run.hpp"

int main(int argc, char** argv)
{
    using namespace bec::cli;
    const std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        std::cerr << usage();
        return args.empty() ? 2 : 0;
    }
    ExperimentConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const bec::usage_error& e) {
        std::cerr << "becseg: " << e.what() << "\nrun 'becseg --help' for the list of commands and keys\n";
        return 2;
    }
    for (const auto& w : cfg.warnings) std::cerr << "becseg: warning: " << w << "\n";

    RunReport rep;
    try {
        rep = run(cfg);
    } catch (const bec::usage_error& e) {
        std::cerr << "becseg: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "becseg: error: " << e.what() << "\n";
        return 1;
    }

    for (const auto& [k, v] : rep.values) std::printf("%-32s %.10g\n", k.c_str(), v);
    for (const auto& c : rep.checks)
        std::printf("[%s] %s  value=%.6g  tol=%.3g\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.tolerance);
    for (const auto& f : rep.files) std::printf("wrote %s\n", f.c_str());
    std::printf("%.2f s\n", rep.seconds);
    return rep.passed() ? 0 : 1;
}
