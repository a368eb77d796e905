#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bec/cli/config.hpp"

namespace bec::cli {

using Cell = std::variant<double, long, std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row)
    {
        if (row.size() != header.size()) throw precondition_error("Table: row width does not match header");
        rows.push_back(std::move(row));
    }
};

inline std::string format_cell(const Cell& c)
{
    if (const double* d = std::get_if<double>(&c)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const long* i = std::get_if<long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

inline std::string to_csv(const Table& t)
{
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
    out += "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_cell(r[i]);
        out += "\n";
    }
    return out;
}

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
};

struct RunReport {
    std::string command;
    std::map<std::string, std::string> config;
    double seconds = 0.0;
    std::vector<Check> checks;
    std::map<std::string, double> values;
    std::vector<std::string> files;

    bool passed() const
    {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }

    void check(const std::string& name, bool ok, double value, double tolerance)
    {
        for (const auto& c : checks)
            if (c.name == name) throw precondition_error("RunReport: duplicate check '" + name + "'");
        checks.push_back({name, ok, value, tolerance});
    }
};

inline nlohmann::json to_json(const RunReport& r)
{
    nlohmann::json j;
    j["command"] = r.command;
    j["config"] = r.config;
    j["seconds"] = r.seconds;
    j["passed"] = r.passed();
    j["values"] = r.values;
    j["files"] = r.files;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : r.checks)
        j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance}});
    return j;
}

class OutputDir {
public:
    OutputDir(std::string dir, std::string prefix) : dir_(std::move(dir)), prefix_(std::move(prefix))
    {
        std::filesystem::create_directories(dir_);
    }

    std::string path(const std::string& name) const
    {
        return (std::filesystem::path(dir_) / (prefix_ + "_" + name)).string();
    }

    // Writes without touching the manifest.
    std::string write_raw(const std::string& name, const std::string& content) const
    {
        const std::string p = path(name);
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + p + "'");
        f << content;
        return p;
    }

    std::string write(const std::string& name, const std::string& content, RunReport& rep) const
    {
        rep.files.push_back(write_raw(name, content));
        return rep.files.back();
    }

    std::string write(const std::string& name, const Table& t, RunReport& rep) const { return write(name, to_csv(t), rep); }

private:
    std::string dir_, prefix_;
};

// Minimal matplotlib script: column `x` against every column in `ys`.
inline std::string plot_script(const std::string& csv, const std::string& x, const std::vector<std::string>& ys,
                               bool logx = false)
{
    std::string s = "import sys\nimport pandas as pd\nimport matplotlib.pyplot as plt\n\n";
    s += "d = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else \"" + csv + "\")\n";
    s += "fig, ax = plt.subplots()\n";
    for (const auto& y : ys) s += "ax.plot(d[\"" + x + "\"], d[\"" + y + "\"], label=\"" + y + "\")\n";
    if (logx) s += "ax.set_xscale(\"log\")\n";
    s += "ax.set_xlabel(\"" + x + "\")\nax.legend()\nfig.savefig(\"" + csv + ".png\", dpi=150)\n";
    return s;
}

} // namespace bec::cli
