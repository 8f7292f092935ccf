#include "fraclab/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// JSON has no infinities or NaN; they are written as strings
nlohmann::ordered_json jnum(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

bool compare(double v, const std::string& rel, double b) {
    if (rel == "<=") return v <= b;
    if (rel == ">=") return v >= b;
    if (rel == "<") return v < b;
    if (rel == ">") return v > b;
    if (rel == "==") return v == b;
    throw DomainError("unknown check relation '" + rel + "'");
}

} // namespace

bool Report::passed() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

bool Report::check(const std::string& name, double value, const std::string& relation, double bound) {
    Check c{name, value, relation, bound, false};
    c.pass = !std::isnan(value) && compare(value, relation, bound);
    checks.push_back(c);
    return c.pass;
}

std::string Report::summary() const {
    std::size_t ok = 0;
    const Check* first_bad = nullptr;
    for (const auto& c : checks) {
        if (c.pass) ++ok;
        else if (!first_bad) first_bad = &c;
    }
    std::string label = criterion.empty() ? command + (suite.empty() ? "" : "/" + suite) : criterion;
    std::string s = (passed() ? "PASS " : "FAIL ") + label + " (" + std::to_string(ok) + "/" +
                    std::to_string(checks.size()) + " checks)";
    if (first_bad)
        s += ": " + first_bad->name + " = " + g17(first_bad->value) + ", required " + first_bad->relation + " " +
             g17(first_bad->bound);
    return s;
}

std::string report_json(const Report& r, const std::string& timestamp) {
    nlohmann::ordered_json j;
    j["command"] = r.command;
    j["suite"] = r.suite;
    j["criterion"] = r.criterion;
    j["passed"] = r.passed();
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.config) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"value", jnum(c.value)}, {"relation", c.relation},
                          {"tolerance", jnum(c.bound)}, {"pass", c.pass}});
    j["checks"] = checks;
    nlohmann::ordered_json consts = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.constants) consts[k] = jnum(v);
    j["constants"] = consts;
    j["notes"] = r.notes;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& t : r.tables) files.push_back(t.name + ".csv");
    for (const auto& s : r.plots) files.push_back(s.name + ".xy");
    for (const auto& m : r.matrices) files.push_back(m.name + ".bin");
    j["files"] = files;
    j["metadata"] = {{"wall_seconds", r.wall_seconds}, {"timestamp", timestamp}};
    return j.dump(2) + "\n";
}

std::string table_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw DomainError("table '" + t.name + "': row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + g17(row[i]);
        s += "\n";
    }
    return s;
}

std::string series_xy(const XYSeries& s) {
    if (s.x.size() != s.y.size()) throw DomainError("series '" + s.name + "': x and y differ in length");
    std::string out;
    for (std::size_t i = 0; i < s.x.size(); ++i) out += g17(s.x[i]) + " " + g17(s.y[i]) + "\n";
    return out;
}

void write_matrix_binary(const std::string& path, const MatrixRecord& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + path + "'");
    const char magic[8] = {'F', 'R', 'A', 'C', 'L', 'A', 'B', 'M'};
    const std::uint32_t version = 1, n = (std::uint32_t)m.n;
    const std::uint64_t rows = (std::uint64_t)m.data.rows(), cols = (std::uint64_t)m.data.cols();
    out.write(magic, 8);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(&m.t), 8);
    out.write(reinterpret_cast<const char*>(&m.alpha), 8);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m.data;
    out.write(reinterpret_cast<const char*>(rm.data()), (std::streamsize)(rows * cols * 8));
    if (!out) throw DomainError("short write to '" + path + "'");
}

MatrixRecord read_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read '" + path + "'");
    char magic[8];
    std::uint32_t version = 0, n = 0;
    std::uint64_t rows = 0, cols = 0;
    MatrixRecord m;
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "FRACLABM", 8) != 0) throw DomainError("'" + path + "' is not a kernel matrix file");
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    in.read(reinterpret_cast<char*>(&m.t), 8);
    in.read(reinterpret_cast<char*>(&m.alpha), 8);
    if (!in || version != 1) throw DomainError("'" + path + "': unsupported header");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    in.read(reinterpret_cast<char*>(rm.data()), (std::streamsize)(rows * cols * 8));
    if (!in) throw DomainError("'" + path + "': truncated data");
    m.data = rm;
    m.n = (int)n;
    std::filesystem::path p(path);
    m.name = p.stem().string();
    return m;
}

std::vector<std::string> write_report_files(const Report& r, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& content) {
        std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
        if (!out) throw DomainError("cannot write '" + name + "' in '" + dir + "'");
        out << content;
        written.push_back(name);
    };
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    put("report.json", report_json(r, stamp));
    for (const auto& t : r.tables) put(t.name + ".csv", table_csv(t));
    for (const auto& s : r.plots) put(s.name + ".xy", series_xy(s));
    for (const auto& m : r.matrices) {
        write_matrix_binary((std::filesystem::path(dir) / (m.name + ".bin")).string(), m);
        written.push_back(m.name + ".bin");
    }
    return written;
}

} // namespace fraclab
