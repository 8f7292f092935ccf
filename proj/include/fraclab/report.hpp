#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fraclab {

// One judged number: value relation bound, e.g. "max_rel_err <= 1e-8".
struct Check {
    std::string name;
    double value = 0.0;
    std::string relation; // "<=", ">=", "<", ">", "=="
    double bound = 0.0;
    bool pass = false;
};

struct Table {
    std::string name; // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct XYSeries {
    std::string name; // file stem
    std::vector<double> x, y;
};

struct MatrixRecord {
    std::string name; // file stem
    Eigen::MatrixXd data;
    double t = 0.0;
    double alpha = 0.0;
    int n = 1;
};

struct Report {
    std::string command;
    std::string suite;
    std::string criterion; // acceptance id when the run is one, else empty
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<Check> checks;
    std::vector<std::pair<std::string, double>> constants;
    std::vector<std::string> notes;
    std::vector<Table> tables;
    std::vector<XYSeries> plots;
    std::vector<MatrixRecord> matrices;
    double wall_seconds = 0.0;

    bool passed() const;
    // records and returns the outcome of value <relation> bound
    bool check(const std::string& name, double value, const std::string& relation, double bound);
    void constant(const std::string& name, double value) { constants.emplace_back(name, value); }
    // one-line summary: "PASS name (k/k checks)" or the first failing check
    std::string summary() const;
};

// report.json content; the timestamp lives in "metadata" only.
std::string report_json(const Report& r, const std::string& timestamp = "");
// CSV: header row, comma separated, %.17g
std::string table_csv(const Table& t);
// two columns separated by a space, %.17g
std::string series_xy(const XYSeries& s);

// Binary matrix layout (little-endian): 8-byte magic "FRACLABM", uint32 version (1), uint32 n,
// uint64 rows, uint64 cols, float64 t, float64 alpha, then rows*cols float64 in row-major order.
void write_matrix_binary(const std::string& path, const MatrixRecord& m);
MatrixRecord read_matrix_binary(const std::string& path);

// Writes report.json, <table>.csv, <series>.xy and <matrix>.bin into dir (created if needed).
// Returns the written file names.
std::vector<std::string> write_report_files(const Report& r, const std::string& dir);

} // namespace fraclab
