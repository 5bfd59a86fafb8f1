#pragma once

#include "bergmanlab/io.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bergmanlab {

inline constexpr const char* kSoftwareVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

/// Names accepted in the "experiment" field.
const std::vector<std::string>& experiment_names();

struct SweepSpec {
    /// "D", a dotted path into the config ("measure.s", "quadrature.shells"), or a key of "params".
    std::string variable;
    std::vector<Json> values;
    std::string metric;
    /// decreasing | increasing | stabilizes | bounded
    std::string trend = "stabilizes";
    double tolerance = 0.0;
};

struct RunConfig {
    Json raw;
    std::string experiment;
    int n = 2;
    int d = 1;
    std::vector<int> degrees;
    std::optional<VarietySpec> variety;
    Json measure;
    std::optional<QuadratureScheme> quadrature;
    std::uint64_t seed = 1;
    std::map<std::string, double> tolerances;
    Json params;
    std::optional<SweepSpec> sweep;
    std::string out_dir;

    double tol(const std::string& name, double fallback) const;
};

/// Validates and normalizes a config document; throws ConfigError on any violation.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);

struct Table {
    std::string name;
    /// Library operations whose outputs fill the table.
    std::vector<std::string> operations;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Verdict {
    std::string name;
    std::string operation;
    double value = 0.0;
    /// "<", "<=", ">", ">=", or "in" (value within [tolerance, upper]).
    std::string comparison;
    double tolerance = 0.0;
    std::optional<double> upper;
    bool pass = false;
};

Verdict make_verdict(std::string name, std::string operation, double value, std::string comparison, double tolerance,
                     std::optional<double> upper = std::nullopt);

struct ExperimentResult {
    std::vector<Table> tables;
    std::vector<Verdict> verdicts;
    /// Scalar summaries available to sweeps.
    std::map<std::string, double> metrics;
};

ExperimentResult run_experiment(const RunConfig& cfg);

struct RunOptions {
    std::string out_dir;
    int threads = 1;
    std::optional<std::uint64_t> seed;
    bool write_files = true;
};

struct RunReport {
    /// Deterministic part: config echo, tables, verdicts, summary, software stamp.
    Json payload;
    /// Wall-clock timings in seconds, kept outside the payload.
    Json timings;
    bool all_passed = false;
};

RunReport run(const RunConfig& cfg, const RunOptions& opts = {});
RunReport sweep(const RunConfig& cfg, const RunOptions& opts = {});

/// Writes report.json and one CSV per table into dir.
void write_report(const RunReport& report, const std::string& dir);

/// %.16e formatting (17 significant digits).
std::string format_csv_number(double v);
std::string table_to_csv(const Table& t);

} // namespace bergmanlab
