#pragma once

#include "cneigh/simulate.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cneigh::cli {

/// File-system failures (exit code 3); input and usage errors use cneigh::Error.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> header; // empty when the file has none
    std::vector<std::vector<double>> rows;
    std::vector<int> lines; // 1-based source line of each row
};

/// Comma-separated numbers, one record per line. A first line that does not
/// parse as numbers is taken as the header; blank lines and lines starting
/// with '#' are skipped. All rows must have the same width.
CsvTable read_csv(const std::string& path);

/// Column index from a header name or a 1-based position.
std::size_t column_index(const CsvTable& table, const std::string& name_or_pos);

struct BenchConfig {
    std::vector<Scenario> scenarios;
    int reps = 500;
    std::optional<std::uint64_t> seed;
    int jobs = 0; // 0: available cores
    std::string out;
    bool timing = false;
    bool full_scale = false;
};

using Environment = std::map<std::string, std::string>;

/// The process environment restricted to CNEIGH_* variables.
Environment cneigh_environment();

/// Reads an INI file with a [run] section and one or more [scenario] or
/// [scenario.NAME] sections. Values from CNEIGH_<SECTION>_<KEY> variables
/// override the file (section and key upper-cased, '.' mapped to '_').
/// Unknown sections, keys or override variables are errors.
BenchConfig load_bench_config(const std::string& path, const Environment& env);

/// The accepted keys, for the help text and the schema document.
const std::vector<std::string>& run_keys();
const std::vector<std::string>& scenario_keys();

} // namespace cneigh::cli
