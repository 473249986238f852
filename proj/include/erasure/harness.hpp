// Experiment configurations, command dispatch, reports and the acceptance
// battery behind the `erasure` tool.
//
// Config format: one `key = value` per line, '#' starts a comment, blank
// lines are ignored. Lists are whitespace separated. See README.md for the
// full key table.
#pragma once

#include "erasure/free_sets.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace erasure {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kOutDirEnv = "ERASURE_OUT_DIR";

enum class Command { Entropy, ConvexSplit, Protocol, Multiparty, Block, Rate, Converse, Suite };

std::string to_string(Command c);
std::optional<Command> parse_command(const std::string& name);

/// Collects every problem found while validating a config.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Exactly one of file, matrix, ket or preset is set.
struct StateSource {
  std::string file;
  std::string layout;
  std::string matrix;  // rows separated by ';', entries "re" or "re,im"
  std::string ket;     // amplitudes, normalised on load
  std::string preset;  // zero, one, plus, minus, mixed, bell
};

struct FreeSetSpec {
  std::string name;
  std::string inner;                 // shared-randomness only
  double beta = 1;                   // gibbs only
  std::vector<double> energies;      // gibbs only, diagonal Hamiltonian
  std::vector<std::string> group;    // asymmetry only, Pauli names
};

struct ExperimentConfig {
  Command command = Command::Suite;
  std::string name;
  std::optional<FreeSetSpec> free_set;
  std::optional<StateSource> rho;
  std::optional<StateSource> sigma;
  std::vector<double> eps{0.0};
  double delta = 0.5;
  double gamma = 0.1;
  std::vector<int> n{2, 4, 8};
  int m = 2;
  int t = 2;
  int n_max = 4;
  std::uint64_t seed = 1;
  std::size_t cap_dim = kMaxDenseDimension;
  int workers = 1;
  bool assume_structure = true;
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::string out;
  std::filesystem::path base_dir;  // file sources resolve against this
};

/// Strict parse: unknown keys, duplicates, bad values and missing required
/// fields are all collected into one ConfigError. `overrides` are applied as
/// if they were extra lines, after the text and before validation.
ExperimentConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides = {},
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::map<std::string, std::string>& overrides = {});

/// Resolved values of every field, defaults included.
nlohmann::json config_echo(const ExperimentConfig& config);

DensityMatrix resolve_state(const StateSource& source, const std::filesystem::path& base_dir, const std::string& name);
FreeSetPtr resolve_free_set(const FreeSetSpec& spec);

struct Assertion {
  std::string name;
  double value = 0;
  double bound = 0;
  bool ok = true;

  /// Amount by which value exceeds bound, 0 when it does not.
  double violation() const;
};

/// A pass/fail check of `value <= bound + tol`.
Assertion assert_le(std::string name, double value, double bound, double tol = 0);
/// A boolean check, recorded as value 0 (holds) or 1 (fails) against bound 0.
Assertion assert_true(std::string name, bool holds);

struct RunRecord {
  std::string id;
  std::string title;
  nlohmann::json data = nlohmann::json::object();
  std::vector<Assertion> assertions;
  std::vector<std::string> notes;
  double seconds = 0;  // reported only in the timings file

  bool ok() const;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  nlohmann::json config;
  std::vector<RunRecord> runs;
  std::vector<Table> tables;

  int passed() const;
  int failed() const;
  double max_violation() const;
  bool ok() const { return failed() == 0; }
};

Report run_command(const ExperimentConfig& config);

/// JSON lines: a header with schema version and config echo, one line per
/// run sorted by id, and a summary. Free of timings, so reruns with the same
/// config compare byte for byte.
std::string report_body(const Report& report);
nlohmann::json report_timings(const Report& report);

/// "schema_version" is the first column; floats use 12 significant digits.
std::string table_csv(const Table& table);
Table parse_table_csv(const std::string& name, const std::string& text);

/// One <name>.csv per table in `dir`.
void emit_tables(const Report& report, const std::filesystem::path& dir);
/// report.jsonl, timings.json and the tables.
void write_report(const Report& report, const std::filesystem::path& dir);

/// Output directory: the explicit value, else the config value, else the
/// environment variable, else "erasure-out".
std::filesystem::path resolve_out_dir(const std::string& flag, const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Acceptance battery

struct SuiteOptions {
  std::uint64_t seed = 1;
  int workers = 1;
  std::size_t cap_dim = kMaxDenseDimension;
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9};
};

inline constexpr int kCriterionCount = 10;
std::string criterion_title(int id);

/// One record per criterion with id "criterion-NN". Criterion 10 runs the
/// other listed criteria twice in-process and compares the report bodies.
RunRecord run_criterion(int id, const SuiteOptions& options);
/// The criterion-10 record for two report bodies.
RunRecord determinism_record(const std::string& first, const std::string& second);
/// Runs the listed criteria on up to `workers` threads; results are ordered by id.
std::vector<RunRecord> run_suite(const SuiteOptions& options);

}  // namespace erasure
