#include "erasure/harness.hpp"
#include "erasure/serialize.hpp"
#include "erasure/transcript_json.hpp"

#include <Eigen/Core>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace erasure {

namespace {

nlohmann::json run_json(const RunRecord& r) {
  nlohmann::json assertions = nlohmann::json::array();
  for (const auto& a : r.assertions) {
    assertions.push_back({{"name", a.name},
                          {"value", json_number(a.value)},
                          {"bound", json_number(a.bound)},
                          {"ok", a.ok},
                          {"violation", json_number(a.violation())}});
  }
  return {{"record", "run"}, {"id", r.id},           {"title", r.title}, {"ok", r.ok()},
          {"data", r.data},  {"assertions", assertions}, {"notes", r.notes}};
}

std::string format12(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string report_body(const Report& report) {
  std::string body;
  const nlohmann::json header = {{"record", "header"},
                                 {"schema_version", kSchemaVersion},
                                 {"tool", "erasure"},
                                 {"tool_version", kToolVersion},
                                 {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                       std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                       std::to_string(EIGEN_MINOR_VERSION)},
                                 {"config", report.config}};
  body += header.dump() + "\n";
  for (const auto& r : report.runs) body += run_json(r).dump() + "\n";
  int runs_passed = 0;
  for (const auto& r : report.runs) runs_passed += r.ok() ? 1 : 0;
  const nlohmann::json summary = {{"record", "summary"},
                                  {"schema_version", kSchemaVersion},
                                  {"runs", report.runs.size()},
                                  {"runs_passed", runs_passed},
                                  {"runs_failed", int(report.runs.size()) - runs_passed},
                                  {"assertions_passed", report.passed()},
                                  {"assertions_failed", report.failed()},
                                  {"max_violation", json_number(report.max_violation())},
                                  {"ok", report.ok()}};
  body += summary.dump() + "\n";
  return body;
}

nlohmann::json report_timings(const Report& report) {
  nlohmann::json runs = nlohmann::json::object();
  double total = 0;
  for (const auto& r : report.runs) {
    runs[r.id] = r.seconds;
    total += r.seconds;
  }
  return {{"schema_version", kSchemaVersion}, {"runs", runs}, {"total_seconds", total}};
}

std::string table_csv(const Table& table) {
  std::string out = "schema_version";
  for (const auto& c : table.columns) out += "," + c;
  out += "\n";
  for (const auto& row : table.rows) {
    out += std::to_string(kSchemaVersion);
    for (const double x : row) out += "," + format12(x);
    out += "\n";
  }
  return out;
}

Table parse_table_csv(const std::string& name, const std::string& text) {
  Table table{name, {}, {}};
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw DomainError("empty table '" + name + "'");
  auto header = split(line, ',');
  if (header.empty() || header.front() != "schema_version") throw DomainError("table '" + name + "' lacks schema_version");
  table.columns.assign(header.begin() + 1, header.end());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw DomainError("table '" + name + "': ragged row");
    if (cells.front() != std::to_string(kSchemaVersion)) throw DomainError("table '" + name + "': schema mismatch");
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const auto& c = cells[i];
      row.push_back(c == "inf" ? kInfinity : c == "-inf" ? -kInfinity : c == "nan" ? std::nan("") : parse_double(c));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void emit_tables(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());
  for (const auto& t : report.tables) write_file(dir / (t.name + ".csv"), table_csv(t));
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  emit_tables(report, dir);
  write_file(dir / "report.jsonl", report_body(report));
  write_file(dir / "timings.json", report_timings(report).dump(2) + "\n");
}

}  // namespace erasure
