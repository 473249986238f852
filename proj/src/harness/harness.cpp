#include "erasure/harness.hpp"
#include "erasure/transcript_json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace erasure {

namespace {

constexpr double kCheckTolerance = 1e-6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string eps_tag(double eps) { return nlohmann::json(eps).dump(); }

/// Failures a module already reported become failed assertions.
void add_failures(RunRecord& r, const std::vector<std::string>& failures) {
  for (const auto& f : failures) r.assertions.push_back(assert_true(f, false));
}

Report entropy_report(const ExperimentConfig& c) {
  const auto rho = resolve_state(*c.rho, c.base_dir, "rho");
  const auto sigma = resolve_state(*c.sigma, c.base_dir, "sigma");
  Report report;
  Table table{"entropy", {"eps", "D", "V", "Dmax", "smooth_dmax", "smooth_dmax_lower"}, {}};
  const double d = relative_entropy(rho, sigma).value;
  const double dm = dmax(rho, sigma).value;
  const double v = std::isfinite(d) ? relative_entropy_variance(rho, sigma).value : kInfinity;
  for (const double eps : c.eps) {
    RunRecord r;
    r.id = "entropy-eps-" + eps_tag(eps);
    r.title = "entropies at eps = " + eps_tag(eps);
    const auto start = Clock::now();
    const auto s = smooth_dmax(rho, sigma, eps);
    r.data = {{"eps", eps},
              {"D", json_number(d)},
              {"V", json_number(v)},
              {"Dmax", json_number(dm)},
              {"smooth_dmax", json_number(s.value)},
              {"smooth_dmax_lower", json_number(s.lower)},
              {"method", to_string(s.method)}};
    if (eps == 0) r.assertions.push_back(assert_le("D <= Dmax", d, dm, kCheckTolerance));
    r.assertions.push_back(assert_le("smooth_dmax <= Dmax", s.value, dm, kCheckTolerance));
    r.assertions.push_back(assert_le("lower <= smooth_dmax", s.lower, s.value, kCheckTolerance));
    r.seconds = seconds_since(start);
    report.runs.push_back(std::move(r));
    table.rows.push_back({eps, d, v, dm, s.value, s.lower});
  }
  report.tables.push_back(std::move(table));
  return report;
}

Report convex_split_report(const ExperimentConfig& c) {
  const auto rho = resolve_state(*c.rho, c.base_dir, "rho");
  const auto sigma = resolve_state(*c.sigma, c.base_dir, "sigma");
  Report report;
  Table table{"convex_split", {"n", "eps", "lhs", "rhs", "k"}, {}};
  const auto checks = convex_split_bound_check(rho, sigma, c.n, c.eps);
  for (std::size_t e = 0; e < c.eps.size(); ++e) {
    const double eps = c.eps[e];
    for (std::size_t i = 0; i < c.n.size(); ++i) {
      const int n = c.n[i];
      RunRecord r;
      r.id = "convex-split-eps-" + eps_tag(eps) + "-n-" + std::to_string(1000 + n).substr(1);
      r.title = "convex split at n = " + std::to_string(n) + ", eps = " + eps_tag(eps);
      const auto start = Clock::now();
      const auto& check = checks[e * c.n.size() + i];
      r.data = to_json(check);
      r.data["n"] = n;
      r.data["eps"] = eps;
      r.assertions.push_back(assert_le("P(tau, sigma^n) <= eps + sqrt(2^k / n)", check.lhs, check.rhs,
                                       kProtocolTolerance));
      r.seconds = seconds_since(start);
      report.runs.push_back(std::move(r));
      table.rows.push_back({double(n), eps, check.lhs, check.rhs, check.k});
    }
  }
  report.tables.push_back(std::move(table));
  return report;
}

Table transcript_table() {
  return {"protocol",
          {"eps", "delta", "n_copies", "n_simulated", "k", "k_lower", "log_J", "achieved_distance",
           "catalyst_return_distance", "distance_bound", "converse_lower_bound", "converse_factor"},
          {}};
}

std::vector<double> transcript_row(const ProtocolTranscript& t) {
  return {t.eps,   t.delta, double(t.n_copies), double(t.n_simulated), t.k, t.k_lower, t.log_J, t.achieved_distance,
          t.catalyst_return_distance, t.distance_bound, t.converse_lower_bound, t.converse_factor};
}

void protocol_assertions(RunRecord& r, const ProtocolTranscript& t) {
  add_failures(r, t.failures);
  if (!t.simulated) return;
  r.assertions.push_back(assert_le("achieved distance <= distance bound", t.achieved_distance, t.distance_bound,
                                   kProtocolTolerance));
  if (t.n_simulated == t.n_copies) {
    r.assertions.push_back(assert_le("achieved distance <= eps + delta", t.achieved_distance, t.eps + t.delta,
                                     kProtocolTolerance));
    r.assertions.push_back(assert_le("catalyst return distance <= eps + delta", t.catalyst_return_distance,
                                     t.eps + t.delta, kProtocolTolerance));
  }
}

ProtocolOptions protocol_options(const ExperimentConfig& c) {
  ProtocolOptions o;
  o.cap_dim = c.cap_dim;
  o.seed = c.seed;
  return o;
}

Report protocol_report(const ExperimentConfig& c, bool multiparty) {
  const auto rho = resolve_state(*c.rho, c.base_dir, "rho");
  const auto family = resolve_free_set(*c.free_set);
  Report report;
  auto table = transcript_table();
  for (const double eps : c.eps) {
    RunRecord r;
    r.id = std::string(multiparty ? "multiparty" : "protocol") + "-eps-" + eps_tag(eps);
    r.title = std::string(multiparty ? "multiparty" : "catalytic") + " erasure at eps = " + eps_tag(eps);
    const auto start = Clock::now();
    const auto t = multiparty ? run_multiparty_transformation(rho, *family, eps, c.delta, c.t, protocol_options(c))
                              : run_catalytic_transformation(rho, *family, eps, c.delta, protocol_options(c));
    r.data = to_json(t);
    protocol_assertions(r, t);
    r.notes = t.notes;
    r.seconds = seconds_since(start);
    report.runs.push_back(std::move(r));
    table.rows.push_back(transcript_row(t));
  }
  report.tables.push_back(std::move(table));
  return report;
}

Report converse_report(const ExperimentConfig& c) {
  const auto rho = resolve_state(*c.rho, c.base_dir, "rho");
  const auto family = resolve_free_set(*c.free_set);
  Report report;
  Table table{"converse", {"eps", "delta", "lower_bound", "upper_bound", "factor", "log_J"}, {}};
  for (const double eps : c.eps) {
    RunRecord r;
    r.id = "converse-eps-" + eps_tag(eps);
    r.title = "converse certificate at eps = " + eps_tag(eps);
    const auto start = Clock::now();
    const auto t = run_catalytic_transformation(rho, *family, eps, c.delta, protocol_options(c));
    const auto cert = converse_certificate(t, *family, eps, c.assume_structure);
    r.data = {{"lower_bound", json_number(cert.lower_bound)},
              {"upper_bound", json_number(cert.upper_bound)},
              {"factor", cert.factor},
              {"log_J", json_number(t.log_J)},
              {"structure_verified", t.structure_verified},
              {"assume_structure", c.assume_structure}};
    r.assertions.push_back(
        assert_le("factor * lower bound <= log J", cert.factor * cert.lower_bound, t.log_J, kProtocolTolerance));
    r.assertions.push_back(assert_le("lower bound <= upper bound", cert.lower_bound, cert.upper_bound,
                                     kProtocolTolerance));
    r.seconds = seconds_since(start);
    report.runs.push_back(std::move(r));
    table.rows.push_back({eps, c.delta, cert.lower_bound, cert.upper_bound, cert.factor, t.log_J});
  }
  report.tables.push_back(std::move(table));
  return report;
}

Report block_report(const ExperimentConfig& c) {
  const auto rho = resolve_state(*c.rho, c.base_dir, "rho");
  const auto family = resolve_free_set(*c.free_set);
  Report report;
  Table table{"block", {"block", "single_block_distance"}, {}};
  for (const double eps : c.eps) {
    RunRecord r;
    r.id = "block-eps-" + eps_tag(eps);
    r.title = "block protocol at eps = " + eps_tag(eps);
    const auto start = Clock::now();
    const auto t = run_block_protocol(rho, *family, c.m, c.gamma, eps, protocol_options(c));
    r.data = to_json(t);
    add_failures(r, t.failures);
    if (t.simulated) {
      r.assertions.push_back(assert_le("final distance <= blocks * max single-block distance", t.achieved_distance,
                                       t.accumulation_bound, 1e-8));
    }
    r.notes = t.notes;
    r.seconds = seconds_since(start);
    report.runs.push_back(std::move(r));
    for (std::size_t b = 0; b < t.block_distances.size(); ++b) {
      table.rows.push_back({double(b + 1), t.block_distances[b]});
    }
  }
  report.tables.push_back(std::move(table));
  return report;
}

Report rate_report(const ExperimentConfig& c) {
  const auto rho = resolve_state(*c.rho, c.base_dir, "rho");
  const auto family = resolve_free_set(*c.free_set);
  Report report;
  Table table{"rate", {"eps", "n", "converse", "upper", "achievable", "E_over_n"}, {}};
  RunRecord r;
  r.id = "rate";
  r.title = "asymptotic rate report";
  const auto start = Clock::now();
  RateOptions options;
  options.delta = c.delta;
  const auto rate = asymptotic_rate_report(rho, *family, c.eps, c.n_max, options);
  r.data = to_json(rate);
  add_failures(r, rate.failures);
  for (const auto& row : rate.rows) {
    r.assertions.push_back(assert_le("converse <= upper at n = " + std::to_string(row.n) + ", eps = " +
                                         eps_tag(row.eps),
                                     row.converse, row.upper, kProtocolTolerance));
    table.rows.push_back({row.eps, double(row.n), row.converse, row.upper, row.achievable, row.E_over_n});
  }
  if (!rate.notice.empty()) r.notes.push_back(rate.notice);
  r.seconds = seconds_since(start);
  report.runs.push_back(std::move(r));
  report.tables.push_back(std::move(table));
  return report;
}

Report suite_report(const ExperimentConfig& c) {
  SuiteOptions options;
  options.seed = c.seed;
  options.workers = c.workers;
  options.cap_dim = c.cap_dim;
  options.criteria = c.criteria;
  Report report;
  report.runs = run_suite(options);
  Table table{"criteria", {"criterion", "ok", "assertions", "max_violation"}, {}};
  for (const auto& r : report.runs) {
    double worst = 0;
    for (const auto& a : r.assertions) worst = std::max(worst, a.violation());
    table.rows.push_back({double(r.data.value("criterion", 0)), r.ok() ? 1.0 : 0.0, double(r.assertions.size()),
                          worst});
  }
  report.tables.push_back(std::move(table));
  return report;
}

}  // namespace

double Assertion::violation() const {
  if (ok) return 0;
  return std::isfinite(value - bound) ? std::max(0.0, value - bound) : kInfinity;
}

Assertion assert_le(std::string name, double value, double bound, double tol) {
  return {std::move(name), value, bound, value <= bound + tol};
}

Assertion assert_true(std::string name, bool holds) { return {std::move(name), holds ? 0.0 : 1.0, 0.0, holds}; }

bool RunRecord::ok() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.ok; });
}

int Report::passed() const {
  int count = 0;
  for (const auto& r : runs) {
    for (const auto& a : r.assertions) count += a.ok ? 1 : 0;
  }
  return count;
}

int Report::failed() const {
  int count = 0;
  for (const auto& r : runs) {
    for (const auto& a : r.assertions) count += a.ok ? 0 : 1;
  }
  return count;
}

double Report::max_violation() const {
  double worst = 0;
  for (const auto& r : runs) {
    for (const auto& a : r.assertions) worst = std::max(worst, a.violation());
  }
  return worst;
}

Report run_command(const ExperimentConfig& config) {
  Report report;
  switch (config.command) {
    case Command::Entropy: report = entropy_report(config); break;
    case Command::ConvexSplit: report = convex_split_report(config); break;
    case Command::Protocol: report = protocol_report(config, false); break;
    case Command::Multiparty: report = protocol_report(config, true); break;
    case Command::Block: report = block_report(config); break;
    case Command::Rate: report = rate_report(config); break;
    case Command::Converse: report = converse_report(config); break;
    case Command::Suite: report = suite_report(config); break;
  }
  std::stable_sort(report.runs.begin(), report.runs.end(),
                   [](const RunRecord& a, const RunRecord& b) { return a.id < b.id; });
  report.config = config_echo(config);
  return report;
}

}  // namespace erasure
