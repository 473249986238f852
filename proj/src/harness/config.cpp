#include "erasure/harness.hpp"
#include "erasure/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace erasure {

namespace {

const std::vector<std::pair<Command, std::string>> kCommands = {
    {Command::Entropy, "entropy"},   {Command::ConvexSplit, "convex-split"}, {Command::Protocol, "protocol"},
    {Command::Multiparty, "multiparty"}, {Command::Block, "block"},       {Command::Rate, "rate"},
    {Command::Converse, "converse"}, {Command::Suite, "suite"},
};

const std::set<std::string> kStateFields = {"file", "layout", "matrix", "ket", "preset"};

const std::set<std::string> kScalarKeys = {
    "command", "name",  "free_set", "free_set.inner", "free_set.beta", "free_set.energies", "free_set.group",
    "eps",     "delta", "gamma",    "n",              "m",             "t",                 "n_max",
    "seed",    "cap_dim", "workers", "assume_structure", "criteria",   "out",
};

bool known_key(const std::string& key) {
  if (kScalarKeys.count(key)) return true;
  for (const std::string prefix : {"rho.", "sigma."}) {
    if (key.rfind(prefix, 0) == 0 && kStateFields.count(key.substr(prefix.size()))) return true;
  }
  return false;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

/// Parses values and records errors against their key.
class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

  std::vector<std::string>& errors() { return errors_; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& raw(const std::string& key) const { return entries_.at(key); }

  template <class T>
  void read(const std::string& key, T& out, const std::function<bool(T)>& valid, const std::string& range) {
    if (!has(key)) return;
    try {
      const T v = convert<T>(raw(key));
      if (!valid(v)) {
        errors_.push_back(key + " = " + raw(key) + " is out of range " + range);
        return;
      }
      out = v;
    } catch (const Error& e) {
      errors_.push_back(key + ": " + e.what());
    }
  }

  template <class T>
  void read_list(const std::string& key, std::vector<T>& out, const std::function<bool(T)>& valid,
                 const std::string& range) {
    if (!has(key)) return;
    std::vector<T> values;
    const auto toks = tokens(raw(key));
    if (toks.empty()) {
      errors_.push_back(key + ": empty list");
      return;
    }
    for (const auto& tok : toks) {
      try {
        const T v = convert<T>(tok);
        if (!valid(v)) {
          errors_.push_back(key + " = " + tok + " is out of range " + range);
          return;
        }
        values.push_back(v);
      } catch (const Error& e) {
        errors_.push_back(key + ": " + e.what());
        return;
      }
    }
    out = std::move(values);
  }

 private:
  template <class T>
  static T convert(const std::string& token) {
    if constexpr (std::is_same_v<T, double>) {
      return parse_double(trim(token));
    } else if constexpr (std::is_same_v<T, bool>) {
      const auto t = trim(token);
      if (t == "true" || t == "1" || t == "yes") return true;
      if (t == "false" || t == "0" || t == "no") return false;
      throw DomainError("not a boolean: '" + t + "'");
    } else {
      const double x = parse_double(trim(token));
      if (x != static_cast<double>(static_cast<long long>(x))) throw DomainError("not an integer: '" + trim(token) + "'");
      if (x < 0 && std::is_unsigned_v<T>) throw DomainError("negative value: '" + trim(token) + "'");
      return static_cast<T>(x);
    }
  }

  std::map<std::string, std::string> entries_;
  std::vector<std::string> errors_;
};

std::optional<StateSource> read_state(const Reader& r, const std::string& name, std::vector<std::string>& errors) {
  StateSource s;
  bool any = false;
  auto field = [&](const std::string& f, std::string& out) {
    if (r.has(name + "." + f)) {
      out = trim(r.raw(name + "." + f));
      any = true;
    }
  };
  field("file", s.file);
  field("layout", s.layout);
  field("matrix", s.matrix);
  field("ket", s.ket);
  field("preset", s.preset);
  if (!any) return std::nullopt;
  const int sources = int(!s.file.empty()) + int(!s.matrix.empty()) + int(!s.ket.empty()) + int(!s.preset.empty());
  if (sources != 1) {
    errors.push_back(name + ": give exactly one of " + name + ".file, " + name + ".matrix, " + name + ".ket, " +
                     name + ".preset");
    return std::nullopt;
  }
  if ((!s.matrix.empty() || !s.ket.empty()) && s.layout.empty()) {
    errors.push_back(name + ": inline " + (s.matrix.empty() ? "ket" : "matrix") + " needs " + name + ".layout");
    return std::nullopt;
  }
  return s;
}

CMatrix inline_matrix(const std::string& text) {
  std::vector<std::vector<Complex>> rows;
  std::istringstream is(text);
  std::string row;
  while (std::getline(is, row, ';')) {
    std::vector<Complex> entries;
    for (const auto& tok : tokens(row)) {
      const auto comma = tok.find(',');
      if (comma == std::string::npos) {
        entries.emplace_back(parse_double(tok), 0.0);
      } else {
        entries.emplace_back(parse_double(tok.substr(0, comma)), parse_double(tok.substr(comma + 1)));
      }
    }
    if (!entries.empty()) rows.push_back(std::move(entries));
  }
  const auto d = static_cast<Eigen::Index>(rows.size());
  CMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (static_cast<Eigen::Index>(rows[std::size_t(i)].size()) != d) {
      throw LayoutError("matrix row " + std::to_string(i + 1) + " has " + std::to_string(rows[std::size_t(i)].size()) +
                        " entries, expected " + std::to_string(d));
    }
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rows[std::size_t(i)][std::size_t(j)];
  }
  return m;
}

CMatrix pauli(const std::string& name) {
  if (name == "I") return CMatrix::Identity(2, 2);
  if (name == "X") return CMatrix{{0, 1}, {1, 0}};
  if (name == "Y") return CMatrix{{0, Complex(0, -1)}, {Complex(0, 1), 0}};
  if (name == "Z") return CMatrix{{1, 0}, {0, -1}};
  throw DomainError("unknown group element '" + name + "' (use I, X, Y, Z)");
}

void check_dims(const std::string& name, const RegisterLayout& declared, const RegisterLayout& actual,
                const std::string& what) {
  if (declared.total_dim() != actual.total_dim()) {
    throw LayoutError(name + ": layout '" + declared.describe() + "' has dimension " +
                      std::to_string(declared.total_dim()) + " but " + what + " has dimension " +
                      std::to_string(actual.total_dim()) + " (layout '" + actual.describe() + "')");
  }
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "unknown";
}

std::optional<Command> parse_command(const std::string& name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : Error([&] {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

DensityMatrix resolve_state(const StateSource& s, const std::filesystem::path& base_dir, const std::string& name) {
  std::optional<RegisterLayout> declared;
  if (!s.layout.empty()) declared = parse_layout(s.layout);
  if (!s.file.empty()) {
    std::filesystem::path path(s.file);
    if (path.is_relative()) path = base_dir / path;
    const auto state = load_state(path.string());
    if (!declared) return state;
    check_dims(name, *declared, state.layout(), "file '" + s.file + "'");
    return DensityMatrix(*declared, state.matrix());
  }
  if (!s.matrix.empty()) {
    const CMatrix m = inline_matrix(s.matrix);
    const RegisterLayout shape({{"matrix", static_cast<std::size_t>(m.rows())}});
    check_dims(name, *declared, shape, "the inline matrix");
    return DensityMatrix(*declared, m);
  }
  if (!s.ket.empty()) {
    std::vector<double> amps;
    for (const auto& tok : tokens(s.ket)) amps.push_back(parse_double(tok));
    CVector v(static_cast<Eigen::Index>(amps.size()));
    for (std::size_t i = 0; i < amps.size(); ++i) v(Eigen::Index(i)) = amps[i];
    if (v.norm() == 0) throw StateError(name + ": zero ket");
    const RegisterLayout shape({{"ket", amps.size()}});
    check_dims(name, *declared, shape, "the inline ket");
    return DensityMatrix::pure(*declared, v / v.norm());
  }
  const RegisterLayout qubit({{"M", 2}});
  const double h = 1 / std::sqrt(2.0);
  DensityMatrix state = DensityMatrix::maximally_mixed(qubit);
  if (s.preset == "zero") {
    state = DensityMatrix::basis_state(qubit, 0);
  } else if (s.preset == "one") {
    state = DensityMatrix::basis_state(qubit, 1);
  } else if (s.preset == "plus" || s.preset == "minus") {
    state = DensityMatrix::pure(qubit, CVector{{h, s.preset == "plus" ? h : -h}});
  } else if (s.preset == "bell") {
    state = DensityMatrix::pure(RegisterLayout({{"M.A", 2}, {"M.B", 2}}), CVector{{h, 0, 0, h}});
  } else if (s.preset != "mixed") {
    throw DomainError(name + ": unknown preset '" + s.preset + "' (zero, one, plus, minus, mixed, bell)");
  }
  if (!declared) return state;
  check_dims(name, *declared, state.layout(), "preset '" + s.preset + "'");
  return DensityMatrix(*declared, state.matrix());
}

FreeSetPtr resolve_free_set(const FreeSetSpec& spec) {
  if (spec.name == "gibbs") {
    if (spec.energies.empty()) throw DomainError("gibbs needs free_set.energies");
    RVector e(static_cast<Eigen::Index>(spec.energies.size()));
    for (std::size_t i = 0; i < spec.energies.size(); ++i) e(Eigen::Index(i)) = spec.energies[i];
    return make_gibbs(e.cast<Complex>().asDiagonal(), spec.beta);
  }
  if (spec.name == "asymmetry") {
    if (spec.group.empty()) throw DomainError("asymmetry needs free_set.group");
    std::vector<CMatrix> group;
    for (const auto& g : spec.group) group.push_back(pauli(g));
    return make_asymmetry(group);
  }
  if (spec.name == "shared-randomness") {
    if (spec.inner.empty()) throw DomainError("shared-randomness needs free_set.inner");
    if (spec.inner == "shared-randomness") throw DomainError("shared-randomness cannot nest");
    FreeSetSpec inner = spec;
    inner.name = spec.inner;
    inner.inner.clear();
    return make_shared_randomness(resolve_free_set(inner));
  }
  return make_free_set(spec.name);
}

ExperimentConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides,
                              const std::filesystem::path& base_dir) {
  std::vector<std::string> errors;
  std::map<std::string, std::string> entries;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!known_key(key)) {
      errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      continue;
    }
    if (!entries.emplace(key, value).second) {
      errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  for (const auto& [key, value] : overrides) {
    if (!known_key(key)) {
      errors.push_back("override: unknown key '" + key + "'");
      continue;
    }
    entries[key] = value;
  }

  ExperimentConfig c;
  c.base_dir = base_dir;
  Reader r(entries);
  if (!r.has("command")) {
    errors.push_back("missing required key 'command'");
  } else if (const auto cmd = parse_command(r.raw("command"))) {
    c.command = *cmd;
  } else {
    errors.push_back("command = " + r.raw("command") + " is not one of entropy, convex-split, protocol, multiparty, "
                     "block, rate, converse, suite");
  }
  if (r.has("name")) c.name = r.raw("name");
  if (r.has("out")) c.out = r.raw("out");

  const auto in_unit = [](double x) { return x >= 0 && x < 1; };
  const auto open_unit = [](double x) { return x > 0 && x < 1; };
  r.read_list<double>("eps", c.eps, in_unit, "[0, 1)");
  r.read<double>("delta", c.delta, open_unit, "(0, 1)");
  r.read<double>("gamma", c.gamma, [](double x) { return x > 0 && x < 1; }, "(0, 1)");
  r.read_list<int>("n", c.n, [](int x) { return x >= 1 && x <= 64; }, "[1, 64]");
  r.read<int>("m", c.m, [](int x) { return x >= 1; }, "[1, inf)");
  r.read<int>("t", c.t, [](int x) { return x >= 2 && x <= 8; }, "[2, 8]");
  r.read<int>("n_max", c.n_max, [](int x) { return x >= 1 && x <= 12; }, "[1, 12]");
  r.read<std::uint64_t>("seed", c.seed, [](std::uint64_t) { return true; }, "");
  r.read<std::size_t>("cap_dim", c.cap_dim, [](std::size_t x) { return x >= 1 && x <= (1u << 14); }, "[1, 16384]");
  r.read<int>("workers", c.workers, [](int x) { return x >= 1 && x <= 64; }, "[1, 64]");
  r.read<bool>("assume_structure", c.assume_structure, [](bool) { return true; }, "");
  r.read_list<int>("criteria", c.criteria, [](int x) { return x >= 1 && x <= kCriterionCount; },
                   "[1, " + std::to_string(kCriterionCount) + "]");
  errors.insert(errors.end(), r.errors().begin(), r.errors().end());

  if (r.has("free_set")) {
    FreeSetSpec fs;
    fs.name = r.raw("free_set");
    if (r.has("free_set.inner")) fs.inner = r.raw("free_set.inner");
    if (r.has("free_set.group")) fs.group = tokens(r.raw("free_set.group"));
    Reader fr(entries);
    fr.read<double>("free_set.beta", fs.beta, [](double x) { return x >= 0; }, "[0, inf)");
    fr.read_list<double>("free_set.energies", fs.energies, [](double) { return true; }, "");
    errors.insert(errors.end(), fr.errors().begin(), fr.errors().end());
    try {
      resolve_free_set(fs);
      c.free_set = fs;
    } catch (const Error& e) {
      errors.push_back(std::string("free_set: ") + e.what());
    }
  } else {
    for (const std::string k : {"free_set.inner", "free_set.beta", "free_set.energies", "free_set.group"}) {
      if (r.has(k)) errors.push_back(k + " given without free_set");
    }
  }

  for (const std::string name : {"rho", "sigma"}) {
    auto source = read_state(r, name, errors);
    if (!source) continue;
    try {
      resolve_state(*source, base_dir, name);
      (name == "rho" ? c.rho : c.sigma) = *source;
    } catch (const Error& e) {
      errors.push_back(e.what());
    }
  }

  const bool needs_pair = c.command == Command::Entropy || c.command == Command::ConvexSplit;
  const bool needs_family = !needs_pair && c.command != Command::Suite;
  if (r.has("command") && parse_command(r.raw("command"))) {
    auto require = [&](bool present, const std::string& what) {
      if (!present) errors.push_back("command " + to_string(c.command) + " requires " + what);
    };
    if (needs_pair || needs_family) require(c.rho || r.has("rho.file") || r.has("rho.preset") || r.has("rho.matrix") ||
                                                r.has("rho.ket"),
                                            "rho");
    if (needs_pair) require(c.sigma || r.has("sigma.file") || r.has("sigma.preset") || r.has("sigma.matrix") ||
                                r.has("sigma.ket"),
                            "sigma");
    if (needs_family) require(r.has("free_set"), "free_set");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path.string() + "'"});
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), overrides, path.parent_path());
}

nlohmann::json config_echo(const ExperimentConfig& c) {
  nlohmann::json j;
  j["command"] = to_string(c.command);
  j["name"] = c.name;
  if (c.free_set) {
    j["free_set"] = {{"name", c.free_set->name},
                     {"inner", c.free_set->inner},
                     {"beta", c.free_set->beta},
                     {"energies", c.free_set->energies},
                     {"group", c.free_set->group}};
  }
  auto state = [](const StateSource& s) {
    return nlohmann::json{{"file", s.file}, {"layout", s.layout}, {"matrix", s.matrix}, {"ket", s.ket},
                          {"preset", s.preset}};
  };
  if (c.rho) j["rho"] = state(*c.rho);
  if (c.sigma) j["sigma"] = state(*c.sigma);
  j["eps"] = c.eps;
  j["delta"] = c.delta;
  j["gamma"] = c.gamma;
  j["n"] = c.n;
  j["m"] = c.m;
  j["t"] = c.t;
  j["n_max"] = c.n_max;
  j["seed"] = c.seed;
  j["cap_dim"] = c.cap_dim;
  j["assume_structure"] = c.assume_structure;
  j["criteria"] = c.criteria;
  return j;
}

std::filesystem::path resolve_out_dir(const std::string& flag, const ExperimentConfig& config) {
  if (!flag.empty()) return flag;
  if (!config.out.empty()) return config.out;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "erasure-out";
}

}  // namespace erasure
