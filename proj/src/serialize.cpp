#include "erasure/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace erasure {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  double x = 0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last) throw DomainError("not a number: '" + token + "'");
  return x;
}

RegisterLayout parse_layout(const std::string& text) {
  std::istringstream is(text);
  std::vector<Factor> factors;
  std::string tok;
  while (is >> tok) {
    const auto colon = tok.rfind(':');
    if (colon == std::string::npos || colon == 0) throw LayoutError("bad layout factor '" + tok + "'");
    const double d = parse_double(tok.substr(colon + 1));
    if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d))) {
      throw LayoutError("bad dimension in layout factor '" + tok + "'");
    }
    factors.push_back({tok.substr(0, colon), static_cast<std::size_t>(d)});
  }
  if (factors.empty()) throw LayoutError("empty layout");
  return RegisterLayout(std::move(factors));
}

std::string write_matrix(const RegisterLayout& layout, const CMatrix& matrix) {
  std::ostringstream os;
  os << "erasure-matrix 1\nlayout";
  for (const auto& f : layout.factors()) os << ' ' << f.label << ':' << f.dim;
  os << '\n';
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(matrix(i, j).real()) << ',' << format_double(matrix(i, j).imag());
    }
    os << '\n';
  }
  return os.str();
}

std::string write_matrix(const DensityMatrix& state) { return write_matrix(state.layout(), state.matrix()); }

LabeledMatrix read_matrix(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  auto next_line = [&]() {
    while (std::getline(is, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line() || line.rfind("erasure-matrix 1", 0) != 0) throw DomainError("missing 'erasure-matrix 1' header");
  if (!next_line() || line.rfind("layout", 0) != 0) throw LayoutError("missing layout line");
  LabeledMatrix out{parse_layout(line.substr(6)), {}};
  const auto d = static_cast<Eigen::Index>(out.layout.total_dim());
  out.matrix.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!next_line()) {
      throw LayoutError("matrix has " + std::to_string(i) + " rows but layout has dimension " + std::to_string(d));
    }
    std::istringstream row(line);
    std::string entry;
    Eigen::Index j = 0;
    while (row >> entry) {
      if (j >= d) {
        throw LayoutError("row " + std::to_string(i) + " has more than " + std::to_string(d) +
                          " entries; layout has dimension " + std::to_string(d));
      }
      const auto comma = entry.find(',');
      if (comma == std::string::npos) {
        out.matrix(i, j++) = Complex(parse_double(entry), 0.0);
      } else {
        out.matrix(i, j++) = Complex(parse_double(entry.substr(0, comma)), parse_double(entry.substr(comma + 1)));
      }
    }
    if (j != d) {
      throw LayoutError("row " + std::to_string(i) + " has " + std::to_string(j) +
                        " entries but layout has dimension " + std::to_string(d));
    }
  }
  if (next_line()) throw LayoutError("matrix has more rows than layout dimension " + std::to_string(d));
  return out;
}

DensityMatrix load_state(const std::string& path, double tolerance) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto m = read_matrix(buf.str());
  return DensityMatrix(std::move(m.layout), std::move(m.matrix), tolerance);
}

void save_state(const std::string& path, const DensityMatrix& state) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << write_matrix(state);
}

}  // namespace erasure
