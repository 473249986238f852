// Text format for complex matrices over a register layout:
//
//   erasure-matrix 1
//   layout A:2 B:2
//   re,im re,im ...        (one line per row, row-major)
//
// Numbers use the shortest round-trip representation, so write/read is exact.
#pragma once

#include "erasure/density_matrix.hpp"

#include <string>

namespace erasure {

struct LabeledMatrix {
  RegisterLayout layout;
  CMatrix matrix;
};

std::string format_double(double x);
/// Strict parse of a full token; throws DomainError on trailing junk.
double parse_double(const std::string& token);

std::string write_matrix(const RegisterLayout& layout, const CMatrix& matrix);
std::string write_matrix(const DensityMatrix& state);
LabeledMatrix read_matrix(const std::string& text);

/// "A:2 B:2" -> layout
RegisterLayout parse_layout(const std::string& text);

DensityMatrix load_state(const std::string& path, double tolerance = kDefaultTolerance);
void save_state(const std::string& path, const DensityMatrix& state);

}  // namespace erasure
