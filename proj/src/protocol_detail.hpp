#pragma once

#include "erasure/protocols.hpp"

namespace erasure::detail {

/// Fills the structure fields of `t` for swap unitaries exchanging a
/// register of layout `unit` with one of n catalyst copies.
void check_swap_structure(ProtocolTranscript& t, const FreeSet& family, const RegisterLayout& unit, int n,
                          const ProtocolOptions& options);

std::vector<std::string> copy_labels(const RegisterLayout& layout, int j);

}  // namespace erasure::detail
