#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace erasure {

struct Factor {
  std::string label;
  std::size_t dim = 1;

  bool operator==(const Factor&) const = default;
};

/// Ordered tensor decomposition of a Hilbert space into labelled factors.
///
/// Labels are unique. A label beginning with 'J' marks a classical randomness
/// register; "J1.A" and "J1.B" are the A- and B-party halves of one shared
/// register "J1" (see `randomness_group`).
class RegisterLayout {
 public:
  RegisterLayout() = default;
  RegisterLayout(std::initializer_list<Factor> factors);
  explicit RegisterLayout(std::vector<Factor> factors);

  static RegisterLayout single(std::string label, std::size_t dim);
  /// Factors "prefix1" ... "prefixN", each of dimension `dim`.
  static RegisterLayout uniform(const std::string& prefix, std::size_t count, std::size_t dim);

  const std::vector<Factor>& factors() const noexcept { return factors_; }
  std::size_t size() const noexcept { return factors_.size(); }
  bool empty() const noexcept { return factors_.empty(); }
  const Factor& operator[](std::size_t i) const { return factors_.at(i); }

  std::size_t total_dim() const noexcept;
  std::vector<std::size_t> dims() const;
  std::vector<std::string> labels() const;

  bool contains(const std::string& label) const noexcept;
  /// Position of `label`; throws LayoutError if absent.
  std::size_t index_of(const std::string& label) const;
  std::size_t dim_of(const std::string& label) const { return factors_[index_of(label)].dim; }

  /// Concatenation; throws LayoutError on a label collision.
  RegisterLayout concat(const RegisterLayout& other) const;
  /// Layout without the listed labels (order preserved); throws on unknown labels.
  RegisterLayout without(const std::set<std::string>& labels) const;
  /// Sub-layout with exactly the listed labels, in this layout's order.
  RegisterLayout restrict_to(const std::set<std::string>& labels) const;
  /// Factor k of the result is factor order[k] of this layout.
  RegisterLayout permuted(const std::vector<std::size_t>& order) const;
  /// Every label gets `suffix` appended.
  RegisterLayout relabeled(const std::string& suffix) const;

  /// Flags (per factor) for membership in `labels`; throws on unknown labels.
  std::vector<bool> mask(const std::set<std::string>& labels) const;

  bool operator==(const RegisterLayout&) const = default;
  std::string describe() const;

 private:
  void validate() const;
  std::vector<Factor> factors_;
};

bool is_randomness_label(const std::string& label);

/// Shared-randomness group key: the label with its ".party" segment removed,
/// keeping any "#copy" suffix ("J1.A#2" -> "J1#2").
std::string randomness_group(const std::string& label);

}  // namespace erasure
