#include "erasure/layout.hpp"

#include "erasure/errors.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace erasure {

RegisterLayout::RegisterLayout(std::initializer_list<Factor> factors) : factors_(factors) { validate(); }

RegisterLayout::RegisterLayout(std::vector<Factor> factors) : factors_(std::move(factors)) { validate(); }

RegisterLayout RegisterLayout::single(std::string label, std::size_t dim) {
  return RegisterLayout({Factor{std::move(label), dim}});
}

RegisterLayout RegisterLayout::uniform(const std::string& prefix, std::size_t count, std::size_t dim) {
  std::vector<Factor> f;
  for (std::size_t i = 1; i <= count; ++i) f.push_back({prefix + std::to_string(i), dim});
  return RegisterLayout(std::move(f));
}

void RegisterLayout::validate() const {
  std::set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.label.empty()) throw LayoutError("register label must be non-empty");
    if (f.dim < 1) throw LayoutError("register '" + f.label + "' has dimension 0");
    if (!seen.insert(f.label).second) throw LayoutError("duplicate register label '" + f.label + "'");
  }
}

std::size_t RegisterLayout::total_dim() const noexcept {
  std::size_t d = 1;
  for (const auto& f : factors_) d *= f.dim;
  return d;
}

std::vector<std::size_t> RegisterLayout::dims() const {
  std::vector<std::size_t> d;
  d.reserve(factors_.size());
  for (const auto& f : factors_) d.push_back(f.dim);
  return d;
}

std::vector<std::string> RegisterLayout::labels() const {
  std::vector<std::string> l;
  l.reserve(factors_.size());
  for (const auto& f : factors_) l.push_back(f.label);
  return l;
}

bool RegisterLayout::contains(const std::string& label) const noexcept {
  return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
}

std::size_t RegisterLayout::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].label == label) return i;
  throw LayoutError("unknown register label '" + label + "' in layout " + describe());
}

RegisterLayout RegisterLayout::concat(const RegisterLayout& other) const {
  std::vector<Factor> f = factors_;
  for (const auto& g : other.factors_) {
    if (contains(g.label)) throw LayoutError("label collision on '" + g.label + "'");
    f.push_back(g);
  }
  return RegisterLayout(std::move(f));
}

std::vector<bool> RegisterLayout::mask(const std::set<std::string>& labels) const {
  std::vector<bool> m(factors_.size(), false);
  for (const auto& l : labels) m[index_of(l)] = true;
  return m;
}

RegisterLayout RegisterLayout::without(const std::set<std::string>& labels) const {
  const auto m = mask(labels);
  std::vector<Factor> f;
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (!m[i]) f.push_back(factors_[i]);
  return RegisterLayout(std::move(f));
}

RegisterLayout RegisterLayout::restrict_to(const std::set<std::string>& labels) const {
  const auto m = mask(labels);
  std::vector<Factor> f;
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (m[i]) f.push_back(factors_[i]);
  return RegisterLayout(std::move(f));
}

RegisterLayout RegisterLayout::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != factors_.size()) throw LayoutError("permutation has wrong length");
  std::vector<std::size_t> check = order;
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < check.size(); ++i)
    if (check[i] != i) throw LayoutError("not a permutation of the register order");
  std::vector<Factor> f;
  for (auto k : order) f.push_back(factors_[k]);
  return RegisterLayout(std::move(f));
}

RegisterLayout RegisterLayout::relabeled(const std::string& suffix) const {
  std::vector<Factor> f = factors_;
  for (auto& x : f) x.label += suffix;
  return RegisterLayout(std::move(f));
}

std::string RegisterLayout::describe() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) os << ' ';
    os << factors_[i].label << ':' << factors_[i].dim;
  }
  os << ']';
  return os.str();
}

bool is_randomness_label(const std::string& label) { return !label.empty() && label.front() == 'J'; }

std::string randomness_group(const std::string& label) {
  const auto dot = label.find('.');
  if (dot == std::string::npos) return label;
  const auto hash = label.find('#', dot);
  return label.substr(0, dot) + (hash == std::string::npos ? std::string() : label.substr(hash));
}

}  // namespace erasure
