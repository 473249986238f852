#include "protocol_detail.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace erasure {

namespace {

constexpr std::size_t kBlockDenseDim = 64;

bool is_diagonal(const CMatrix& m) {
  CMatrix off = m;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() <= 1e-12;
}

std::vector<std::string> labels_of(const DensityMatrix& s) { return s.layout().labels(); }

DensityMatrix with_suffix(const DensityMatrix& s, const std::string& suffix) {
  return s.relabeled(s.layout().relabeled(suffix));
}

/// First `count` labels of every pool copy, matched factor by factor with a block.
std::vector<std::vector<std::string>> pool_targets(const std::vector<std::vector<std::string>>& pool,
                                                   std::size_t count) {
  std::vector<std::vector<std::string>> out;
  for (const auto& copy : pool) out.emplace_back(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

}  // namespace

BlockProtocolPlan plan_block_protocol(const DensityMatrix& rho, const DensityMatrix& sigma, int m, double gamma,
                                      double eps) {
  if (rho.layout() != sigma.layout()) throw LayoutError("block plan: rho and sigma need the same layout");
  if (m < 1) throw DomainError("block plan: m must be >= 1");
  if (eps <= 0 || eps >= 1) throw DomainError("block plan: eps must lie in (0, 1)");
  if (gamma <= 0) throw DomainError("block plan: gamma must be positive");
  if (gamma * gamma > eps * (1 + 1e-12)) throw DomainError("block plan: needs gamma^2 <= eps");
  BlockProtocolPlan plan;
  plan.m = m;
  plan.gamma = gamma;
  plan.eps = eps;
  plan.D = relative_entropy(rho, sigma).value;
  if (!std::isfinite(plan.D)) throw DomainError("block plan: supp(rho) not in supp(sigma)");
  plan.V = relative_entropy_variance(rho, sigma).value;
  const double raw = 2 * std::log2(double(m)) * plan.V / (gamma * gamma);
  if (plan.V <= 1e-12) {
    plan.ell = 1;
    plan.notes.push_back("V = 0: block length clamped to 1");
  } else {
    plan.ell = std::max(1, static_cast<int>(std::ceil(raw - 1e-9)));
    if (raw < 1) plan.notes.push_back("block length formula below 1; clamped to 1");
  }
  plan.blocks = (m + plan.ell - 1) / plan.ell;
  plan.last_block = m - (plan.blocks - 1) * plan.ell;
  if (plan.last_block != plan.ell) {
    plan.notes.push_back("m/ell not integral: " + std::to_string(plan.blocks) + " blocks, the last of length " +
                         std::to_string(plan.last_block));
  }
  plan.eps_block = eps * plan.ell / (2.0 * m);
  plan.overhead = 2 * std::log2(2.0 * m / (eps * plan.ell));

  double k_smooth = 0;
  const bool classical = is_diagonal(rho.matrix()) && is_diagonal(sigma.matrix());
  const double block_dim = std::pow(double(rho.dim()), plan.ell);
  if (classical && rho.dim() == 2) {
    const auto g = binary_iid_groups(rho.matrix()(1, 1).real(), sigma.matrix()(1, 1).real(), plan.ell);
    k_smooth = smooth_dmax_classical_grouped(g.log2_p, g.log2_q, plan.eps_block).value;
    plan.k_method = "classical-oracle";
  } else if (block_dim <= double(kBlockDenseDim)) {
    k_smooth = smooth_dmax(tensor_power(rho, plan.ell), tensor_power(sigma, plan.ell), plan.eps_block).value;
    plan.k_method = "smooth-dmax";
  } else {
    k_smooth = second_order_dmax(rho, sigma, plan.ell, plan.eps_block).value;
    plan.k_method = "second-order";
  }
  plan.k_per_block = k_smooth + plan.overhead;
  plan.k_second_order = second_order_dmax(rho, sigma, plan.ell, plan.eps_block).value + plan.overhead;
  plan.log2_dim = std::log2(double(rho.dim()));
  plan.catalyst_qubits = double(rho.dim()) * plan.ell * std::exp2(plan.k_per_block);
  const double budget = plan.ell * (plan.D + gamma);
  plan.second_order_consistent = plan.k_second_order <= budget + kProtocolTolerance;
  plan.exact_consistent = plan.k_per_block <= budget + kProtocolTolerance;
  if (!plan.exact_consistent) {
    plan.notes.push_back("k_per_block / ell = " + std::to_string(plan.k_per_block / plan.ell) + " exceeds D + gamma = " +
                         std::to_string(plan.D + gamma) + " at this m");
  }
  return plan;
}

ProtocolTranscript run_block_protocol(const DensityMatrix& rho, const FreeSet& family, int m, double gamma, double eps,
                                      const ProtocolOptions& options) {
  bool input_free = false;
  try {
    input_free = membership(family, rho);
  } catch (const UnsupportedError&) {
  }
  const DensityMatrix sigma = input_free ? rho : closest_free_relent(family, rho).sigma;
  const auto plan = plan_block_protocol(rho, sigma, m, gamma, eps);

  ProtocolTranscript t;
  t.protocol = "block";
  t.free_set = family.name();
  t.input_state = rho;
  t.eps = eps;
  t.delta = plan.eps_block;
  t.seed = options.seed;
  t.catalyst = sigma;
  t.ell = plan.ell;
  t.blocks = plan.blocks;
  t.k = plan.k_per_block;
  t.notes = plan.notes;
  const double x = std::exp2(plan.k_per_block);
  const double n_formula = std::max(1.0, std::ceil(x - 1e-6));
  t.n_copies = n_formula > 2e9 ? 2000000000 : static_cast<int>(n_formula);
  t.log_J = plan.blocks * std::log2(n_formula);
  t.catalyst_qubits = plan.catalyst_qubits;
  t.notes.push_back("converse not computed for block runs");

  // registers: m data copies followed by n pool copies of ell factors each
  const double d = static_cast<double>(rho.dim());
  int cap = 0;
  for (int n = 1; std::pow(d, m + plan.ell * n) * n <= double(options.cap_dim); ++n) cap = n;
  t.n_simulated = static_cast<int>(std::min<double>(n_formula, cap));
  if (t.n_simulated < 1) {
    t.notes.push_back("not simulated: blocks and one catalyst copy exceed the dimension cap");
    return t;
  }
  if (t.n_simulated < n_formula) {
    t.notes.push_back("simulated " + std::to_string(t.n_simulated) + " of " + std::to_string(t.n_copies) +
                      " catalyst copies (cap " + std::to_string(options.cap_dim) + ")");
  }
  const int n = t.n_simulated;

  std::vector<DensityMatrix> data;
  for (int b = 1; b <= plan.blocks; ++b) {
    const int len = b == plan.blocks ? plan.last_block : plan.ell;
    data.push_back(with_suffix(tensor_power(rho, len), ":b" + std::to_string(b)));
  }
  const auto pool_unit = tensor_power(sigma, plan.ell);
  std::vector<DensityMatrix> pool;
  std::vector<std::vector<std::string>> pool_labels;
  for (int j = 1; j <= n; ++j) {
    pool.push_back(with_suffix(pool_unit, ":c" + std::to_string(j)));
    pool_labels.push_back(labels_of(pool.back()));
  }
  auto pool_state = pool.front();
  for (std::size_t j = 1; j < pool.size(); ++j) pool_state = tensor(pool_state, pool[j]);
  std::set<std::string> pool_set;
  for (const auto& c : pool_labels) pool_set.insert(c.begin(), c.end());
  const auto pool_target = pool_state;

  // one block against a fresh pool, per distinct block length
  std::map<int, double> single;
  auto single_distance = [&](const DensityMatrix& block) {
    const int len = static_cast<int>(block.layout().size() / rho.layout().size());
    if (auto it = single.find(len); it != single.end()) return it->second;
    const auto out = controlled_swap_channel(tensor(block, pool_state), labels_of(block),
                                             pool_targets(pool_labels, block.layout().size()));
    const auto target = tensor_power(sigma, len + plan.ell * n).relabeled(out.layout());
    return single[len] = purified_distance(out, target);
  };

  auto state = data.front();
  for (std::size_t b = 1; b < data.size(); ++b) state = tensor(state, data[b]);
  state = tensor(state, pool_state);
  for (std::size_t b = 0; b < data.size(); ++b) {
    t.block_distances.push_back(single_distance(data[b]));
    state = controlled_swap_channel(state, labels_of(data[b]), pool_targets(pool_labels, data[b].layout().size()));
    if (b == 0) {
      // an already erased block through the same map barely moves the pool
      const auto pool_after_first = reduced_state(state, pool_set);
      const auto erased = with_suffix(tensor_power(sigma, plan.ell), ":e");
      const auto again = controlled_swap_channel(tensor(erased, pool_after_first), labels_of(erased),
                                                 pool_targets(pool_labels, erased.layout().size()));
      t.idle_catalyst_shift = purified_distance(pool_after_first, reduced_state(again, pool_set));
    }
  }
  t.simulated = true;
  const auto target = tensor_power(sigma, m + plan.ell * n).relabeled(state.layout());
  t.achieved_distance = purified_distance(state, target);
  t.catalyst_return_distance = purified_distance(reduced_state(state, pool_set), pool_target);
  t.output_trace = state.matrix().trace().real();
  t.output_rank = state.rank();
  const auto data_out = partial_trace(state, pool_set);
  t.register_deviation =
      (data_out.matrix() - tensor_power(sigma, m).relabeled(data_out.layout()).matrix()).cwiseAbs().maxCoeff();

  const double worst = *std::max_element(t.block_distances.begin(), t.block_distances.end());
  t.accumulation_bound = plan.blocks * worst;
  const double k_smooth = plan.k_per_block - plan.overhead;
  t.distance_bound = plan.blocks * (plan.eps_block + std::sqrt(std::exp2(k_smooth) / n));
  if (t.achieved_distance > t.accumulation_bound + 1e-8) t.failures.push_back("distance above accumulated bound");
  if (t.achieved_distance > t.distance_bound + kProtocolTolerance) t.failures.push_back("distance above bound");
  detail::check_swap_structure(t, family, tensor_power(rho, plan.ell).layout(), n, options);
  return t;
}

}  // namespace erasure
