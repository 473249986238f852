#include "protocol_detail.hpp"
#include "erasure/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace erasure {

namespace {

constexpr std::size_t kStructureCheckDim = 256;
constexpr std::int64_t kMaxCopies = std::int64_t{1} << 40;

bool free_member(const FreeSet& family, const DensityMatrix& rho) {
  try {
    return membership(family, rho);
  } catch (const UnsupportedError&) {
    return false;
  }
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Input, its optimal free partner and the copy count from the formula.
struct Setup {
  DensityMatrix sigma;
  double k = 0;
  double k_lower = 0;
  std::int64_t n_formula = 1;
  bool input_free = false;
};

Setup prepare(const DensityMatrix& rho, const FreeSet& family, double eps, double delta,
              const ProtocolOptions& options) {
  if (eps < 0 || eps >= 1) throw DomainError("protocol: eps must lie in [0, 1)");
  if (delta <= 0 || delta >= 1) throw DomainError("protocol: delta must lie in (0, 1)");
  if (free_member(family, rho)) return {rho, 0, 0, 1, true};
  auto cs = closest_free_smooth_dmax(family, rho, eps, options.closest);
  Setup out{cs.sigma, cs.estimate.value, cs.estimate.lower, 1, false};
  if (!std::isfinite(out.k)) throw DomainError("protocol: min D_max^eps is infinite for this free set");
  const double x = std::exp2(out.k) / (delta * delta);
  out.n_formula = x > double(kMaxCopies) ? kMaxCopies : std::max<std::int64_t>(1, std::int64_t(std::ceil(x - 1e-6)));
  return out;
}

/// Simulates the swap protocol on rho (x) sigma^{(x)n} and fills the
/// distance fields of `t`.
void simulate(ProtocolTranscript& t, const DensityMatrix& rho, const DensityMatrix& sigma, int n) {
  const auto& layout = rho.layout();
  const auto joint = tensor(rho, tensor_power(sigma, n));
  std::vector<std::vector<std::string>> copies;
  for (int j = 1; j <= n; ++j) copies.push_back(detail::copy_labels(layout, j));
  const auto out = controlled_swap_channel(joint, layout.labels(), copies);

  const auto labels = layout.labels();
  const std::set<std::string> m_labels(labels.begin(), labels.end());
  const auto out_m = reduced_state(out, m_labels);
  const auto pool = partial_trace(out, m_labels);
  const auto target_pool = tensor_power(sigma, n);
  t.register_deviation = max_abs_diff(out_m.matrix(), sigma.matrix());
  t.catalyst_return_distance = purified_distance(pool, target_pool);
  t.achieved_distance = purified_distance(out, tensor(sigma, target_pool));
  t.output_trace = out.matrix().trace().real();
  t.output_rank = out.rank();
  t.simulated = true;
}

void finish(ProtocolTranscript& t, const FreeSet& family, const Setup& s, double eps, double delta) {
  if (t.simulated) {
    t.distance_bound = eps + std::sqrt(std::exp2(t.k) / t.n_simulated);
    if (t.achieved_distance > t.distance_bound + kProtocolTolerance) t.failures.push_back("distance above bound");
    if (t.catalyst_return_distance > t.distance_bound + kProtocolTolerance) {
      t.failures.push_back("catalyst return distance above bound");
    }
    if (t.n_simulated == t.n_copies && t.achieved_distance > eps + delta + kProtocolTolerance) {
      t.failures.push_back("distance above eps + delta");
    }
    if (t.register_deviation > 1e-10) t.failures.push_back("input register output differs from sigma*");
  }
  // an integral n overshoots 2^k / delta^2 by at most the rounding factor
  const double x = std::exp2(t.k) / (delta * delta);
  const double rounding = s.input_free ? 0.0 : std::log2(double(t.n_copies) / x);
  if (!s.input_free && t.log_J > t.k + 2 * std::log2(1 / delta) + std::max(rounding, 0.0) + kProtocolTolerance) {
    t.failures.push_back("log|J| above achievability bound");
  }
  if (rounding > 1e-9) t.notes.push_back("n rounded up from 2^k/delta^2 = " + std::to_string(x));
  const auto cert = converse_certificate(t, family, eps);
  t.converse_lower_bound = cert.lower_bound;
  t.converse_factor = cert.factor;
  if (!cert.ok) t.failures.push_back("converse lower bound above log|J|");
}

ProtocolTranscript start(const std::string& protocol, const DensityMatrix& rho, const FreeSet& family, double eps,
                         double delta, const ProtocolOptions& options, const Setup& s, int parties = 1) {
  ProtocolTranscript t;
  t.protocol = protocol;
  t.free_set = family.name();
  t.input_state = rho;
  t.eps = eps;
  t.delta = delta;
  t.seed = options.seed;
  t.k = s.k;
  t.k_lower = s.k_lower;
  t.catalyst = s.sigma;
  t.n_copies = static_cast<int>(std::min<std::int64_t>(s.n_formula, std::numeric_limits<int>::max()));
  t.log_J = std::log2(double(s.n_formula));
  t.catalyst_qubits = s.input_free ? 0.0 : std::log2(double(rho.dim())) * std::exp2(s.k) / (delta * delta);
  if (s.input_free) t.notes.push_back("input is free; a single catalyst copy suffices");
  const int cap = simulation_cap(rho.dim(), options.cap_dim, parties);
  t.n_simulated = static_cast<int>(std::min<std::int64_t>(s.n_formula, cap));
  if (t.n_simulated < s.n_formula) {
    t.notes.push_back("simulated " + std::to_string(t.n_simulated) + " of " + std::to_string(s.n_formula) +
                      " catalyst copies (cap " + std::to_string(options.cap_dim) + ")");
  }
  if (t.n_simulated < 1) t.notes.push_back("not simulated: a single copy exceeds the dimension cap");
  return t;
}

}  // namespace

namespace detail {

std::vector<std::string> copy_labels(const RegisterLayout& layout, int j) {
  std::vector<std::string> out;
  for (const auto& l : layout.labels()) out.push_back(l + "#" + std::to_string(j));
  return out;
}

/// Block form and free-sample closure of the swap unitaries, on a copy
/// count small enough for dense unitaries. The swap pattern does not depend
/// on the number of copies.
void check_swap_structure(ProtocolTranscript& t, const FreeSet& family, const RegisterLayout& layout, int n,
                          const ProtocolOptions& options) {
  int n_check = 1;
  const double d = static_cast<double>(layout.total_dim());
  if (d * d > double(kStructureCheckDim)) {
    t.structure_detail = "structure check skipped: one copy exceeds the dense budget";
    return;
  }
  while (n_check < n && std::pow(d, n_check + 2) * (n_check + 1) <= double(kStructureCheckDim)) ++n_check;
  t.structure_copies = n_check;
  auto system = layout;
  for (int j = 1; j <= n_check; ++j) system = system.concat(layout.relabeled("#" + std::to_string(j)));
  std::vector<CMatrix> blocks;
  for (int j = 1; j <= n_check; ++j) {
    const auto copy = detail::copy_labels(layout, j);
    const auto dim = static_cast<Eigen::Index>(system.total_dim());
    CMatrix u = CMatrix::Identity(dim, dim);
    for (std::size_t i = 0; i < copy.size(); ++i) u = swap_registers(system, layout[i].label, copy[i]).matrix() * u;
    blocks.push_back(std::move(u));
  }
  Rng rng(options.seed);
  std::vector<DensityMatrix> samples;
  for (int s = 0; s < options.structure_samples; ++s) samples.push_back(family.sample(system, rng));
  const auto check = assumption1_structure_check(family, system, blocks, samples);
  t.structure_verified = check.ok();
  t.structure_detail = check.ok() ? "block form and free-sample closure verified" : check.detail;
  if (!check.membership_decidable) t.notes.push_back("structure check: membership undecidable on the joint layout");
}

}  // namespace detail

ProtocolTranscript run_catalytic_transformation(const DensityMatrix& rho, const FreeSet& family, double eps,
                                                double delta, const ProtocolOptions& options) {
  const auto s = prepare(rho, family, eps, delta, options);
  auto t = start("catalytic", rho, family, eps, delta, options, s);
  if (t.n_simulated >= 1) {
    simulate(t, rho, s.sigma, t.n_simulated);
    detail::check_swap_structure(t, family, rho.layout(), t.n_simulated, options);
  }
  finish(t, family, s, eps, delta);
  return t;
}

ConverseCertificate converse_certificate(const ProtocolTranscript& transcript, const FreeSet& family, double eps,
                                         bool assume_structure) {
  if (!transcript.input_state) throw DomainError("converse certificate: transcript has no input state");
  ConverseCertificate out;
  if (eps == transcript.eps) {
    out.lower_bound = transcript.k_lower;
    out.upper_bound = transcript.k;
  } else if (free_member(family, *transcript.input_state)) {
    out.lower_bound = out.upper_bound = 0;
  } else {
    const auto cs = closest_free_smooth_dmax(family, *transcript.input_state, eps);
    out.lower_bound = cs.estimate.lower;
    out.upper_bound = cs.estimate.value;
  }
  out.lower_bound = std::max(out.lower_bound, 0.0);
  out.factor = assume_structure && transcript.structure_verified ? 1.0 : 0.5;
  out.ok = out.factor * out.lower_bound <= transcript.log_J + kProtocolTolerance;
  return out;
}

ProtocolTranscript run_multiparty_transformation(const DensityMatrix& rho, const FreeSet& family, double eps,
                                                 double delta, int t_parties, const ProtocolOptions& options) {
  if (t_parties < 2) throw DomainError("multiparty protocol needs t >= 2");
  std::vector<std::string> parties;
  for (const auto& l : rho.layout().labels()) {
    const auto p = party_of(l);
    if (std::find(parties.begin(), parties.end(), p) == parties.end()) parties.push_back(p);
  }
  if (static_cast<int>(parties.size()) != t_parties) {
    throw LayoutError("multiparty protocol: layout " + rho.layout().describe() + " has " +
                      std::to_string(parties.size()) + " parties, expected " + std::to_string(t_parties));
  }
  const auto s = prepare(rho, family, eps, delta, options);
  auto t = start("multiparty", rho, family, eps, delta, options, s, t_parties);
  t.parties = t_parties;
  // each party swaps only its own share: target and copy labels agree in party
  t.local_operations = true;
  for (int j = 1; j <= std::max(t.n_simulated, 1); ++j) {
    const auto copy = detail::copy_labels(rho.layout(), j);
    for (std::size_t i = 0; i < copy.size(); ++i)
      t.local_operations = t.local_operations && party_of(copy[i]) == party_of(rho.layout()[i].label);
  }
  if (!t.local_operations) t.failures.push_back("a swap acts across parties");
  const int ell = std::max(t.n_simulated, 1);
  const SharedRandomnessState shared{ell, t_parties};
  const auto id = shared.state();
  bool marginals_uniform = true;
  for (const auto& l : id.layout().labels()) {
    const auto marginal = reduced_state(id, {l});
    marginals_uniform = marginals_uniform &&
                        max_abs_diff(marginal.matrix(), DensityMatrix::maximally_mixed(marginal.layout()).matrix()) <
                            1e-12;
  }
  t.shared_randomness_free = marginals_uniform && membership(*make_shared_randomness(make_uniformity()), id);
  if (!t.shared_randomness_free) t.failures.push_back("shared randomness is not id_{n,t}");
  if (t.n_simulated >= 1) {
    simulate(t, rho, s.sigma, t.n_simulated);
    detail::check_swap_structure(t, family, rho.layout(), t.n_simulated, options);
  }
  finish(t, family, s, eps, delta);
  return t;
}

}  // namespace erasure
