#include "doctest.h"
#include "oracles.hpp"

#include "erasure/protocols.hpp"
#include "erasure/transcript_json.hpp"

#include <cmath>

using namespace erasure;

namespace {

const RegisterLayout kQ{{"M", 2}};
const RegisterLayout kAB{{"M.A", 2}, {"M.B", 2}};

DensityMatrix zero() { return DensityMatrix::basis_state(kQ, 0); }
DensityMatrix plus() { return DensityMatrix(kQ, oracle::ket_projector({1, 1})); }
DensityMatrix bell() { return DensityMatrix(kAB, oracle::ket_projector({1, 0, 0, 1})); }
DensityMatrix mixed() { return DensityMatrix::maximally_mixed(kQ); }

DensityMatrix diag2(double p0) {
  RVector p(2);
  p << p0, 1 - p0;
  return DensityMatrix::diagonal(kQ, p);
}

/// |0><0| on bit 0 of an n-bit register, the rest uniform.
std::vector<double> zero_then_uniform(int n, int zero_bits) {
  std::vector<double> dist(std::size_t{1} << n, 0.0);
  const std::size_t rest = std::size_t{1} << (n - zero_bits);
  for (std::size_t x = 0; x < rest; ++x) dist[x] = 1.0 / double(rest);
  return dist;
}

}  // namespace

TEST_SUITE("convex split state") {
  TEST_CASE("rho equal to sigma gives the tensor power") {
    Rng rng(3);
    const auto s = random_state(kQ, rng);
    CHECK(oracle::max_abs_diff(convex_split_state(s, s, 3).matrix(), tensor_power(s, 3).matrix()) < 1e-14);
  }

  TEST_CASE("one copy gives rho") {
    Rng rng(4);
    const auto r = random_state(kQ, rng);
    const auto s = random_state(kQ, rng);
    CHECK(oracle::max_abs_diff(convex_split_state(r, s, 1).matrix(), r.matrix()) < 1e-15);
  }

  TEST_CASE("every single-copy marginal is rho/3 + 2 sigma/3") {
    Rng rng(5);
    const auto r = random_state(kQ, rng);
    const auto s = random_state(kQ, rng);
    const CMatrix tau = convex_split_state(r, s, 3).matrix();
    const CMatrix expected = r.matrix() / 3.0 + s.matrix() * (2.0 / 3.0);
    const CMatrix first = oracle::trace_out_second(tau, 2, 4);
    const CMatrix last = oracle::trace_out_first(tau, 4, 2);
    const CMatrix middle = oracle::trace_out_second(oracle::trace_out_first(tau, 2, 4), 2, 2);
    CHECK(oracle::max_abs_diff(first, expected) < 1e-14);
    CHECK(oracle::max_abs_diff(middle, expected) < 1e-14);
    CHECK(oracle::max_abs_diff(last, expected) < 1e-14);
  }

  TEST_CASE("swapping two copies permutes the mixture terms") {
    Rng rng(6);
    const auto r = random_state(kQ, rng);
    const auto s = random_state(kQ, rng);
    const auto tau = convex_split_state(r, s, 3);
    const auto swapped = permute_registers(tau, {2, 1, 0}).relabeled(tau.layout());
    CHECK(oracle::max_abs_diff(swapped.matrix(), tau.matrix()) < 1e-14);
    const DensityMatrix term1(tau.layout(), linalg::kron(linalg::kron(r.matrix(), s.matrix()), s.matrix()));
    const DensityMatrix term3(tau.layout(), linalg::kron(linalg::kron(s.matrix(), s.matrix()), r.matrix()));
    const auto moved = permute_registers(term1, {2, 1, 0}).relabeled(tau.layout());
    CHECK(oracle::max_abs_diff(moved.matrix(), term3.matrix()) < 1e-14);
  }

  TEST_CASE("dimension budget") {
    CHECK_THROWS_AS(convex_split_state(mixed(), mixed(), 13), DimensionError);
    CHECK_THROWS_AS(convex_split_state(mixed(), bell(), 2), LayoutError);
  }
}

TEST_SUITE("convex split bound") {
  TEST_CASE("rho equal to sigma") {
    const auto c = convex_split_bound_check(plus(), plus(), 4, 0);
    CHECK(c.lhs < 1e-7);
    CHECK(c.ok);
  }

  TEST_CASE("classical fast path at n = 64") {
    const auto c = convex_split_bound_check(diag2(0.9), diag2(0.5), 64, 0);
    CHECK(c.classical);
    const double f = oracle::binary_convex_split_fidelity(0.1, 0.5, 64);
    CHECK(c.lhs == doctest::Approx(std::sqrt(1 - f * f)).epsilon(1e-10));
    CHECK(c.k == doctest::Approx(std::log2(1.8)).epsilon(1e-12));
    CHECK(c.ok);
  }

  TEST_CASE("classical fast path agrees with the dense state") {
    const auto r = diag2(0.8);
    const auto s = diag2(0.35);
    const auto c = convex_split_bound_check(r, s, 6, 0);
    const double dense = purified_distance(convex_split_state(r, s, 6), tensor_power(s, 6));
    CHECK(c.lhs == doctest::Approx(dense).epsilon(1e-9));
  }

  TEST_CASE("pure qubit against the maximally mixed state") {
    const auto four = convex_split_bound_check(plus(), mixed(), 4, 0);
    const auto eight = convex_split_bound_check(plus(), mixed(), 8, 0);
    CHECK_FALSE(four.classical);
    CHECK(four.ok);
    CHECK(eight.ok);
    CHECK(eight.lhs < four.lhs);
    // the Hadamard-rotated problem is diagonal
    const double f4 = oracle::binary_convex_split_fidelity(0, 0.5, 4);
    CHECK(four.lhs == doctest::Approx(std::sqrt(1 - f4 * f4)).epsilon(1e-9));
  }

  TEST_CASE("random qubit pairs with smoothing") {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
      const auto r = random_state(kQ, rng);
      const auto s = random_state(kQ, rng);
      for (const double eps : {0.0, 0.05}) {
        for (const int n : {2, 4}) {
          const auto c = convex_split_bound_check(r, s, n, eps);
          CHECK(c.lhs <= c.rhs + 1e-6);
        }
      }
    }
  }
}

TEST_SUITE("controlled swap channel") {
  TEST_CASE("a single copy is a plain swap") {
    Rng rng(12);
    const RegisterLayout two{{"M", 2}, {"M#1", 2}};
    const auto state = random_state(two, rng);
    const auto out = controlled_swap_channel(state, {"M"}, {{"M#1"}});
    const auto swap = swap_registers(two, "M", "M#1");
    CHECK(oracle::max_abs_diff(out.matrix(), swap.apply(state).matrix()) < 1e-14);
  }

  TEST_CASE("simulation caps") {
    CHECK(simulation_cap(2, 4096) == 8);
    CHECK(simulation_cap(4, 4096, 2) == 3);
    CHECK(simulation_cap(4096, 4096) == 0);
  }
}

TEST_SUITE("catalytic transformation") {
  TEST_CASE("free input needs one copy") {
    const auto t = run_catalytic_transformation(mixed(), *make_uniformity(), 0, 0.5);
    CHECK(t.n_copies == 1);
    CHECK(t.achieved_distance < 1e-7);
    CHECK(t.log_J == 0);
    CHECK(t.ok());
  }

  TEST_CASE("uniformity on a pure qubit") {
    const auto t = run_catalytic_transformation(zero(), *make_uniformity(), 0, 0.5);
    CHECK(t.k == doctest::Approx(1).epsilon(1e-9));
    CHECK(t.n_copies == 8);
    CHECK(t.n_simulated == 8);
    CHECK(t.log_J == doctest::Approx(3));
    CHECK(t.catalyst_qubits == doctest::Approx(8));
    CHECK(t.achieved_distance <= 0.5);
    CHECK(t.register_deviation < 1e-10);
    CHECK(t.structure_verified);
    CHECK(t.ok());
    // nine classical bits: |0> on bit 0 then uniform, swapped with a random copy
    std::vector<int> copies{1, 2, 3, 4, 5, 6, 7, 8};
    const auto out = oracle::average_bit_swaps(zero_then_uniform(9, 1), 9, 0, copies);
    const std::vector<double> uniform(out.size(), 1.0 / double(out.size()));
    const double expected = oracle::purified_distance_classical(out, uniform);
    CHECK(t.achieved_distance == doctest::Approx(expected).epsilon(1e-9));
    CHECK(t.catalyst_return_distance == doctest::Approx(expected).epsilon(1e-9));
  }

  TEST_CASE("coherence on plus is the rotated uniformity run") {
    const auto t = run_catalytic_transformation(plus(), *make_coherence(), 0, 0.5);
    const auto u = run_catalytic_transformation(zero(), *make_uniformity(), 0, 0.5);
    REQUIRE(t.catalyst);
    CHECK(oracle::max_abs_diff(t.catalyst->matrix(), mixed().matrix()) < 1e-6);
    CHECK(t.n_copies == 8);
    CHECK(t.achieved_distance <= 0.5);
    CHECK(t.achieved_distance == doctest::Approx(u.achieved_distance).epsilon(1e-6));
    CHECK(t.register_deviation < 1e-10);
    CHECK(t.ok());
  }

  TEST_CASE("capped runs check the bound at the simulated count") {
    ProtocolOptions options;
    options.cap_dim = 64;
    const auto t = run_catalytic_transformation(zero(), *make_uniformity(), 0, 0.5, options);
    CHECK(t.n_copies == 8);
    CHECK(t.n_simulated == 3);
    CHECK(t.distance_bound == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-9));
    CHECK(t.achieved_distance <= t.distance_bound);
    CHECK(t.catalyst_qubits == doctest::Approx(8));
    CHECK(t.ok());
  }

  TEST_CASE("a cap below one copy leaves the run unsimulated") {
    ProtocolOptions options;
    options.cap_dim = 2;
    const auto t = run_catalytic_transformation(zero(), *make_uniformity(), 0, 0.5, options);
    CHECK_FALSE(t.simulated);
    CHECK(t.n_copies == 8);
    CHECK(t.ok());
  }

  TEST_CASE("parameter ranges") {
    CHECK_THROWS_AS(run_catalytic_transformation(zero(), *make_uniformity(), 1.2, 0.5), DomainError);
    CHECK_THROWS_AS(run_catalytic_transformation(zero(), *make_uniformity(), 0, 0), DomainError);
  }

  TEST_CASE("transcript json carries every field") {
    const auto t = run_catalytic_transformation(zero(), *make_uniformity(), 0, 0.5);
    const auto j = to_json(t);
    for (const char* key : {"input_state", "free_set", "eps_target", "delta", "n_copies", "log_J",
                            "catalyst_description", "output_state", "achieved_distance",
                            "catalyst_return_distance", "converse_lower_bound"}) {
      CAPTURE(key);
      CHECK(j.contains(key));
    }
    CHECK(j["log_J"].get<double>() == doctest::Approx(std::log2(j["n_copies"].get<double>())));
    CHECK(json_number(kInfinity) == "inf");
  }
}

TEST_SUITE("converse certificate") {
  TEST_CASE("free input has a zero lower bound") {
    const auto t = run_catalytic_transformation(mixed(), *make_uniformity(), 0, 0.5);
    const auto c = converse_certificate(t, *make_uniformity(), 0);
    CHECK(c.lower_bound == 0);
    CHECK(c.ok);
  }

  TEST_CASE("uniformity on a pure qubit needs one bit") {
    const auto t = run_catalytic_transformation(zero(), *make_uniformity(), 0, 0.5);
    const auto c = converse_certificate(t, *make_uniformity(), 0);
    CHECK(c.lower_bound == doctest::Approx(1).epsilon(1e-9));
    CHECK(c.factor == 1);
    CHECK(c.ok);
    const auto weak = converse_certificate(t, *make_uniformity(), 0, false);
    CHECK(weak.factor == 0.5);
    CHECK(weak.ok);
  }

  TEST_CASE("coherence of plus at eps = 0.1 brackets the randomness cost") {
    const double eps = 0.1;
    const double delta = 0.5;
    const auto t = run_catalytic_transformation(plus(), *make_coherence(), eps, delta);
    const auto c = converse_certificate(t, *make_coherence(), eps);
    // the top eigenprojector keeps weight 1 - eps^2 in the ball; free states give it at most 1/2
    CHECK(c.lower_bound == doctest::Approx(std::log2(2 * (1 - eps * eps))).epsilon(1e-7));
    CHECK(c.lower_bound <= c.upper_bound + 1e-9);
    CHECK(c.upper_bound - c.lower_bound < 1e-3);
    CHECK(c.lower_bound <= t.log_J);
    const double rounding = std::log2(t.n_copies / (std::exp2(t.k) / (delta * delta)));
    CHECK(t.log_J <= c.upper_bound + 2 * std::log2(1 / delta) + rounding + 1e-9);
    CHECK(t.ok());
  }

  TEST_CASE("a different eps recomputes the bound") {
    const auto t = run_catalytic_transformation(plus(), *make_coherence(), 0, 0.5);
    const auto c = converse_certificate(t, *make_coherence(), 0.1);
    CHECK(c.lower_bound == doctest::Approx(std::log2(1.98)).epsilon(1e-7));
  }
}

TEST_SUITE("multiparty transformation") {
  TEST_CASE("product free input") {
    const auto product = DensityMatrix::basis_state(kAB, 0);
    const auto t = run_multiparty_transformation(product, *make_separable(), 0, 0.5, 2);
    CHECK(t.achieved_distance < 1e-7);
    CHECK(t.ok());
  }

  TEST_CASE("bell state under separable states") {
    const double delta = 0.7;
    const auto t = run_multiparty_transformation(bell(), *make_separable(), 0, delta, 2);
    CHECK(t.k == doctest::Approx(1).epsilon(1e-6));
    CHECK(t.k_lower == doctest::Approx(1).epsilon(1e-9));
    CHECK(t.n_copies == 5);
    CHECK(t.n_simulated == 3);
    CHECK(t.local_operations);
    CHECK(t.shared_randomness_free);
    CHECK(t.achieved_distance <= t.distance_bound + 1e-6);
    CHECK(t.achieved_distance <= delta);
    CHECK(t.register_deviation < 1e-10);
    CHECK(t.ok());
    // dense two-party oracle: sigma* (x) tau with tau the three-copy convex split
    REQUIRE(t.catalyst);
    const CMatrix s = t.catalyst->matrix();
    const CMatrix b = bell().matrix();
    CMatrix tau = CMatrix::Zero(64, 64);
    for (int j = 0; j < 3; ++j) {
      CMatrix term = CMatrix::Identity(1, 1);
      for (int i = 0; i < 3; ++i) term = linalg::kron(term, i == j ? b : s);
      tau += term / 3.0;
    }
    const CMatrix out = linalg::kron(s, tau);
    const CMatrix target = linalg::kron(s, linalg::kron(s, linalg::kron(s, s)));
    const double f = oracle::fidelity_svd(out, target);
    CHECK(t.achieved_distance == doctest::Approx(std::sqrt(1 - f * f)).epsilon(1e-7));
  }

  TEST_CASE("shared randomness marginals are uniform") {
    const SharedRandomnessState id{3, 2};
    const auto state = id.state();
    for (const auto& label : state.layout().labels()) {
      const auto marginal = reduced_state(state, {label});
      CHECK(oracle::max_abs_diff(marginal.matrix(), CMatrix::Identity(3, 3) / 3.0) < 1e-15);
    }
    CHECK(membership(*make_shared_randomness(make_uniformity()), state));
  }

  TEST_CASE("party count must match") {
    CHECK_THROWS_AS(run_multiparty_transformation(bell(), *make_separable(), 0, 0.5, 3), LayoutError);
    CHECK_THROWS_AS(run_multiparty_transformation(bell(), *make_separable(), 0, 0.5, 1), DomainError);
  }
}

TEST_SUITE("block protocol plan") {
  TEST_CASE("rho equal to sigma") {
    const auto p = plan_block_protocol(diag2(0.3), diag2(0.3), 1 << 10, 0.1, 0.05);
    CHECK(p.V < 1e-12);
    CHECK(p.ell == 1);
    CHECK(p.k_per_block == doctest::Approx(2 * std::log2(2.0 * (1 << 10) / 0.05)).epsilon(1e-9));
  }

  TEST_CASE("classical example at m = 2^20") {
    const int m = 1 << 20;
    const double gamma = 0.1;
    const double eps = 0.01;
    const auto p = plan_block_protocol(diag2(0.7), diag2(0.5), m, gamma, eps);
    const RVector pv = (RVector(2) << 0.7, 0.3).finished();
    const RVector qv = (RVector(2) << 0.5, 0.5).finished();
    const double d = oracle::kl_bits(pv, qv);
    const double v = 0.7 * std::pow(std::log2(1.4) - d, 2) + 0.3 * std::pow(std::log2(0.6) - d, 2);
    CHECK(p.D == doctest::Approx(d).epsilon(1e-12));
    CHECK(p.V == doctest::Approx(v).epsilon(1e-10));
    CHECK(p.ell == static_cast<int>(std::ceil(2 * 20 * v / (gamma * gamma))));
    CHECK(p.ell == 1256);
    CHECK(p.eps_block == doctest::Approx(eps * p.ell / (2.0 * m)).epsilon(1e-12));
    CHECK(p.k_method == "classical-oracle");
    // the same smoothing on type classes of the second symbol
    std::vector<long double> lp;
    std::vector<long double> lq;
    for (int k = 0; k <= p.ell; ++k) {
      const long double lc = (std::lgamma(p.ell + 1.0L) - std::lgamma(k + 1.0L) - std::lgamma(p.ell - k + 1.0L)) /
                             std::log(2.0L);
      lp.push_back(lc + k * std::log2(0.3L) + (p.ell - k) * std::log2(0.7L));
      lq.push_back(lc - p.ell);
    }
    const double smooth = oracle::smooth_dmax_groups(lp, lq, p.eps_block);
    CHECK(p.k_per_block - p.overhead == doctest::Approx(smooth).epsilon(1e-6));
    CHECK(p.second_order_consistent);
    MESSAGE("exact k / ell = " << p.k_per_block / p.ell << ", D + gamma = " << d + gamma);
  }

  TEST_CASE("catalyst size is |M| ell 2^k") {
    const auto p = plan_block_protocol(diag2(0.7), diag2(0.5), 1 << 12, 0.2, 0.05);
    CHECK(p.catalyst_qubits == doctest::Approx(2.0 * p.ell * std::exp2(p.k_per_block)).epsilon(1e-12));
  }

  TEST_CASE("preconditions") {
    CHECK_THROWS_AS(plan_block_protocol(diag2(0.7), diag2(0.5), 1 << 10, 0.3, 0.05), DomainError);
    CHECK_THROWS_AS(plan_block_protocol(diag2(0.7), diag2(0.5), 0, 0.1, 0.05), DomainError);
    CHECK_THROWS_AS(plan_block_protocol(zero(), diag2(0.0), 4, 0.1, 0.05), DomainError);
  }

  TEST_CASE("uneven block count") {
    const auto p = plan_block_protocol(diag2(0.7), diag2(0.5), 1000, 0.2, 0.05);
    CHECK(p.blocks == (1000 + p.ell - 1) / p.ell);
    CHECK(p.last_block == 1000 - (p.blocks - 1) * p.ell);
  }
}

TEST_SUITE("block protocol run") {
  TEST_CASE("a single block matches the catalytic run") {
    const double eps = 0.05;
    const auto b = run_block_protocol(zero(), *make_uniformity(), 1, 0.2, eps);
    const auto c = run_catalytic_transformation(zero(), *make_uniformity(), eps / 2, eps / 2);
    CHECK(b.blocks == 1);
    CHECK(b.n_simulated == c.n_simulated);
    CHECK(std::abs(b.n_copies - c.n_copies) <= 0.002 * c.n_copies);
    CHECK(b.achieved_distance == doctest::Approx(c.achieved_distance).epsilon(1e-9));
    CHECK(b.ok());
  }

  TEST_CASE("two blocks of a pure qubit under uniformity") {
    const auto t = run_block_protocol(zero(), *make_uniformity(), 2, 0.2, 0.05);
    REQUIRE(t.simulated);
    CHECK(t.blocks == 2);
    CHECK(t.n_simulated == 7);
    REQUIRE(t.block_distances.size() == 2);
    CHECK(t.achieved_distance <= 2 * t.block_distances[0] + 1e-8);
    CHECK(t.ok());
    // classical oracle: bits 0, 1 are the blocks, bits 2..8 the pool
    std::vector<int> pool{2, 3, 4, 5, 6, 7, 8};
    auto dist = zero_then_uniform(9, 2);
    dist = oracle::average_bit_swaps(dist, 9, 0, pool);
    dist = oracle::average_bit_swaps(dist, 9, 1, pool);
    const std::vector<double> uniform(dist.size(), 1.0 / double(dist.size()));
    CHECK(t.achieved_distance == doctest::Approx(oracle::purified_distance_classical(dist, uniform)).epsilon(1e-9));
    const auto single = oracle::average_bit_swaps(zero_then_uniform(8, 1), 8, 0, {1, 2, 3, 4, 5, 6, 7});
    const std::vector<double> uniform8(single.size(), 1.0 / double(single.size()));
    CHECK(t.block_distances[0] ==
          doctest::Approx(oracle::purified_distance_classical(single, uniform8)).epsilon(1e-9));
  }

  TEST_CASE("an erased block barely moves the pool") {
    const auto t = run_block_protocol(zero(), *make_uniformity(), 2, 0.2, 0.05);
    CHECK(t.idle_catalyst_shift <= 2 * t.block_distances[0] + 1e-10);
    CHECK(t.idle_catalyst_shift < t.block_distances[0]);
  }
}

TEST_SUITE("asymptotic rate report") {
  TEST_CASE("free input") {
    const auto r = asymptotic_rate_report(mixed(), *make_coherence(), {0.05}, 3);
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) {
      CHECK(row.converse == 0);
      CHECK(row.upper == 0);
      CHECK(row.E_over_n == 0);
    }
    CHECK(r.ok());
  }

  TEST_CASE("uniformity on a pure qubit has rate one") {
    const auto r = asymptotic_rate_report(zero(), *make_uniformity(), {0.0}, 4);
    REQUIRE(r.rows.size() == 4);
    for (const auto& row : r.rows) {
      CHECK(row.E_over_n == doctest::Approx(1).epsilon(1e-9));
      CHECK(row.upper == doctest::Approx(1).epsilon(1e-6));
    }
    CHECK(r.ok());
  }

  TEST_CASE("coherence of plus up to six copies") {
    const double eps = 0.05;
    const auto r = asymptotic_rate_report(plus(), *make_coherence(), {eps}, 6);
    REQUIRE(r.rows.size() == 6);
    CHECK(r.ok());
    for (const auto& row : r.rows) {
      CAPTURE(row.n);
      // the top eigenprojector of plus^n bounds the minimum from below
      const double analytic = (row.n + std::log2(1 - eps * eps)) / row.n;
      CHECK(row.converse >= analytic - 1e-7);
      CHECK(row.converse <= row.upper + 1e-9);
      CHECK(row.achievable == doctest::Approx(row.upper + 2 * std::log2(10.0) / row.n));
    }
    const auto& last = r.rows.back();
    CHECK(std::abs(last.converse - 1) <= 0.2);
    CHECK(std::abs(last.upper - 1) <= 0.2);
  }

  TEST_CASE("infinite C(F) skips the report") {
    const RegisterLayout shared{{"J.A", 2}, {"J.B", 2}, {"X", 2}};
    Rng rng(2);
    const auto r = asymptotic_rate_report(random_state(shared, rng), *make_shared_randomness(make_coherence()),
                                          {0.05}, 2);
    CHECK(r.skipped);
    CHECK(r.rows.empty());
  }
}
