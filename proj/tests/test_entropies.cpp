#include "doctest.h"
#include "oracles.hpp"

#include "erasure/entropies.hpp"
#include "erasure/random.hpp"

#include <cmath>

using namespace erasure;

namespace {

const RegisterLayout kQ{{"M", 2}};

DensityMatrix diag2(double p0) { return DensityMatrix::diagonal(kQ, RVector{{p0, 1 - p0}}); }
DensityMatrix plus() { return DensityMatrix(kQ, oracle::ket_projector({1, 1})); }

/// Random pair with supp(rho) inside supp(sigma) (sigma full rank).
std::pair<DensityMatrix, DensityMatrix> random_pair(Rng& rng, std::size_t d, std::size_t rank_rho) {
  const RegisterLayout l{{"M", d}};
  return {random_state(l, rng, rank_rho), random_state(l, rng)};
}

}  // namespace

TEST_SUITE("relative entropy") {
  TEST_CASE("examples") {
    Rng rng(1);
    const auto r = random_state(kQ, rng);
    CHECK(std::abs(relative_entropy(r, r).value) < 1e-12);
    CHECK(relative_entropy(DensityMatrix::basis_state(kQ, 0), DensityMatrix::maximally_mixed(kQ)).value ==
          doctest::Approx(1.0));
    // S(Delta rho) - S(rho) for |+>
    Eigen::SelfAdjointEigenSolver<CMatrix> es(plus().matrix());
    double s_rho = 0;
    for (int i = 0; i < 2; ++i) {
      const double l = es.eigenvalues()(i);
      if (l > 1e-12) s_rho -= l * std::log2(l);
    }
    const double expect = 1.0 - s_rho;
    CHECK(relative_entropy(plus(), DensityMatrix::maximally_mixed(kQ)).value == doctest::Approx(expect).epsilon(1e-10));
  }

  TEST_CASE("support violation gives infinity") {
    CHECK(relative_entropy(plus(), DensityMatrix::basis_state(kQ, 0)).is_infinite());
    CHECK(dmax(plus(), DensityMatrix::basis_state(kQ, 0)).is_infinite());
    CHECK_THROWS_AS(relative_entropy_variance(plus(), DensityMatrix::basis_state(kQ, 0)), DomainError);
  }

  TEST_CASE("variance examples") {
    Rng rng(2);
    const auto r = random_state(kQ, rng);
    CHECK(std::abs(relative_entropy_variance(r, r).value) < 1e-10);
    CHECK(std::abs(relative_entropy_variance(DensityMatrix::basis_state(kQ, 0), DensityMatrix::maximally_mixed(kQ)).value) <
          1e-12);
    const double d = 0.7 * std::log2(0.7 / 0.5) + 0.3 * std::log2(0.3 / 0.5);
    const double m2 = 0.7 * std::pow(std::log2(0.7 / 0.5), 2) + 0.3 * std::pow(std::log2(0.3 / 0.5), 2);
    CHECK(relative_entropy_variance(diag2(0.7), diag2(0.5)).value == doctest::Approx(m2 - d * d).epsilon(1e-12));
    CHECK(relative_entropy_variance(RVector{{0.7, 0.3}}, RVector{{0.5, 0.5}}) ==
          doctest::Approx(m2 - d * d).epsilon(1e-12));
  }

  TEST_CASE("property: V >= 0 and V = 0 when the log ratio is constant on supp(rho)") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      auto [r, s] = random_pair(rng, 3, 1 + trial % 3);
      CHECK(relative_entropy_variance(r, s).value >= -1e-12);
    }
    // rho = Pi sigma Pi / Tr: log rho - log sigma = const on the support
    const RVector s{{0.5, 0.3, 0.2}};
    const RVector p{{0.5 / 0.8, 0.3 / 0.8, 0.0}};
    const RegisterLayout l{{"M", 3}};
    CHECK(std::abs(relative_entropy_variance(DensityMatrix::diagonal(l, p), DensityMatrix::diagonal(l, s)).value) < 1e-12);
  }
}

TEST_SUITE("max-relative entropy") {
  TEST_CASE("examples") {
    Rng rng(4);
    const auto r = random_state(kQ, rng);
    CHECK(std::abs(dmax(r, r).value) < 1e-10);
    CHECK(dmax(DensityMatrix::basis_state(kQ, 0), DensityMatrix::maximally_mixed(kQ)).value == doctest::Approx(1.0));
    const double ratio = std::max(0.9 / 0.5, 0.1 / 0.5);
    CHECK(dmax(diag2(0.9), diag2(0.5)).value == doctest::Approx(std::log2(ratio)).epsilon(1e-12));
  }

  TEST_CASE("property: D <= D_max") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      auto [r, s] = random_pair(rng, 2 + trial % 3, 1 + trial % 2);
      CHECK(relative_entropy(r, s).value <= dmax(r, s).value + 1e-9);
    }
  }

  TEST_CASE("property: additivity on identical pairs") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      auto [r, s] = random_pair(rng, 2, 1 + trial % 2);
      CHECK(dmax(tensor_power(r, 2), tensor_power(s, 2)).value == doctest::Approx(2 * dmax(r, s).value).epsilon(1e-8));
    }
  }
}

TEST_SUITE("smooth max-relative entropy") {
  TEST_CASE("eps = 0 is D_max") {
    Rng rng(7);
    auto [r, s] = random_pair(rng, 2, 2);
    CHECK(smooth_dmax(r, s, 0.0).value == doctest::Approx(dmax(r, s).value).epsilon(1e-12));
  }

  TEST_CASE("rho = sigma gives zero with certificate") {
    Rng rng(8);
    const auto r = random_state(kQ, rng);
    const auto e = smooth_dmax(r, r, 0.2);
    CHECK(e.value == 0.0);
    REQUIRE(e.certificate.has_value());
    CHECK(purified_distance(*e.certificate, r) <= 0.2);
  }

  TEST_CASE("classical example matches a brute-force grid") {
    const double grid = oracle::smooth_dmax_two_outcome_grid(0.9, 0.5, 0.1);
    const auto q = smooth_dmax(diag2(0.9), diag2(0.5), 0.1);
    CHECK(q.value == doctest::Approx(grid).epsilon(1e-3));
    CHECK(std::abs(q.value - grid) < 1e-3);
    const auto c = smooth_dmax_classical_oracle(RVector{{0.9, 0.1}}, RVector{{0.5, 0.5}}, 0.1);
    CHECK(std::abs(c.value - grid) < 1e-5);
  }

  TEST_CASE("classical oracle: trivial cases and strict decrease") {
    const RVector p{{0.9, 0.1}}, q{{0.5, 0.5}};
    CHECK(smooth_dmax_classical_oracle(p, q, 0.0).value == doctest::Approx(std::log2(1.8)));
    CHECK(smooth_dmax_classical_oracle(q, q, 0.3).value == 0.0);
    CHECK(smooth_dmax_classical_oracle(p, q, 0.3).value < std::log2(1.8) - 1e-3);
    CHECK(std::abs(smooth_dmax_classical_oracle(p, q, 0.3).value - oracle::smooth_dmax_two_outcome_grid(0.9, 0.5, 0.3)) <
          1e-5);
  }

  TEST_CASE("classical oracle is nonincreasing in eps") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      const RVector p = random_distribution(5, rng), q = random_distribution(5, rng);
      double prev = kInfinity;
      for (double eps : {0.0, 0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
        const double v = smooth_dmax_classical_oracle(p, q, eps).value;
        CHECK(v <= prev + 1e-12);
        prev = v;
      }
    }
  }

  TEST_CASE("grouped oracle equals the plain oracle on i.i.d. blocks") {
    const RVector p{{0.7, 0.3}}, q{{0.5, 0.5}};
    for (int n : {1, 3, 6}) {
      RVector pn = RVector::Ones(1), qn = RVector::Ones(1);
      for (int k = 0; k < n; ++k) {
        RVector a(pn.size() * 2), b(qn.size() * 2);
        for (Eigen::Index i = 0; i < pn.size(); ++i) {
          a(2 * i) = pn(i) * p(0);
          a(2 * i + 1) = pn(i) * p(1);
          b(2 * i) = qn(i) * q(0);
          b(2 * i + 1) = qn(i) * q(1);
        }
        pn = a;
        qn = b;
      }
      const auto g = binary_iid_groups(0.3, 0.5, n);
      const double plain = smooth_dmax_classical_oracle(pn, qn, 0.2).value;
      CHECK(smooth_dmax_classical_grouped(g.log2_p, g.log2_q, 0.2).value == doctest::Approx(plain).epsilon(1e-9));
    }
  }

  TEST_CASE("support outside sigma: infinite unless smoothing removes it") {
    const auto rho = diag2(0.95);
    const auto sigma = DensityMatrix::basis_state(kQ, 0);
    const auto small = smooth_dmax(rho, sigma, 0.1);
    CHECK(small.is_infinite());
    const auto big = smooth_dmax(rho, sigma, 0.3);
    CHECK(big.value == doctest::Approx(0.0));
  }

  TEST_CASE("property: certificate validity and monotonicity in eps") {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
      auto [r, s] = random_pair(rng, 2 + trial % 2, 1 + trial % 2);
      double prev = dmax(r, s).value;
      for (double eps : {0.05, 0.1, 0.2}) {
        const auto e = smooth_dmax(r, s, eps);
        REQUIRE(e.certificate.has_value());
        CHECK(purified_distance(r, *e.certificate) <= eps + 1e-6);
        const CMatrix gap = std::exp2(e.value) * s.matrix() - e.certificate->matrix();
        CHECK(linalg::min_eigenvalue_h(gap) >= -1e-8);
        CHECK(e.value <= prev + 1e-4);
        CHECK(e.lower <= e.value);
        prev = e.value;
      }
    }
  }

  TEST_CASE("property: commuting pairs agree with the classical oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const RegisterLayout l{{"M", static_cast<std::size_t>(2 + trial % 3)}};
      const RVector p = random_distribution(l.total_dim(), rng), q = random_distribution(l.total_dim(), rng);
      for (double eps : {0.05, 0.2}) {
        const double quantum = smooth_dmax(DensityMatrix::diagonal(l, p), DensityMatrix::diagonal(l, q), eps).value;
        const double classical = smooth_dmax_classical_oracle(p, q, eps).value;
        CHECK(std::abs(quantum - classical) < 1e-3);
      }
    }
  }
}

TEST_SUITE("gaussian") {
  TEST_CASE("symmetry point") {
    CHECK(gaussian_cdf_inv(0.5) == 0.0);
    CHECK(gaussian_cdf(0.0) == 0.5);
    CHECK_THROWS_AS(gaussian_cdf_inv(0.0), DomainError);
    CHECK_THROWS_AS(gaussian_cdf_inv(1.0), DomainError);
  }

  TEST_CASE("quantile bound at eps = 0.1 against a numeric quantile") {
    // independent quantile: bisection on erfc
    double lo = -10, hi = 0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (0.5 * std::erfc(-mid / std::sqrt(2.0)) < 0.1 ? lo : hi) = mid;
    }
    CHECK(gaussian_cdf_inv(0.1) == doctest::Approx(lo).epsilon(1e-12));
    CHECK(std::abs(lo) <= 2 * std::sqrt(std::log2(5.0)));
    CHECK(gaussian_quantile_bound(0.1) == doctest::Approx(2 * std::sqrt(std::log2(5.0))));
  }

  TEST_CASE("property: self-consistency across the range") {
    for (double p = 1e-12; p < 1; p = p < 0.01 ? p * 3 : p + 0.01) {
      CHECK(std::abs(gaussian_cdf(gaussian_cdf_inv(p)) - p) <= 1e-10 * std::max(1.0, p));
    }
  }
}

TEST_SUITE("second order") {
  TEST_CASE("rho = sigma is zero at eps = 1/2") {
    Rng rng(12);
    const auto r = random_state(kQ, rng);
    for (int n : {1, 5, 20}) CHECK(std::abs(second_order_dmax(r, r, n, 0.5).value) < 1e-9);
  }

  TEST_CASE("eps = 1/2 gives exactly n D") {
    for (int n : {1, 4, 9}) {
      const auto e = second_order_dmax(diag2(0.7), diag2(0.5), n, 0.5);
      CHECK(e.value == doctest::Approx(n * oracle::kl_bits(RVector{{0.7, 0.3}}, RVector{{0.5, 0.5}})).epsilon(1e-12));
      CHECK(e.method == EstimateMethod::SecondOrderExpansion);
    }
  }

  TEST_CASE("support violation is an error") {
    CHECK_THROWS_AS(second_order_dmax(plus(), DensityMatrix::basis_state(kQ, 0), 3, 0.1), DomainError);
  }
}

TEST_SUITE("continuity bound") {
  TEST_CASE("identical states give zero") {
    Rng rng(13);
    const auto r = random_state(kQ, rng);
    CHECK(continuity_bound(r, r, 1.0) == 0.0);
  }

  TEST_CASE("precondition on the trace distance") {
    CHECK_THROWS_AS(continuity_bound(DensityMatrix::basis_state(kQ, 0), DensityMatrix::basis_state(kQ, 1), 1.0),
                    DomainError);
  }

  TEST_CASE("formula") {
    const double e = 0.1;
    CHECK(continuity_bound_value(e, 1.0, 1.0) == doctest::Approx(e * 2 + e * std::log2(10.0) + 4 * e));
  }
}
