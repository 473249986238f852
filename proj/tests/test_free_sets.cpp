#include "doctest.h"
#include "oracles.hpp"

#include "erasure/free_sets.hpp"

#include <cmath>
#include <functional>

using namespace erasure;

namespace {

const RegisterLayout kQ{{"M", 2}};
const RegisterLayout kAB{{"M.A", 2}, {"M.B", 2}};

DensityMatrix plus() { return DensityMatrix(kQ, oracle::ket_projector({1, 1})); }
DensityMatrix bell() { return DensityMatrix(kAB, oracle::ket_projector({1, 0, 0, 1})); }

CMatrix pauli_x() { return CMatrix{{0, 1}, {1, 0}}; }
CMatrix pauli_z() { return CMatrix{{1, 0}, {0, -1}}; }

FreeSetPtr z2_asymmetry() { return make_asymmetry({CMatrix::Identity(2, 2), pauli_z()}); }
FreeSetPtr qubit_gibbs() { return make_gibbs(CMatrix{{0, 0}, {0, 1}}, 1.0); }

/// A family together with the single-factor layouts its samples live on.
struct Case {
  std::string label;
  FreeSetPtr family;
  RegisterLayout a;
  RegisterLayout b;
};

std::vector<Case> shipped_families() {
  const RegisterLayout qa{{"X", 2}};
  const RegisterLayout qb{{"Y", 2}};
  return {
      {"coherence", make_coherence(), qa, qb},
      {"uniformity", make_uniformity(), qa, qb},
      {"gibbs", qubit_gibbs(), qa, qb},
      {"asymmetry", z2_asymmetry(), qa, qb},
      {"separable", make_separable(), RegisterLayout{{"X.A", 2}}, RegisterLayout{{"X.B", 2}}},
      {"shared-randomness", make_shared_randomness(make_coherence()), RegisterLayout{{"J1.A", 2}, {"J1.B", 2}, {"X", 2}},
       RegisterLayout{{"J2.A", 2}, {"J2.B", 2}, {"Y", 2}}},
  };
}

}  // namespace

TEST_SUITE("membership") {
  TEST_CASE("maximally mixed randomness register is free in every family") {
    const RegisterLayout j{{"J", 3}};
    for (const auto& c : shipped_families()) {
      CAPTURE(c.label);
      CHECK(membership(*c.family, DensityMatrix::maximally_mixed(j)));
    }
  }

  TEST_CASE("maximally mixed state on system registers") {
    for (const auto& fam : {make_coherence(), make_uniformity(), z2_asymmetry(), make_separable()}) {
      CHECK(membership(*fam, DensityMatrix::maximally_mixed(kAB)));
    }
    // a Gibbs family at infinite temperature is the uniformity family
    CHECK(membership(*make_gibbs(CMatrix{{0, 0}, {0, 1}}, 0.0), DensityMatrix::maximally_mixed(kAB)));
    CHECK_FALSE(membership(*qubit_gibbs(), DensityMatrix::maximally_mixed(kQ)));
  }

  TEST_CASE("plus state has coherence") { CHECK_FALSE(membership(*make_coherence(), plus())); }

  TEST_CASE("bell state is entangled") {
    const CMatrix pt = oracle::transpose_second(bell().matrix(), 2, 2);
    Eigen::ComplexEigenSolver<CMatrix> es(pt);
    double lo = 1;
    for (int i = 0; i < 4; ++i) lo = std::min(lo, es.eigenvalues()(i).real());
    CHECK(lo == doctest::Approx(-0.5));
    CHECK_FALSE(membership(*make_separable(), bell()));
  }

  TEST_CASE("coherence in a rotated basis") {
    const CMatrix h = CMatrix{{1, 1}, {1, -1}} / std::sqrt(2.0);
    const auto fam = make_coherence(h);
    CHECK(membership(*fam, plus()));
    CHECK_FALSE(membership(*fam, DensityMatrix::basis_state(kQ, 0)));
  }

  TEST_CASE("gibbs state uses base-2 exponentials") {
    const auto tau = qubit_gibbs()->canonical_state(kQ);
    CHECK(tau.matrix()(0, 0).real() == doctest::Approx(1.0 / 1.5));
    CHECK(tau.matrix()(1, 1).real() == doctest::Approx(0.5 / 1.5));
    CHECK(membership(*qubit_gibbs(), tau));
  }

  TEST_CASE("asymmetry under the phase flip") {
    CHECK(membership(*z2_asymmetry(), DensityMatrix::basis_state(kQ, 1)));
    CHECK_FALSE(membership(*z2_asymmetry(), plus()));
  }

  TEST_CASE("shared randomness state") {
    for (int ell : {2, 3, 5}) {
      const SharedRandomnessState srs{ell, 2};
      const auto s = srs.state();
      CHECK(s.layout().labels() == std::vector<std::string>{"J.A", "J.B"});
      for (const auto& gone : {"J.A", "J.B"}) {
        const auto marginal = partial_trace(s, {gone});
        CHECK(oracle::max_abs_diff(marginal.matrix(), DensityMatrix::maximally_mixed(marginal.layout()).matrix()) <
              1e-14);
      }
      CHECK(is_classical_on(s, "J.A"));
      CHECK(is_classical_on(s, "J.B"));
      const auto fam = make_shared_randomness(make_separable());
      CHECK(membership(*fam, s));
      // independent uniform bits are not shared randomness
      CHECK_FALSE(membership(*fam, DensityMatrix::maximally_mixed(s.layout())));
    }
    const auto three = SharedRandomnessState{2, 3}.state();
    CHECK(three.matrix()(0, 0).real() == doctest::Approx(0.5));
    CHECK(three.matrix()(7, 7).real() == doctest::Approx(0.5));
  }

  TEST_CASE("layout checks") {
    CHECK_THROWS_AS(membership(*qubit_gibbs(), DensityMatrix::maximally_mixed(RegisterLayout{{"M", 3}})), LayoutError);
    CHECK_THROWS_AS(membership(*z2_asymmetry(), DensityMatrix::maximally_mixed(RegisterLayout{{"M", 3}})),
                    LayoutError);
    const RegisterLayout big{{"M.A", 2}, {"M.B", 4}};
    CHECK_THROWS_AS(membership(*make_separable(), DensityMatrix::maximally_mixed(big)), UnsupportedError);
  }

  TEST_CASE("unsupported families") {
    CHECK_THROWS_AS(make_free_set("contextuality"), UnsupportedError);
    CHECK_THROWS_AS(make_free_set("stabilizer"), UnsupportedError);
    CHECK_THROWS_AS(make_free_set("magic"), DomainError);
    CHECK(make_free_set("separable-2qubit")->kind() == FamilyKind::Separable);
  }
}

TEST_SUITE("free set axioms") {
  TEST_CASE("convexity, tensor and trace closure on sampled members") {
    for (const auto& c : shipped_families()) {
      CAPTURE(c.label);
      Rng rng(17);
      for (int trial = 0; trial < 100; ++trial) {
        const auto s1 = c.family->sample(c.a, rng);
        const auto s2 = c.family->sample(c.a, rng);
        const auto t = c.family->sample(c.b, rng);
        REQUIRE(membership(*c.family, s1));
        const double w = std::uniform_real_distribution<double>(0, 1)(rng);
        const DensityMatrix mix(c.a, w * s1.matrix() + (1 - w) * s2.matrix());
        CHECK(membership(*c.family, mix));
        const auto joint = tensor(s1, t);
        CHECK(membership(*c.family, joint));
        const auto b_list = c.b.labels();
        const std::set<std::string> b_labels(b_list.begin(), b_list.end());
        const auto back = partial_trace(joint, b_labels);
        CHECK(membership(*c.family, back));
        // trace closure on a sample of the joint layout itself
        const auto joint_sample = c.family->sample(c.a.concat(c.b), rng);
        CHECK(membership(*c.family, partial_trace(joint_sample, b_labels)));
      }
    }
  }

  TEST_CASE("membership is invariant under swapping identical factors") {
    const RegisterLayout two{{"X", 2}, {"Y", 2}};
    for (const auto& fam : {make_coherence(), make_uniformity(), qubit_gibbs(), z2_asymmetry()}) {
      Rng rng(5);
      for (int trial = 0; trial < 20; ++trial) {
        const auto s = trial % 2 ? fam->sample(two, rng) : random_state(two, rng);
        const auto swapped = permute_registers(s, {1, 0}).relabeled(two);
        CHECK(membership(*fam, s) == membership(*fam, swapped));
      }
    }
  }

  TEST_CASE("projection lands in the family") {
    for (const auto& c : shipped_families()) {
      CAPTURE(c.label);
      Rng rng(23);
      for (int trial = 0; trial < 10; ++trial) {
        const auto r = random_state(c.a, rng);
        CHECK(membership(*c.family, c.family->project(c.a, r.matrix())));
      }
    }
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      CHECK(membership(*make_separable(), make_separable()->project(kAB, random_state(kAB, rng).matrix())));
    }
  }
}

TEST_SUITE("closest free state") {
  TEST_CASE("coherence of plus is one bit at the maximally mixed state") {
    const auto r = closest_free_relent(*make_coherence(), plus());
    CHECK(r.estimate.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle::max_abs_diff(r.sigma.matrix(), DensityMatrix::maximally_mixed(kQ).matrix()) < 1e-12);
    // grid over diagonal qubit states: -<+|log2 diag(s,1-s)|+> is smallest at s = 1/2
    double best = 1e9, arg = 0;
    for (int i = 1; i < 10000; ++i) {
      const double s = i / 10000.0;
      const double d = -0.5 * std::log2(s) - 0.5 * std::log2(1 - s);
      if (d < best) best = d, arg = s;
    }
    CHECK(best == doctest::Approx(r.estimate.value).epsilon(1e-6));
    CHECK(arg == doctest::Approx(0.5));
  }

  TEST_CASE("uniformity of a pure qubit") {
    Rng rng(4);
    const auto r = closest_free_relent(*make_uniformity(), random_pure_state(kQ, rng));
    CHECK(r.estimate.value == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("coherence matches the pinching oracle") {
    Rng rng(9);
    const RegisterLayout l{{"M", 3}};
    for (int trial = 0; trial < 20; ++trial) {
      const auto r = random_state(l, rng);
      const CMatrix diag = r.matrix().diagonal().asDiagonal();
      const double expected = oracle::entropy_bits(diag) - oracle::entropy_bits(r.matrix());
      CHECK(closest_free_relent(*make_coherence(), r).estimate.value == doctest::Approx(expected).epsilon(1e-9));
    }
  }

  TEST_CASE("separable bell state needs one bit") {
    const auto r = closest_free_relent(*make_separable(), bell());
    CHECK(r.exact);
    CHECK(membership(*make_separable(), r.sigma));
    CHECK(r.estimate.value >= 1 - 1e-9);
    CHECK(r.estimate.value == doctest::Approx(1.0).epsilon(1e-4));
    // Bell-diagonal separable states have every weight <= 1/2; coarse then
    // refined grid over the weight on Phi+
    double best = 1e9, arg = 0;
    for (int i = 1; i <= 50; ++i) {
      const double w = i / 100.0;
      if (-std::log2(w) < best) best = -std::log2(w), arg = w;
    }
    for (int i = -100; i <= 100; ++i) {
      const double w = std::clamp(arg + i * 1e-4, 1e-6, 0.5);
      best = std::min(best, -std::log2(w));
    }
    CHECK(best == doctest::Approx(r.estimate.value).epsilon(1e-4));
  }

  TEST_CASE("members are their own closest state") {
    for (const auto& c : shipped_families()) {
      CAPTURE(c.label);
      Rng rng(31);
      for (int trial = 0; trial < 5; ++trial) {
        const auto s = c.family->sample(c.a.concat(c.b), rng);
        const auto r = closest_free_relent(*c.family, s);
        CHECK(r.estimate.value < 1e-6);
      }
    }
  }

  TEST_CASE("separable: E vanishes exactly on PPT states") {
    Rng rng(77);
    int members = 0, others = 0;
    for (int trial = 0; trial < 16; ++trial) {
      const auto r = random_state(kAB, rng, 1 + trial % 4);
      const bool member = membership(*make_separable(), r);
      const double e = closest_free_relent(*make_separable(), r).estimate.value;
      CAPTURE(e);
      if (member) {
        ++members;
        CHECK(e < 1e-6);
      } else {
        ++others;
        CHECK(e > 1e-6);
      }
    }
    CHECK(members > 0);
    CHECK(others > 0);
  }

  TEST_CASE("shared randomness splits over the correlated values") {
    const auto fam = make_shared_randomness(make_coherence());
    const RegisterLayout l{{"J.A", 2}, {"J.B", 2}, {"M", 2}};
    // (|00><00| (x) |+><+| + |11><11| (x) |0><0|) / 2: E = (1 + 0) / 2
    CMatrix m = CMatrix::Zero(8, 8);
    m.block(0, 0, 2, 2) = 0.5 * plus().matrix();
    m(6, 6) = 0.5;
    const auto r = closest_free_relent(*fam, DensityMatrix(l, m));
    CHECK(r.estimate.value == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(membership(*fam, r.sigma));
    // weight on |01> has no free counterpart
    CHECK(closest_free_relent(*fam, DensityMatrix::basis_state(l, 2)).estimate.is_infinite());
  }
}

TEST_SUITE("closest free state for smoothed max-relative entropy") {
  TEST_CASE("members give zero") {
    Rng rng(8);
    const auto s = make_coherence()->sample(kQ, rng);
    const auto r = closest_free_smooth_dmax(*make_coherence(), s, 0.1);
    CHECK(r.estimate.value == 0);
    CHECK(oracle::max_abs_diff(r.sigma.matrix(), s.matrix()) == 0);
  }

  TEST_CASE("uniformity at eps = 0 is D_max against I/d") {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
      const auto r = random_state(kQ, rng);
      const auto c = closest_free_smooth_dmax(*make_uniformity(), r, 0.0);
      const double expected = oracle::dmax_2x2(r.matrix(), CMatrix::Identity(2, 2) / 2.0);
      CHECK(c.estimate.value == doctest::Approx(expected).epsilon(1e-9));
    }
  }

  TEST_CASE("coherence of plus at eps = 0.1") {
    const double eps = 0.1;
    const auto c = closest_free_smooth_dmax(*make_coherence(), plus(), eps);
    CHECK(c.estimate.lower <= c.estimate.value + 1e-9);
    CHECK(c.estimate.value - c.estimate.lower < 0.05);
    // diagonal sigma grid x smoothing over states diagonal in the +/- basis
    double best = 1e9;
    const CMatrix pp = plus().matrix();
    const CMatrix mm = oracle::ket_projector({1, -1});
    for (int i = 1; i < 200; ++i) {
      const double s = i / 200.0;
      const CMatrix sigma = RVector{{s, 1 - s}}.cast<Complex>().asDiagonal();
      for (int k = 0; k <= 2000; ++k) {
        const double a = 0.95 + 0.05 * k / 2000.0;
        if (std::sqrt(a) < std::sqrt(1 - eps * eps) - 1e-15) continue;
        best = std::min(best, oracle::dmax_2x2(a * pp + (1 - a) * mm, sigma));
      }
    }
    CHECK(c.estimate.value == doctest::Approx(best).epsilon(2e-4));
    // round-off weight ~1e-16 outside the top eigenvector enters through a square root
    CHECK(c.estimate.lower == doctest::Approx(std::log2(1.98)).epsilon(1e-7));
    REQUIRE(c.estimate.certificate);
    CHECK(purified_distance(plus(), *c.estimate.certificate) <= eps + 1e-6);
    CHECK(dominance_check(*c.estimate.certificate, c.sigma, std::exp2(c.estimate.value)));
  }

  TEST_CASE("bell state against separable states") {
    const auto c = closest_free_smooth_dmax(*make_separable(), bell(), 0.0);
    CHECK(c.estimate.lower == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.estimate.value == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(membership(*make_separable(), c.sigma));
  }

  TEST_CASE("lower bound never exceeds the certified value") {
    Rng rng(41);
    for (const auto& fam : {make_coherence(), z2_asymmetry(), qubit_gibbs()}) {
      for (int trial = 0; trial < 4; ++trial) {
        const auto r = random_state(kQ, rng, 1 + trial % 2);
        const auto c = closest_free_smooth_dmax(*fam, r, 0.05);
        CHECK(c.estimate.lower <= c.estimate.value + 1e-9);
        CHECK(membership(*fam, c.sigma));
      }
    }
  }
}

TEST_SUITE("regularisation and constants") {
  TEST_CASE("uniformity is additive") {
    Rng rng(2);
    const auto r = random_state(kQ, rng);
    const auto seq = regularized_E(*make_uniformity(), r, 4);
    const double expected = 1.0 - oracle::entropy_bits(r.matrix());
    REQUIRE(seq.per_copy.size() == 4);
    for (const auto& e : seq.per_copy) CHECK(e.value == doctest::Approx(expected).epsilon(1e-9));
    CHECK(seq.additivity_checked);
    CHECK(seq.additivity_holds);
  }

  TEST_CASE("coherence of plus stays at one bit") {
    const auto seq = regularized_E(*make_coherence(), plus(), 3);
    for (const auto& e : seq.per_copy) CHECK(e.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(seq.additivity_holds);
  }

  TEST_CASE("bell sequence is nonincreasing and at least one") {
    const auto seq = regularized_E(*make_separable(), bell(), 2);
    REQUIRE(seq.per_copy.size() == 2);
    CHECK(seq.per_copy[0].value >= 1 - 1e-9);
    CHECK(seq.per_copy[1].value >= 1 - 1e-9);
    CHECK(seq.per_copy[1].value <= seq.per_copy[0].value + 1e-12);
    CHECK(seq.per_copy[1].value <= 1.2);
  }

  TEST_CASE("dimension budget") {
    CHECK_THROWS_AS(regularized_E(*make_coherence(), plus(), 13), DimensionError);
  }

  TEST_CASE("C(F) closed forms") {
    CHECK(c_constant(*make_uniformity(), kQ, 3) == doctest::Approx(1.0));
    // grid over diagonal qubit states of max |log2 p_i|
    double best = 1e9;
    for (int i = 1; i < 1000; ++i) {
      const double p = i / 1000.0;
      best = std::min(best, std::max(-std::log2(p), -std::log2(1 - p)));
    }
    CHECK(c_constant(*make_coherence(), kQ, 3) == doctest::Approx(best).epsilon(1e-9));
    const double bound = 1 + std::log2(1 + std::exp2(-1.0));
    const double c = c_constant(*qubit_gibbs(), kQ, 3);
    CHECK(c <= bound + 1e-12);
    const auto tau = qubit_gibbs()->canonical_state(kQ).matrix();
    CHECK(c == doctest::Approx(-std::log2(tau(1, 1).real())).epsilon(1e-12));
    CHECK(std::isinf(c_constant(*make_shared_randomness(make_coherence()), SharedRandomnessState{2, 2}.layout(), 2)));
  }
}

TEST_SUITE("randomness register structure") {
  TEST_CASE("identity blocks") {
    Rng rng(3);
    const auto fam = make_coherence();
    std::vector<DensityMatrix> samples;
    for (int i = 0; i < 10; ++i) samples.push_back(fam->sample(kQ, rng));
    const auto check = assumption1_structure_check(*fam, kQ, {CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)}, samples);
    CHECK(check.ok());
    CHECK(check.randomness_last);
  }

  TEST_CASE("permutation blocks preserve coherence-free states") {
    Rng rng(4);
    const auto fam = make_coherence();
    const RegisterLayout l{{"M", 3}};
    CMatrix cycle = CMatrix::Zero(3, 3);
    cycle(1, 0) = cycle(2, 1) = cycle(0, 2) = 1;
    std::vector<DensityMatrix> samples;
    for (int i = 0; i < 10; ++i) samples.push_back(fam->sample(l, rng));
    const auto check =
        assumption1_structure_check(*fam, l, {CMatrix::Identity(3, 3), cycle, CMatrix(cycle * cycle)}, samples);
    CHECK(check.ok());
    // the same blocks with a Hadamard-like block break freeness
    CMatrix f = CMatrix::Zero(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) f(a, b) = std::polar(1.0 / std::sqrt(3.0), 2 * M_PI * a * b / 3);
    CHECK_FALSE(assumption1_structure_check(*fam, l, {CMatrix::Identity(3, 3), f}, samples).ok());
  }

  TEST_CASE("a unitary mixing the control register is rejected") {
    const RegisterLayout l{{"M", 2}, {"J", 2}};
    // CNOT with M as control flips J: not of the form sum_j U_j (x) |j><j|_J
    const CMatrix cnot_m = CMatrix{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}};
    const auto check = assumption1_structure_check(*make_coherence(), UnitaryOp(l, cnot_m), {});
    CHECK_FALSE(check.block_form);
    CHECK_FALSE(check.ok());
    // J controlling a flip of M is block diagonal with blocks I and X
    const CMatrix cnot_j = CMatrix{{1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}, {0, 1, 0, 0}};
    const auto blocks = controlled_blocks(UnitaryOp(l, cnot_j), "J");
    REQUIRE(blocks);
    CHECK(oracle::max_abs_diff((*blocks)[0], CMatrix::Identity(2, 2)) == 0);
    CHECK(oracle::max_abs_diff((*blocks)[1], pauli_x()) == 0);
    CHECK_FALSE(controlled_blocks(UnitaryOp(l, cnot_j), "M"));
  }

  TEST_CASE("malformed blocks") {
    CHECK_THROWS(assumption1_structure_check(*make_coherence(), kQ, {CMatrix::Identity(3, 3)}, {}));
    CHECK_THROWS_AS(assumption1_structure_check(*make_coherence(), kQ, {CMatrix{{1, 1}, {0, 1}}}, {}), StateError);
  }
}

TEST_SUITE("continuity under a free set") {
  TEST_CASE("random qubit pairs obey the bound for coherence") {
    Rng rng(99);
    const auto fam = make_coherence();
    auto e_oracle = [](const DensityMatrix& r) {
      const CMatrix diag = r.matrix().diagonal().asDiagonal();
      return oracle::entropy_bits(diag) - oracle::entropy_bits(r.matrix());
    };
    for (int trial = 0; trial < 50; ++trial) {
      const auto r = random_state(kQ, rng);
      const auto tau = random_state(kQ, rng);
      const double t = 0.1 / std::max(trace_distance(r, tau), 1e-12);
      const DensityMatrix r2(kQ, (1 - std::min(t, 1.0)) * r.matrix() + std::min(t, 1.0) * tau.matrix());
      const double bound = continuity_bound(r, r2, *fam);
      CHECK(std::abs(e_oracle(r) - e_oracle(r2)) <= bound + 1e-9);
    }
    CHECK(continuity_bound(plus(), plus(), *fam) == 0);
  }
}
