#include <cmath>

#include "doctest.h"
#include "stmi/classical.hpp"
#include "stmi/core.hpp"

using namespace stmi;

namespace {

Distribution dist2(const std::string& label, double p0, double p1) {
  RVec v(2);
  v << p0, p1;
  return Distribution(TensorSpace::single(label, 2), v);
}

StochasticMap identity_map(const std::string& label, int n) {
  return StochasticMap::make(TensorSpace::single(label, n),
                             TensorSpace::single("B", n),
                             RMat::Identity(n, n));
}

RMat random_stochastic(int rows, int cols, Rng& rng) {
  RMat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < rows; ++i) {
      m(i, j) = -std::log(1.0 - rng.uniform());
      s += m(i, j);
    }
    m.col(j) /= s;
  }
  return m;
}

}  // namespace

TEST_CASE("distribution and map validation") {
  RVec bad(2);
  bad << 0.7, 0.7;
  CHECK_THROWS_AS(Distribution(TensorSpace::single("A", 2), bad), Error);
  RVec neg(2);
  neg << 1.2, -0.2;
  CHECK_THROWS_AS(Distribution(TensorSpace::single("A", 2), neg), Error);

  RMat notstoch = RMat::Identity(2, 2);
  notstoch(0, 0) = 0.5;
  CHECK_THROWS_AS(StochasticMap::make(TensorSpace::single("A", 2),
                                      TensorSpace::single("B", 2), notstoch),
                  Error);
  RMat negm(2, 2);
  negm << 1.5, 0.0, -0.5, 1.0;
  CHECK_THROWS_AS(StochasticMap::make(TensorSpace::single("A", 2),
                                      TensorSpace::single("B", 2), negm),
                  Error);
}

TEST_CASE("marginal, apply, kl closed forms") {
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 2}});
  RVec joint(4);
  joint << 0.4, 0.1, 0.2, 0.3;  // P(a,b), a most significant
  Distribution p(sp, joint);
  Distribution pa = marginal(p, {"A"});
  CHECK(pa.probs()(0) == doctest::Approx(0.5));
  CHECK(pa.probs()(1) == doctest::Approx(0.5));
  Distribution pb = marginal(p, {"B"});
  CHECK(pb.probs()(0) == doctest::Approx(0.6));

  Rng rng(81);
  StochasticMap m = StochasticMap::make(TensorSpace::single("A", 2),
                                        TensorSpace::single("B", 3),
                                        random_stochastic(3, 2, rng));
  Distribution out = apply(m, dist2("A", 0.3, 0.7));
  CHECK(out.dim() == 3);
  CHECK(std::abs(out.probs().sum() - 1.0) < 1e-12);
  CHECK(out.probs()(1) == doctest::Approx(0.3 * m.matrix(1, 0) +
                                          0.7 * m.matrix(1, 1)));

  Distribution q = dist2("A", 0.9, 0.1);
  Distribution r = dist2("A", 0.5, 0.5);
  double expect = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  CHECK(kl_divergence(r, q) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(kl_divergence(q, q) == doctest::Approx(0.0));
  // support violation diverges
  Distribution pure = dist2("A", 1.0, 0.0);
  CHECK(std::isinf(kl_divergence(r, pure)));
}

TEST_CASE("identity map optimum is the min-probability log") {
  Distribution p = dist2("A", 0.7, 0.3);
  ClassicalStmiResult res = classical_stmi(p, identity_map("A", 2));
  CHECK(!res.divergent);
  CHECK(!res.routes_disagree);
  CHECK(res.value == doctest::Approx(-std::log(0.3)).epsilon(1e-9));
  CHECK(res.value ==
        doctest::Approx(res.mi_term + res.relent_term).epsilon(1e-9));
  CHECK(res.factorized_input);
}

TEST_CASE("divergent classical instance") {
  Distribution p = dist2("A", 1.0, 0.0);
  ClassicalStmiResult res = classical_stmi(p, identity_map("A", 2));
  CHECK(res.divergent);
  CHECK(std::isinf(res.value));
}

TEST_CASE("value decomposition on random instances") {
  for (int i = 0; i < 5; ++i) {
    Rng rng(900 + i);
    RVec pv(3);
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      pv(k) = rng.uniform(0.05, 1.0);
      s += pv(k);
    }
    pv /= s;
    Distribution p(TensorSpace::single("A", 3), pv);
    StochasticMap m = StochasticMap::make(TensorSpace::single("A", 3),
                                          TensorSpace::single("B", 3),
                                          random_stochastic(3, 3, rng));
    ClassicalStmiResult res = classical_stmi(p, m);
    CHECK(!res.divergent);
    CHECK(!res.routes_disagree);
    CHECK(std::abs(res.value - (res.mi_term + res.relent_term)) < 1e-10);
    CHECK(std::abs(res.reduced_value - res.value) < 1e-12);
    CHECK(res.ascent_value <= res.value + 1e-6);
  }
}

TEST_CASE("classical bounds hold on random instances") {
  for (int i = 0; i < 20; ++i) {
    Rng rng(1000 + i);
    RVec pv(2);
    pv(0) = rng.uniform(0.1, 0.9);
    pv(1) = 1.0 - pv(0);
    Distribution p(TensorSpace::single("A", 2), pv);
    StochasticMap m = StochasticMap::make(TensorSpace::single("A", 2),
                                          TensorSpace::single("B", 3),
                                          random_stochastic(3, 2, rng));
    RMat n_a = random_stochastic(2, 2, rng) - RMat::Identity(2, 2);
    RVec o_b(3), o_a(2);
    for (int k = 0; k < 3; ++k) o_b(k) = rng.gauss();
    for (int k = 0; k < 2; ++k) o_a(k) = rng.gauss();
    ClassicalBoundsReport rep = verify_classical_bounds(p, m, n_a, o_b, o_a);
    CHECK(rep.ok);
    CHECK(rep.margin_response >= -1e-9);
    CHECK(rep.margin_correlation >= -1e-9);
    CHECK(rep.j_value >= rep.coupling_value - 1e-9);
    CHECK(rep.j_value >= rep.copy_mi - 1e-9);
  }
}

TEST_CASE("record coupling has no hidden correlations") {
  for (int i = 0; i < 10; ++i) {
    Rng rng(1100 + i);
    RVec pv(2);
    pv(0) = rng.uniform(0.1, 0.9);
    pv(1) = 1.0 - pv(0);
    Distribution p(TensorSpace::single("A", 2), pv);
    StochasticMap m = StochasticMap::make(TensorSpace::single("A", 2),
                                          TensorSpace::single("B", 2),
                                          random_stochastic(2, 2, rng));
    // general coupling K(q, w | i): feed a random symbol, record in W
    int nw = 3;
    TensorSpace kout({Factor{"A", 2}, Factor{"Wg", nw}});
    StochasticMap k = StochasticMap::make(
        TensorSpace::single("A", 2), kout,
        random_stochastic(2 * nw, 2, rng));
    double cmi = coupling_record_cmi(p, m, k);
    CHECK(cmi < 1e-12);
    CHECK(cmi > -1e-12);
  }
}
