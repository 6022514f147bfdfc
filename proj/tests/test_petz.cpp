#include <cmath>

#include "doctest.h"
#include "stmi/channel.hpp"
#include "stmi/core.hpp"
#include "stmi/petz.hpp"

using namespace stmi;

namespace {

// classical Markov chain A - B - C: rho = sum_b p_b rho_A^b (x) |b><b| (x) rho_C^b
DensityMatrix markov_chain_state(Rng& rng) {
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 2}, Factor{"C", 2}});
  Mat rho = Mat::Zero(8, 8);
  double p[2] = {0.6, 0.4};
  for (int b = 0; b < 2; ++b) {
    Mat ra = random_rho(2, 2, rng);
    Mat rc = random_rho(2, 2, rng);
    Mat eb = Mat::Zero(2, 2);
    eb(b, b) = 1.0;
    rho += p[b] * kron(ra, kron(eb, rc));
  }
  return DensityMatrix(sp, rho);
}

DensityMatrix ghz_state() {
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 2}, Factor{"C", 2}});
  Vec psi = Vec::Zero(8);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(7) = 1.0 / std::sqrt(2.0);
  return DensityMatrix(sp, psi * psi.adjoint());
}

}  // namespace

TEST_CASE("petz map recovers a markov chain") {
  Rng rng(71);
  DensityMatrix rho = markov_chain_state(rng);
  DensityMatrix rho_ab = partial_trace(rho, {"A", "B"});
  DensityMatrix rho_b = partial_trace(rho, {"B"});
  DensityMatrix rho_bc = partial_trace(rho, {"B", "C"});
  PetzResult rec = petz_map(rho_ab, rho_b, rho_bc);
  CHECK(rec.leaked_mass < 1e-12);
  CHECK(rec.state.space().labels() ==
        std::vector<std::string>{"A", "B", "C"});
  CHECK(trace_distance(rec.state.data(), rho.data()) < 1e-10);
}

TEST_CASE("petz map flags marginal mismatch") {
  Rng rng(72);
  DensityMatrix rho = markov_chain_state(rng);
  DensityMatrix rho_ab = partial_trace(rho, {"A", "B"});
  DensityMatrix rho_bc = partial_trace(rho, {"B", "C"});
  // the chain's B marginal is diag(0.6, 0.4); hand in something else
  Mat wrong = Mat::Zero(2, 2);
  wrong(0, 0) = 0.5;
  wrong(1, 1) = 0.5;
  DensityMatrix rho_b(TensorSpace::single("B", 2), wrong);
  CHECK_THROWS_AS(petz_map(rho_ab, rho_b, rho_bc), Error);
}

TEST_CASE("conditional mutual information closed cases") {
  CHECK(conditional_mutual_information(ghz_state(), {"A"}, {"C"}, {"B"}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-10));

  Rng rng(73);
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 2}, Factor{"C", 2}});
  Mat prod = kron(random_rho(2, 2, rng),
                  kron(random_rho(2, 2, rng), random_rho(2, 2, rng)));
  DensityMatrix rho(sp, prod);
  CHECK(std::abs(conditional_mutual_information(rho, {"A"}, {"C"}, {"B"})) <
        1e-10);

  CHECK_THROWS_AS(
      conditional_mutual_information(rho, {"A"}, {"A"}, {"B"}), Error);
}

TEST_CASE("mirror operator reduces to o_b without c") {
  Rng rng(74);
  Mat rb = random_rho(2, 2, rng);
  DensityMatrix rho_b =
      DensityMatrix::unchecked(TensorSpace::single("B", 2), rb);
  // trivial C: rho_BC0 = rho_B0 on the same factor set
  HermitianObservable ob(TensorSpace::single("B", 2), random_hermitian(2, rng));
  HermitianObservable m = mirror_operator(rho_b, rho_b, ob);
  CHECK((m.data - ob.data).norm() < 1e-10);
}

TEST_CASE("markov check on a causally decoupled block") {
  Rng rng(75);
  // C rides along untouched: U = u_A (x) Id_C, so J(A:BC) = J(A:B)
  TensorSpace sp({Factor{"A", 2}, Factor{"C", 2}});
  Mat ra = random_rho(2, 2, rng);
  Mat rc = random_rho(2, 2, rng);
  DensityMatrix rho_in(sp, kron(ra, rc));
  Mat u = kron(random_unitary(2, rng), Mat::Identity(2, 2));
  KrausChannel ch = unitary_channel(u, sp);
  OptimizerConfig oc;
  oc.restarts = 4;
  oc.max_iters = 3000;
  oc.seed = 11;
  MarkovReport rep = markov_check(rho_in, ch, "A", {"A"}, {"C"}, oc);
  CHECK(rep.converged_ab);
  CHECK(rep.converged_abc);
  CHECK(!rep.divergent);
  CHECK(rep.markov);
  CHECK(std::abs(rep.j_abc - rep.j_ab) < 1e-3);
  CHECK(rep.petz_reconstruction_error < 1e-6);
  CHECK(rep.mirror_operator_check < 1e-6);
  CHECK(rep.untraced_value <= rep.j_abc + 1e-6);
}
