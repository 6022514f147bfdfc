#include <cmath>

#include "doctest.h"
#include "stmi/ansatz.hpp"
#include "stmi/channel.hpp"
#include "stmi/core.hpp"
#include "stmi/optimizer.hpp"

using namespace stmi;

namespace {

DensityMatrix qubit_state(const Mat& m) {
  return DensityMatrix::unchecked(TensorSpace::single("A", 2), m);
}

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("coupling isometries") {
  Rng rng(11);
  IsometryCoupling id = identity_embedding(2, 4);
  CHECK((id.v.adjoint() * id.v - Mat::Identity(2, 2)).norm() < 1e-13);
  CHECK(id.d_a() == 2);
  CHECK(id.d_w() == 4);

  IsometryCoupling r = random_isometry(3, 5, rng);
  CHECK((r.v.adjoint() * r.v - Mat::Identity(3, 3)).norm() < 1e-12);

  CHECK_THROWS_AS(IsometryCoupling::make(TensorSpace::single("A", 2),
                                         TensorSpace({Factor{"A", 2},
                                                      Factor{"W", 2}}),
                                         0.5 * Mat::Identity(4, 2)),
                  Error);
}

TEST_CASE("swap coupling feeds the ancilla marginal") {
  Rng rng(12);
  Mat rw = random_rho(2, 2, rng);
  DensityMatrix rho_w =
      DensityMatrix::unchecked(TensorSpace::single("W", 2), rw);
  IsometryCoupling v = swap_coupling_from_rho_w(rho_w);
  CHECK((v.v.adjoint() * v.v - Mat::Identity(2, 2)).norm() < 1e-12);
  CHECK(v.out_space.labels() ==
        std::vector<std::string>{"A", "W1", "W2"});

  DensityMatrix rho_in = qubit_state(random_rho(2, 2, rng));
  KrausChannel id = identity_channel(TensorSpace::single("A", 2));
  DensityMatrix bw = connected_state(rho_in, v, id, {"A"});
  Mat fed = partial_trace(bw.data(), {2, 4}, {0});
  CHECK((fed - rw).norm() < 1e-12);

  IsometryCoupling sd = superdensity_coupling(2);
  DensityMatrix bw2 = connected_state(rho_in, sd, id, {"A"});
  Mat fed2 = partial_trace(bw2.data(), {2, 4}, {0});
  CHECK((fed2 - 0.5 * Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("identity embedding scores zero") {
  Rng rng(13);
  DensityMatrix rho_in = qubit_state(random_rho(2, 2, rng));
  KrausChannel ch = depolarizing(0.3);
  CouplingValue cv =
      evaluate_coupling(rho_in, identity_embedding(2, 4), ch, {"A"});
  CHECK(!cv.objective.support_violation);
  CHECK(std::abs(cv.objective.value) < 1e-10);
  CHECK(std::abs(cv.mi_term) < 1e-10);
  CHECK(std::abs(cv.relent_term) < 1e-10);
}

TEST_CASE("objective decomposes into mi and relative entropy") {
  Rng rng(14);
  TensorSpace sp({Factor{"A", 2}, Factor{"Ab", 2}});
  DensityMatrix rho_in(sp, random_rho(4, 3, rng));
  KrausChannel ch = tensor(dephasing(0.4, "A"), depolarizing(0.2, "Ab"));
  IsometryCoupling v = random_isometry(2, 4, rng);
  CouplingValue cv = evaluate_coupling(rho_in, v, ch, {"A", "Ab"});
  CHECK(!cv.objective.support_violation);
  CHECK(cv.objective.value ==
        doctest::Approx(cv.mi_term + cv.relent_term).epsilon(1e-9));
  CHECK(cv.mi_term >= -1e-12);
  CHECK(cv.relent_term >= -1e-12);
}

TEST_CASE("gradient matches finite differences") {
  Rng rng(15);
  TensorSpace sp({Factor{"A", 2}, Factor{"Ab", 2}});
  DensityMatrix rho_in(sp, random_rho(4, 4, rng));
  KrausChannel ch = tensor(dephasing(0.4, "A"), depolarizing(0.2, "Ab"));
  IsometryCoupling v = random_isometry(2, 4, rng);
  HermitianObservable m = gradient(rho_in, v, ch, {"A", "Ab"});

  double eps = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    Mat t = random_hermitian(8, rng);
    auto value_at = [&](double e) {
      Mat vv = exp_i(-e * t) * v.v;
      IsometryCoupling vc =
          IsometryCoupling::make(v.in_space, v.out_space, vv);
      return objective(rho_in, vc, ch, {"A", "Ab"}).value;
    };
    double fd = (value_at(eps) - value_at(-eps)) / (2.0 * eps);
    double an = trace_prod(t, m.data).real();
    CHECK(std::abs(fd - an) / std::max(std::abs(an), 1e-9) < 1e-4);
  }
}

TEST_CASE("unitary evolution reaches the closed form") {
  Rng rng(16);
  DensityMatrix rho_in = qubit_state(diag2(0.9, 0.1));
  KrausChannel ch =
      unitary_channel(random_unitary(2, rng), TensorSpace::single("A", 2));
  OptimizerConfig oc;
  oc.restarts = 3;
  oc.max_iters = 2500;
  oc.seed = 21;
  StmiResult res = optimize_j1(rho_in, ch, {"A"}, oc);
  CHECK(res.converged);
  CHECK(!res.divergent);
  CHECK(std::abs(res.value - 2.407945608652) < 1e-3);
  CHECK(std::abs(res.value - (res.mi_term + res.relent_term)) < 1e-6);
}

TEST_CASE("spacelike value equals the mutual information") {
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 2}});
  KrausChannel id = identity_channel(sp);
  OptimizerConfig oc;
  oc.restarts = 8;
  oc.max_iters = 5000;
  oc.seed = 3;

  SUBCASE("epr pair") {
    Vec psi = Vec::Zero(4);
    psi(0) = 1.0 / std::sqrt(2.0);
    psi(3) = 1.0 / std::sqrt(2.0);
    DensityMatrix rho(sp, psi * psi.adjoint());
    StmiResult res = optimize_j1(rho, id, {"B"}, oc);
    CHECK(res.converged);
    CHECK(std::abs(res.value - 2.0 * std::log(2.0)) < 1e-3);
  }

  SUBCASE("random mixed state") {
    DensityMatrix rho = random_density_matrix(sp, 41, 4);
    StmiResult res = optimize_j1(rho, id, {"B"}, oc);
    double mi = mutual_information(rho, {"A"}, {"B"});
    CHECK(res.converged);
    CHECK(std::abs(res.value - mi) < 1e-3);
  }
}

TEST_CASE("divergence probe and divergent optimization") {
  DensityMatrix pure = qubit_state(diag2(1.0, 0.0));
  KrausChannel deph = dephasing(0.5);
  CHECK(divergence_probe(pure, deph, {"A"}));

  Rng rng(17);
  DensityMatrix mixed = qubit_state(random_rho(2, 2, rng));
  CHECK(!divergence_probe(mixed, deph, {"A"}));

  OptimizerConfig oc;
  oc.restarts = 2;
  oc.max_iters = 500;
  StmiResult res = optimize_j1(pure, deph, {"A"}, oc);
  CHECK(res.divergent);
  CHECK(res.converged);
  CHECK(std::isinf(res.value));
  CHECK(std::isinf(res.relent_term));
  CHECK(std::isfinite(res.mi_term));
}

TEST_CASE("converged fixed point is variationally stationary") {
  DensityMatrix rho_in = qubit_state(diag2(0.7, 0.3));
  KrausChannel ch = depolarizing(0.4);
  FixedPointResult fp = fixed_point_solve(ch, rho_in);
  REQUIRE(fp.converged);
  REQUIRE(!fp.objective.support_violation);

  IsometryCoupling v = swap_coupling_from_rho_w(fp.state.rho_w);
  CouplingValue cv = evaluate_coupling(rho_in, v, ch, {"A"});
  CHECK(std::abs(cv.objective.value - fp.objective.value) < 1e-8);
  HermitianObservable m = gradient(rho_in, v, ch, {"A"});
  CHECK(m.data.norm() < 1e-7);
}

TEST_CASE("optimizer is deterministic for a fixed seed") {
  Rng rng(18);
  DensityMatrix rho_in = qubit_state(random_rho(2, 2, rng));
  KrausChannel ch = compose(depolarizing(0.35),
                            unitary_channel(random_unitary(2, rng),
                                            TensorSpace::single("A", 2)));
  OptimizerConfig oc;
  oc.restarts = 3;
  oc.max_iters = 800;
  oc.seed = 9;
  StmiResult a = optimize_j1(rho_in, ch, {"A"}, oc);
  StmiResult b = optimize_j1(rho_in, ch, {"A"}, oc);
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
  CHECK(a.grad_norm == b.grad_norm);
}

TEST_CASE("doubled stationarity check") {
  SUBCASE("optimum passes") {
    Rng rng(19);
    Vec psi = rng.cgauss(2, 1);
    psi /= psi.norm();
    DensityMatrix rho_in = qubit_state(psi * psi.adjoint());
    KrausChannel ch = compose(depolarizing(0.5),
                              unitary_channel(random_unitary(2, rng),
                                              TensorSpace::single("A", 2)));
    OptimizerConfig oc;
    oc.restarts = 6;
    oc.max_iters = 4000;
    oc.seed = 5;
    StmiResult res = optimize_j1(rho_in, ch, {"A"}, oc);
    REQUIRE(res.converged);
    StationarityN2 n2 = stationarity_check_n2(rho_in, ch, {"A"}, res.coupling);
    CHECK(std::abs(n2.j1 - res.value) < 1e-9);
    CHECK(std::abs(n2.objective_half - res.value) < 1e-6);
    CHECK(n2.grad_norm < 1e-5);
  }

  SUBCASE("oversized problem is rejected") {
    TensorSpace sp({Factor{"A", 2}, Factor{"B", 2}});
    DensityMatrix rho = random_density_matrix(sp, 7, 4);
    KrausChannel id = identity_channel(sp);
    IsometryCoupling v = identity_embedding(2, 32);
    CHECK_THROWS_AS(stationarity_check_n2(rho, id, {"B"}, v), Error);
  }
}
