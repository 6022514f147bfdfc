#include <cmath>

#include "doctest.h"
#include "stmi/bounds.hpp"
#include "stmi/channel.hpp"
#include "stmi/core.hpp"

using namespace stmi;

namespace {

DensityMatrix qubit_state(const Mat& m) {
  return DensityMatrix::unchecked(TensorSpace::single("A", 2), m);
}

HermitianObservable qubit_obs(const Mat& m) {
  return HermitianObservable(TensorSpace::single("A", 2), m);
}

}  // namespace

TEST_CASE("control coupling structure") {
  Rng rng(51);
  HermitianObservable o_a = qubit_obs(random_hermitian(2, rng));
  ControlCoupling cc = ControlCoupling::make(o_a);
  CHECK(cc.norm_a == doctest::Approx(operator_norm(o_a.data)).epsilon(1e-12));

  Mat sum = Mat::Zero(2, 2);
  for (const Mat& x : cc.x_ops) sum += x.adjoint() * x;
  CHECK((sum - Mat::Identity(2, 2)).norm() < 1e-12);

  IsometryCoupling v = cc.coupling();
  CHECK(v.d_w() == 3);
  CHECK((v.v.adjoint() * v.v - Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("correlators in a frozen case") {
  DensityMatrix rho = qubit_state((Mat(2, 2) << 1, 0, 0, 0).finished());
  KrausChannel id = identity_channel(TensorSpace::single("A", 2));
  HermitianObservable oa = qubit_obs(pauli_y());
  HermitianObservable ob = qubit_obs(pauli_x());
  CHECK(retarded_correlator(rho, id, oa, ob) == doctest::Approx(2.0));
  CHECK(symmetric_connected_correlator(rho, id, oa, ob) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("correlator bound holds on random instances") {
  for (int i = 0; i < 5; ++i) {
    Rng rng(400 + i);
    DensityMatrix rho = qubit_state(random_rho(2, 2, rng));
    Mat u = random_unitary(4, rng);
    TensorSpace us({Factor{"A", 2}, Factor{"E", 2}});
    DensityMatrix env = DensityMatrix::unchecked(
        TensorSpace::single("E", 2), 0.5 * Mat::Identity(2, 2));
    KrausChannel ch = channel_from_unitary(u, us, env, {"A"});
    HermitianObservable oa = qubit_obs(random_hermitian(2, rng));
    HermitianObservable ob = qubit_obs(random_hermitian(2, rng));

    Theorem1Report rep = verify_theorem1(rho, ch, oa, ob);
    CHECK(rep.ok);
    CHECK(rep.margin_retarded >= -1e-6);
    CHECK(rep.margin_symmetric >= -1e-6);
    CHECK(rep.margin_mi >= -1e-6);
    CHECK(std::abs(rep.trace_y_value - rep.trace_y_expected) < 1e-10);
    CHECK(std::abs(rep.trace_x_value - rep.trace_x_expected) < 1e-10);
    CHECK(std::abs(rep.disconnected_y) < 1e-12);
  }
}

TEST_CASE("correlator bound with an external estimate") {
  Rng rng(52);
  DensityMatrix rho = qubit_state(random_rho(2, 2, rng));
  KrausChannel ch = dephasing(0.3);
  HermitianObservable oa = qubit_obs(random_hermitian(2, rng));
  HermitianObservable ob = qubit_obs(random_hermitian(2, rng));
  Theorem1Report rep = verify_theorem1(rho, ch, oa, ob, 10.0);
  CHECK(rep.has_estimate);
  CHECK(rep.j_estimate == doctest::Approx(10.0));
  CHECK(rep.margin_estimate_retarded >= -1e-6);
  CHECK(rep.margin_estimate_symmetric >= -1e-6);
}

TEST_CASE("superdensity two point identity") {
  for (int i = 0; i < 5; ++i) {
    Rng rng(500 + i);
    DensityMatrix rho = qubit_state(random_rho(2, 2, rng));
    Mat u = random_unitary(4, rng);
    TensorSpace us({Factor{"A", 2}, Factor{"E", 2}});
    DensityMatrix env = DensityMatrix::unchecked(
        TensorSpace::single("E", 2), 0.5 * Mat::Identity(2, 2));
    KrausChannel ch = channel_from_unitary(u, us, env, {"A"});
    Mat a = random_hermitian(2, rng);
    a -= 0.5 * a.trace() * Mat::Identity(2, 2);
    HermitianObservable oa = qubit_obs(a);
    HermitianObservable ob = qubit_obs(random_hermitian(2, rng));

    SuperdensityReport rep = superdensity_bound(rho, ch, oa, ob);
    CHECK(rep.ok);
    CHECK(std::abs(rep.two_point_connected - rep.two_point_expected) < 1e-10);
    CHECK(rep.norm_w <= 2.0 * rep.norm_a + 1e-9);
    CHECK(rep.margin_j >= -1e-6);
    CHECK(rep.margin_mi >= -1e-6);
  }
}

TEST_CASE("causal influence vanishes without causation") {
  Rng rng(53);
  DensityMatrix rho = qubit_state(random_rho(2, 2, rng));
  KrausChannel id = identity_channel(TensorSpace::single("A", 2));
  HermitianObservable ob = qubit_obs(random_hermitian(2, rng));
  // unitary kick commuting with the identity evolution observable chain:
  // kicking with the observable itself leaves <O_B> unchanged
  Mat u = exp_i(0.7 * ob.data);
  CausalInfluenceReport rep = causal_influence_bound(rho, id, ob, u);
  CHECK(std::abs(rep.influence) < 1e-10);
  CHECK(rep.bound <= 1e-12);
  CHECK(rep.ok);
}

TEST_CASE("causal influence bound on random instances") {
  for (int i = 0; i < 5; ++i) {
    Rng rng(600 + i);
    DensityMatrix rho = qubit_state(random_rho(2, 2, rng));
    Mat u4 = random_unitary(4, rng);
    TensorSpace us({Factor{"A", 2}, Factor{"E", 2}});
    DensityMatrix env = DensityMatrix::unchecked(
        TensorSpace::single("E", 2), 0.5 * Mat::Identity(2, 2));
    KrausChannel ch = channel_from_unitary(u4, us, env, {"A"});
    HermitianObservable ob = qubit_obs(random_hermitian(2, rng));
    Mat u_a = random_unitary(2, rng);
    CausalInfluenceReport rep = causal_influence_bound(rho, ch, ob, u_a);
    CHECK(rep.ok);
    CHECK(rep.margin >= -1e-6);
    CHECK(std::abs(rep.two_point_connected - rep.influence / 4.0) < 1e-10);
  }
}
