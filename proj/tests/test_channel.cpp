#include <cmath>

#include "doctest.h"
#include "stmi/channel.hpp"
#include "stmi/core.hpp"

using namespace stmi;

TEST_CASE("depolarizing endpoints") {
  Rng rng(1);
  Mat rho = random_rho(2, 2, rng);
  KrausChannel id = depolarizing(0.0);
  CHECK((apply_raw(id.kraus, rho) - rho).norm() < 1e-13);
  KrausChannel full = depolarizing(1.0);
  CHECK((apply_raw(full.kraus, rho) - 0.5 * Mat::Identity(2, 2)).norm() <
        1e-13);
  KrausChannel mid = depolarizing(0.4);
  CHECK(mid.completeness_defect() < 1e-12);
  Mat out = apply_raw(mid.kraus, rho);
  CHECK((out - (0.6 * rho + 0.4 * 0.5 * Mat::Identity(2, 2))).norm() < 1e-13);
  CHECK_THROWS_AS(depolarizing(1.5), Error);
}

TEST_CASE("dephasing damps coherences") {
  Rng rng(2);
  Mat rho = random_rho(2, 2, rng);
  double p = 0.35;
  Mat out = apply_raw(dephasing(p).kraus, rho);
  CHECK(std::abs(out(0, 0) - rho(0, 0)) < 1e-13);
  CHECK(std::abs(out(1, 1) - rho(1, 1)) < 1e-13);
  CHECK(std::abs(out(0, 1) - (1.0 - p) * rho(0, 1)) < 1e-13);
}

TEST_CASE("adjoint duality") {
  Rng rng(3);
  KrausChannel ch = depolarizing(0.3);
  Mat rho = random_rho(2, 2, rng);
  Mat x = random_hermitian(2, rng);
  cd lhs = trace_prod(apply_raw(ch.kraus, rho), x);
  cd rhs = trace_prod(rho, adjoint_raw(ch.kraus, x));
  CHECK(std::abs(lhs - rhs) < 1e-13);
}

TEST_CASE("complement channel is trace preserving") {
  Rng rng(4);
  KrausChannel ch = dephasing(0.45);
  Mat rho = random_rho(2, 2, rng);
  std::vector<Mat> kt = complement_kraus(ch.kraus);
  Mat gamma = apply_raw(kt, rho);
  CHECK(std::abs(gamma.trace().real() - 1.0) < 1e-12);
  CHECK(herm_drift_norm(gamma) < 1e-12);
  // Gamma_IJ = tr(K_I rho K_J^dag)
  for (std::size_t i = 0; i < ch.kraus.size(); ++i)
    for (std::size_t j = 0; j < ch.kraus.size(); ++j) {
      cd expect = (ch.kraus[i] * rho * ch.kraus[j].adjoint()).trace();
      CHECK(std::abs(gamma(static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(j)) -
                     expect) < 1e-12);
    }
}

TEST_CASE("compose and tensor") {
  Rng rng(5);
  TensorSpace sa = TensorSpace::single("A", 2);
  Mat u1 = random_unitary(2, rng);
  Mat u2 = random_unitary(2, rng);
  KrausChannel c = compose(unitary_channel(u2, sa), unitary_channel(u1, sa));
  Mat rho = random_rho(2, 2, rng);
  Mat expect = u2 * u1 * rho * (u2 * u1).adjoint();
  CHECK((apply_raw(c.kraus, rho) - expect).norm() < 1e-12);

  KrausChannel t = tensor(depolarizing(0.2, "A"), dephasing(0.6, "B"));
  CHECK(t.in_dim() == 4);
  CHECK(t.completeness_defect() < 1e-12);
  Mat ra = random_rho(2, 2, rng);
  Mat rb = random_rho(2, 2, rng);
  Mat joint = apply_raw(t.kraus, kron(ra, rb));
  Mat want = kron(apply_raw(depolarizing(0.2).kraus, ra),
                  apply_raw(dephasing(0.6).kraus, rb));
  CHECK((joint - want).norm() < 1e-12);
}

TEST_CASE("channel from unitary traces the environment") {
  Rng rng(6);
  int de = 3;
  TensorSpace us({Factor{"A", 2}, Factor{"E", de}});
  Mat u = random_unitary(2 * de, rng);
  Mat env_m = random_rho(de, de, rng);
  DensityMatrix env =
      DensityMatrix::unchecked(TensorSpace::single("E", de), env_m);
  KrausChannel ch = channel_from_unitary(u, us, env, {"A"});
  CHECK(ch.completeness_defect() < 1e-10);
  Mat rho = random_rho(2, 2, rng);
  Mat direct = partial_trace(u * kron(rho, env_m) * u.adjoint(), {2, de}, {0});
  CHECK((apply_raw(ch.kraus, rho) - direct).norm() < 1e-11);
}

TEST_CASE("choi compression preserves the action") {
  Rng rng(7);
  KrausChannel ch = depolarizing(0.5);
  // duplicate every Kraus operator with split weights
  std::vector<Mat> redundant;
  for (const Mat& k : ch.kraus) {
    redundant.push_back(std::sqrt(0.3) * k);
    redundant.push_back(std::sqrt(0.7) * k);
  }
  KrausChannel fat =
      KrausChannel::unchecked(ch.in_space, ch.out_space, redundant);
  KrausChannel slim = compress_choi(fat);
  CHECK(slim.kraus.size() <= ch.kraus.size());
  Mat rho = random_rho(2, 2, rng);
  CHECK((apply_raw(slim.kraus, rho) - apply_raw(ch.kraus, rho)).norm() <
        1e-12);
}

TEST_CASE("replacer ignores its input") {
  Rng rng(8);
  Mat target = random_rho(2, 2, rng);
  DensityMatrix sigma =
      DensityMatrix::unchecked(TensorSpace::single("A", 2), target);
  KrausChannel rep = replacer(sigma, TensorSpace::single("A", 2));
  CHECK(rep.completeness_defect() < 1e-12);
  for (int i = 0; i < 3; ++i) {
    Mat rho = random_rho(2, 2, rng);
    CHECK((apply_raw(rep.kraus, rho) - target).norm() < 1e-11);
  }
}

TEST_CASE("kraus validation") {
  std::vector<Mat> bad{0.5 * Mat::Identity(2, 2)};
  CHECK_THROWS_AS(KrausChannel::make(TensorSpace::single("A", 2),
                                     TensorSpace::single("A", 2), bad),
                  Error);
  KrausChannel ok = identity_channel(TensorSpace::single("A", 2));
  CHECK(ok.kraus.size() == 1);
  CHECK(ok.completeness_defect() < 1e-14);
}

TEST_CASE("labeled apply keeps factor bookkeeping") {
  Rng rng(9);
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 2}});
  Mat ra = random_rho(2, 2, rng);
  Mat rb = random_rho(2, 2, rng);
  DensityMatrix rho(sp, kron(ra, rb));
  KrausChannel ch = tensor(depolarizing(1.0, "A"), identity_channel(
                                                       TensorSpace::single("B", 2)));
  DensityMatrix out = apply(ch, rho);
  CHECK(out.space().labels() == std::vector<std::string>{"A", "B"});
  CHECK((out.data() - kron(0.5 * Mat::Identity(2, 2), rb)).norm() < 1e-12);
}
