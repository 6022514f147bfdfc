#include <cmath>

#include "doctest.h"
#include "stmi/core.hpp"

using namespace stmi;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("tensor space indexing") {
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 3}, Factor{"C", 2}});
  CHECK(sp.dim() == 12);
  CHECK(sp.n_factors() == 3);
  CHECK(sp.position("B") == 1);
  CHECK(sp.has_label("C"));
  CHECK(!sp.has_label("D"));
  CHECK_THROWS_AS(sp.position("D"), Error);

  TensorSpace sub = sp.subspace({"C", "A"});
  CHECK(sub.labels() == std::vector<std::string>{"A", "C"});
  CHECK(sub.dim() == 4);
  CHECK(sp.complement({"B"}) == std::vector<std::string>{"A", "C"});

  CHECK_THROWS_AS(TensorSpace({Factor{"A", 2}, Factor{"A", 3}}), Error);
  CHECK_THROWS_AS(sp.tensor(TensorSpace::single("B", 2)), Error);
}

TEST_CASE("kron and partial trace") {
  Rng rng(1);
  Mat a = random_rho(2, 2, rng);
  Mat b = random_rho(3, 3, rng);
  Mat ab = kron(a, b);
  CHECK((partial_trace(ab, {2, 3}, {0}) - a).norm() < 1e-13);
  CHECK((partial_trace(ab, {2, 3}, {1}) - b).norm() < 1e-13);
  // kept factors stay in original order even if keep is permuted
  Mat c = random_rho(2, 2, rng);
  Mat abc = kron(kron(a, b), c);
  Mat keep_ac = partial_trace(abc, {2, 3, 2}, {2, 0});
  CHECK((keep_ac - kron(a, c)).norm() < 1e-13);
}

TEST_CASE("permute, embed, reorder") {
  Rng rng(2);
  Mat a = random_hermitian(2, rng);
  Mat b = random_hermitian(3, rng);
  Mat ab = kron(a, b);
  CHECK((permute_factors(ab, {2, 3}, {1, 0}) - kron(b, a)).norm() < 1e-13);

  CHECK((embed_op(a, {2, 3}, {0}) - kron(a, identity(3))).norm() < 1e-13);
  CHECK((embed_op(b, {2, 3}, {1}) - kron(identity(2), b)).norm() < 1e-13);
  Mat c = random_hermitian(2, rng);
  CHECK((embed_op(kron(a, c), {2, 3, 2}, {0, 2}) -
         permute_factors(kron(kron(a, c), identity(3)), {2, 2, 3}, {0, 2, 1}))
            .norm() < 1e-13);

  TensorSpace from({Factor{"A", 2}, Factor{"B", 3}});
  TensorSpace to({Factor{"B", 3}, Factor{"A", 2}});
  CHECK((reorder_factors(ab, from, to) - kron(b, a)).norm() < 1e-13);
}

TEST_CASE("hermitian helpers") {
  Rng rng(3);
  Mat h = random_hermitian(4, rng);
  Mat g = rng.cgauss(4, 4);
  CHECK(herm_drift_norm(h) < 1e-14);
  CHECK(herm_drift_norm(hermitize(g)) < 1e-14);
  CHECK(std::abs(trace_prod(h, g) - (h * g).trace()) < 1e-12);

  Eigh es = eigh(h);
  Mat rebuilt = es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
  CHECK((rebuilt - h).norm() < 1e-12);
  for (int i = 1; i < 4; ++i) CHECK(es.values(i - 1) <= es.values(i));

  // exp(i theta sz) = diag(e^{i theta}, e^{-i theta})
  double theta = 0.37;
  Mat e = exp_i(theta * pauli_z());
  CHECK(std::abs(e(0, 0) - std::exp(cd(0.0, theta))) < 1e-14);
  CHECK(std::abs(e(1, 1) - std::exp(cd(0.0, -theta))) < 1e-14);

  Mat u = random_unitary(4, rng);
  CHECK((u.adjoint() * u - Mat::Identity(4, 4)).norm() < 1e-12);
  Mat v = rng.cgauss(4, 2);
  Mat vo = polar_orthonormalize(v);
  CHECK((vo.adjoint() * vo - Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("support functions") {
  Mat rho = diag2(0.7, 0.0);
  LogSupport ls = matrix_log_support(rho);
  CHECK(ls.rank == 1);
  CHECK(std::abs(ls.log_on_support(0, 0).real() - std::log(0.7)) < 1e-12);
  CHECK(std::abs(ls.support_projector(0, 0).real() - 1.0) < 1e-12);
  CHECK(std::abs(ls.support_projector(1, 1).real()) < 1e-12);

  Rng rng(4);
  Mat p = random_rho(3, 3, rng);
  Mat s = sqrt_psd(p);
  CHECK((s * s - p).norm() < 1e-12);
  Mat is = inv_sqrt_on_support(p);
  CHECK((is * p * is - Mat::Identity(3, 3)).norm() < 1e-10);
  CHECK((inv_on_support(p) * p - Mat::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("entropy closed forms") {
  CHECK(von_neumann_entropy(diag2(1.0, 0.0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(von_neumann_entropy(diag2(0.5, 0.5)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(von_neumann_entropy(diag2(0.9, 0.1)) ==
        doctest::Approx(0.3250829733914482).epsilon(1e-12));

  EntropyValue same = relative_entropy(diag2(0.5, 0.5), diag2(0.5, 0.5));
  CHECK(same.is_finite());
  CHECK(std::abs(same.value) < 1e-12);

  EntropyValue skew = relative_entropy(diag2(0.5, 0.5), diag2(0.9, 0.1));
  CHECK(skew.value == doctest::Approx(0.5108256237659907).epsilon(1e-12));

  // support violation diverges
  EntropyValue div = relative_entropy(diag2(0.5, 0.5), diag2(1.0, 0.0));
  CHECK(!div.is_finite());
  CHECK(std::isinf(div.value));
  // contained support stays finite
  EntropyValue fin = relative_entropy(diag2(1.0, 0.0), diag2(0.9, 0.1));
  CHECK(fin.is_finite());
  CHECK(fin.value == doctest::Approx(std::log(1.0 / 0.9)).epsilon(1e-10));
}

TEST_CASE("mutual information") {
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 2}});
  Rng rng(5);
  Mat a = random_rho(2, 2, rng);
  Mat b = random_rho(2, 2, rng);
  DensityMatrix prod(sp, kron(a, b));
  CHECK(std::abs(mutual_information(prod, {"A"}, {"B"})) < 1e-12);

  Vec epr = Vec::Zero(4);
  epr(0) = epr(3) = 1.0 / std::sqrt(2.0);
  DensityMatrix ent(sp, epr * epr.adjoint());
  CHECK(mutual_information(ent, {"A"}, {"B"}) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("density matrix validation") {
  TensorSpace sp = TensorSpace::single("A", 2);
  CHECK_THROWS_AS(DensityMatrix(sp, diag2(0.7, 0.7)), Error);   // trace
  CHECK_THROWS_AS(DensityMatrix(sp, diag2(1.2, -0.2)), Error);  // negativity
  Mat nh = diag2(0.5, 0.5);
  nh(0, 1) = cd(0.5, 0.3);
  CHECK_THROWS_AS(DensityMatrix(sp, nh), Error);  // hermiticity
  CHECK_THROWS_AS(DensityMatrix(TensorSpace::single("A", 3), diag2(0.5, 0.5)),
                  Error);  // dimension mismatch
  DensityMatrix ok(sp, diag2(0.5, 0.5));
  CHECK(ok.dim() == 2);
}

TEST_CASE("partial trace on labeled states") {
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 3}});
  Rng rng(6);
  Mat a = random_rho(2, 2, rng);
  Mat b = random_rho(3, 3, rng);
  DensityMatrix rho(sp, kron(a, b));
  DensityMatrix ra = partial_trace(rho, {"A"});
  CHECK(ra.space().labels() == std::vector<std::string>{"A"});
  CHECK((ra.data() - a).norm() < 1e-13);
  DensityMatrix rb = partial_trace(rho, {"B"});
  CHECK((rb.data() - b).norm() < 1e-13);
}

TEST_CASE("norms and distances") {
  Mat h = diag2(0.25, -0.75);
  CHECK(one_norm(h) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(operator_norm(h) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(trace_distance(diag2(1.0, 0.0), diag2(0.0, 1.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rng determinism") {
  Rng a(123), b(123);
  for (int i = 0; i < 5; ++i) {
    double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(a.gauss() == b.gauss());
  Mat ga = a.cgauss(2, 3), gb = b.cgauss(2, 3);
  CHECK((ga - gb).norm() == 0.0);
  Rng c(124);
  CHECK(c.uniform() != Rng(123).uniform());
}
