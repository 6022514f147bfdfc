#include "stmi/channel.hpp"

#include <algorithm>
#include <cmath>

namespace stmi {

double KrausChannel::completeness_defect() const {
  Mat acc = Mat::Zero(in_dim(), in_dim());
  for (const auto& k : kraus) acc += k.adjoint() * k;
  return (acc - Mat::Identity(in_dim(), in_dim())).norm();
}

KrausChannel KrausChannel::make(TensorSpace in, TensorSpace out,
                                std::vector<Mat> ks) {
  if (ks.empty()) throw Error("KrausChannel: empty Kraus list");
  for (const auto& k : ks)
    if (k.rows() != out.dim() || k.cols() != in.dim())
      throw Error("KrausChannel: Kraus operator has wrong shape");
  KrausChannel ch{std::move(in), std::move(out), std::move(ks)};
  if (ch.completeness_defect() > tol::completeness)
    throw Error("KrausChannel: completeness check failed");
  return ch;
}

KrausChannel KrausChannel::unchecked(TensorSpace in, TensorSpace out,
                                     std::vector<Mat> ks) {
  return KrausChannel{std::move(in), std::move(out), std::move(ks)};
}

Mat apply_raw(const std::vector<Mat>& kraus, const Mat& rho) {
  Mat out = Mat::Zero(kraus[0].rows(), kraus[0].rows());
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  double drift = herm_drift_norm(out);
  if (drift > tol::herm_drift * std::max(1.0, out.norm()))
    throw Error("apply: hermiticity drift beyond hard limit");
  return hermitize(out);
}

Mat adjoint_raw(const std::vector<Mat>& kraus, const Mat& obs) {
  Mat out = Mat::Zero(kraus[0].cols(), kraus[0].cols());
  for (const auto& k : kraus) out += k.adjoint() * obs * k;
  return hermitize(out);
}

DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho) {
  if (!rho.space().same_factors(ch.in_space))
    throw Error("apply: state space does not match channel input");
  Mat in = reorder_factors(rho.data(), rho.space(), ch.in_space);
  return DensityMatrix::unchecked(ch.out_space, apply_raw(ch.kraus, in));
}

HermitianObservable adjoint_apply(const KrausChannel& ch,
                                  const HermitianObservable& obs) {
  if (!obs.space.same_factors(ch.out_space))
    throw Error("adjoint_apply: observable space does not match channel output");
  Mat in = reorder_factors(obs.data, obs.space, ch.out_space);
  return HermitianObservable(ch.in_space, adjoint_raw(ch.kraus, in));
}

Mat complement_raw(const std::vector<Mat>& kraus, const Mat& rho) {
  int m = static_cast<int>(kraus.size());
  Mat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      g(i, j) = trace_prod(kraus[i] * rho, kraus[j].adjoint());
  return hermitize(g);
}

DensityMatrix complement(const KrausChannel& ch, const DensityMatrix& rho) {
  if (!rho.space().same_factors(ch.in_space))
    throw Error("complement: state space does not match channel input");
  Mat g = complement_raw(ch.kraus,
                         reorder_factors(rho.data(), rho.space(), ch.in_space));
  TensorSpace env = TensorSpace::single("E", static_cast<int>(ch.kraus.size()));
  return DensityMatrix::unchecked(env, std::move(g));
}

std::vector<Mat> complement_kraus(const std::vector<Mat>& kraus) {
  int m = static_cast<int>(kraus.size());
  Eigen::Index d = kraus[0].cols();
  Eigen::Index db = kraus[0].rows();
  std::vector<Mat> kt;
  kt.reserve(db);
  for (Eigen::Index b = 0; b < db; ++b) {
    Mat t(m, d);
    for (int i = 0; i < m; ++i) t.row(i) = kraus[i].row(b);
    kt.push_back(std::move(t));
  }
  return kt;
}

KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
  if (second.in_dim() != first.out_dim())
    throw Error("compose: intermediate dimension mismatch");
  std::vector<Mat> ks;
  ks.reserve(second.kraus.size() * first.kraus.size());
  for (const auto& s : second.kraus)
    for (const auto& f : first.kraus) ks.push_back(s * f);
  return KrausChannel::unchecked(first.in_space, second.out_space, std::move(ks));
}

KrausChannel tensor(const KrausChannel& a, const KrausChannel& b) {
  std::vector<Mat> ks;
  ks.reserve(a.kraus.size() * b.kraus.size());
  for (const auto& ka : a.kraus)
    for (const auto& kb : b.kraus) ks.push_back(kron(ka, kb));
  return KrausChannel::unchecked(a.in_space.tensor(b.in_space),
                                 a.out_space.tensor(b.out_space), std::move(ks));
}

KrausChannel channel_from_unitary(const Mat& u, const TensorSpace& u_space,
                                  const DensityMatrix& rho_env,
                                  const std::vector<std::string>& out_keep) {
  const auto dims = u_space.dims();
  if (u.rows() != u_space.dim() || u.cols() != u_space.dim())
    throw Error("channel_from_unitary: unitary size does not match space");

  std::vector<std::string> env_labels = rho_env.space().labels();
  for (const auto& l : env_labels) u_space.position(l);
  std::vector<std::string> sys_labels = u_space.complement(env_labels);
  std::vector<std::string> keep_labels = out_keep;
  std::vector<std::string> drop_labels = u_space.complement(keep_labels);
  if (sys_labels.empty()) throw Error("channel_from_unitary: no system factors");

  // rows to [traced-out..., kept...], cols to [env..., system...]
  auto row_order = u_space.positions(drop_labels);
  auto keep_pos = u_space.positions(keep_labels);
  row_order.insert(row_order.end(), keep_pos.begin(), keep_pos.end());
  auto col_order = u_space.positions(env_labels);
  auto sys_pos = u_space.positions(sys_labels);
  col_order.insert(col_order.end(), sys_pos.begin(), sys_pos.end());

  auto rmap = composite_index_map(dims, row_order);
  auto cmap = composite_index_map(dims, col_order);

  Eigen::Index total = u_space.dim();
  Mat u2(total, total);
  for (Eigen::Index r = 0; r < total; ++r)
    for (Eigen::Index c = 0; c < total; ++c) u2(r, c) = u(rmap[r], cmap[c]);

  Eigen::Index d_env = rho_env.dim();
  Eigen::Index d_sys = total / d_env;
  Eigen::Index d_keep = 1;
  for (const auto& l : keep_labels) d_keep *= u_space.factor(u_space.position(l)).dim;
  Eigen::Index d_drop = total / d_keep;

  auto [ev, evec] = eigh(rho_env.data());
  double lmax = ev.size() ? ev.maxCoeff() : 0.0;
  double cut = tol::rank_rel * std::max(lmax, 0.0);

  std::vector<Mat> ks;
  for (Eigen::Index l = 0; l < d_drop; ++l) {
    for (Eigen::Index m = 0; m < d_env; ++m) {
      if (ev(m) <= cut) continue;
      double w = std::sqrt(ev(m));
      Mat k(d_keep, d_sys);
      for (Eigen::Index b = 0; b < d_keep; ++b)
        for (Eigen::Index a = 0; a < d_sys; ++a) {
          cd acc(0, 0);
          for (Eigen::Index e = 0; e < d_env; ++e)
            acc += u2(l * d_keep + b, e * d_sys + a) * evec(e, m);
          k(b, a) = w * acc;
        }
      ks.push_back(std::move(k));
    }
  }

  TensorSpace in = u_space.subspace(sys_labels);
  TensorSpace out = u_space.subspace(keep_labels);
  return KrausChannel::make(std::move(in), std::move(out), std::move(ks));
}

KrausChannel compress_choi(const KrausChannel& ch) {
  const Eigen::Index din = ch.in_dim();
  const Eigen::Index dout = ch.out_dim();
  const Eigen::Index dc = din * dout;
  Mat choi = Mat::Zero(dc, dc);
  for (const auto& k : ch.kraus) {
    Vec v(dc);
    // column-major vectorization
    for (Eigen::Index j = 0; j < din; ++j)
      for (Eigen::Index i = 0; i < dout; ++i) v(j * dout + i) = k(i, j);
    choi += v * v.adjoint();
  }
  auto [ev, u] = eigh(choi);
  double lmax = ev.size() ? ev.maxCoeff() : 0.0;
  double cut = 1e-12 * std::max(lmax, 0.0);
  std::vector<Mat> ks;
  // descending eigenvalue order
  for (Eigen::Index k = ev.size() - 1; k >= 0; --k) {
    if (ev(k) <= cut) continue;
    Vec v = std::sqrt(ev(k)) * u.col(k);
    // deterministic phase: largest-modulus entry real positive
    Eigen::Index imax = 0;
    double amax = 0;
    for (Eigen::Index i = 0; i < dc; ++i)
      if (std::abs(v(i)) > amax) {
        amax = std::abs(v(i));
        imax = i;
      }
    if (amax > 0) v *= std::conj(v(imax)) / amax;
    Mat m(dout, din);
    for (Eigen::Index j = 0; j < din; ++j)
      for (Eigen::Index i = 0; i < dout; ++i) m(i, j) = v(j * dout + i);
    ks.push_back(std::move(m));
  }
  return KrausChannel::make(ch.in_space, ch.out_space, std::move(ks));
}

KrausChannel identity_channel(const TensorSpace& space) {
  return KrausChannel::unchecked(space, space,
                                 {Mat::Identity(space.dim(), space.dim())});
}

KrausChannel unitary_channel(const Mat& u, const TensorSpace& space) {
  if (u.rows() != space.dim() || u.cols() != space.dim())
    throw Error("unitary_channel: size mismatch");
  if ((u.adjoint() * u - Mat::Identity(u.rows(), u.cols())).norm() > 1e-10)
    throw Error("unitary_channel: input is not unitary");
  return KrausChannel::unchecked(space, space, {u});
}

KrausChannel depolarizing(double p, const std::string& label) {
  if (p < 0 || p > 1) throw Error("depolarizing: p out of range");
  TensorSpace s = TensorSpace::single(label, 2);
  double a0 = std::sqrt(1.0 - 0.75 * p);
  double ai = std::sqrt(0.25 * p);
  std::vector<Mat> ks = {a0 * identity(2), ai * pauli_x(), ai * pauli_y(),
                         ai * pauli_z()};
  return KrausChannel::make(s, s, std::move(ks));
}

KrausChannel dephasing(double p, const std::string& label) {
  if (p < 0 || p > 1) throw Error("dephasing: p out of range");
  TensorSpace s = TensorSpace::single(label, 2);
  std::vector<Mat> ks = {std::sqrt(1.0 - 0.5 * p) * identity(2),
                         std::sqrt(0.5 * p) * pauli_z()};
  return KrausChannel::make(s, s, std::move(ks));
}

KrausChannel replacer(const DensityMatrix& rho_fix, const TensorSpace& in_space) {
  auto [ev, u] = eigh(rho_fix.data());
  double lmax = ev.size() ? ev.maxCoeff() : 0.0;
  double cut = tol::rank_rel * std::max(lmax, 0.0);
  const Eigen::Index din = in_space.dim();
  std::vector<Mat> ks;
  for (Eigen::Index m = 0; m < ev.size(); ++m) {
    if (ev(m) <= cut) continue;
    for (Eigen::Index j = 0; j < din; ++j) {
      Mat k = Mat::Zero(rho_fix.dim(), din);
      k.col(j) = std::sqrt(ev(m)) * u.col(m);
      ks.push_back(std::move(k));
    }
  }
  return KrausChannel::make(in_space, rho_fix.space(), std::move(ks));
}

}  // namespace stmi
