#include "stmi/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace stmi {

// ---------------------------------------------------------------------------
// TensorSpace
// ---------------------------------------------------------------------------

TensorSpace::TensorSpace(std::vector<Factor> factors)
    : factors_(std::move(factors)) {
  std::set<std::string> seen;
  dim_ = 1;
  for (const auto& f : factors_) {
    if (f.dim <= 0) throw Error("TensorSpace: factor '" + f.label + "' has non-positive dim");
    if (!seen.insert(f.label).second)
      throw Error("TensorSpace: duplicate label '" + f.label + "'");
    dim_ *= f.dim;
  }
}

bool TensorSpace::has_label(const std::string& label) const {
  for (const auto& f : factors_)
    if (f.label == label) return true;
  return false;
}

int TensorSpace::position(const std::string& label) const {
  for (int i = 0; i < n_factors(); ++i)
    if (factors_[i].label == label) return i;
  throw Error("TensorSpace: unknown label '" + label + "'");
}

std::vector<int> TensorSpace::positions(const std::vector<std::string>& labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(position(l));
  return out;
}

std::vector<int> TensorSpace::dims() const {
  std::vector<int> d;
  d.reserve(factors_.size());
  for (const auto& f : factors_) d.push_back(f.dim);
  return d;
}

std::vector<std::string> TensorSpace::labels() const {
  std::vector<std::string> l;
  l.reserve(factors_.size());
  for (const auto& f : factors_) l.push_back(f.label);
  return l;
}

TensorSpace TensorSpace::tensor(const TensorSpace& other) const {
  std::vector<Factor> f = factors_;
  f.insert(f.end(), other.factors_.begin(), other.factors_.end());
  return TensorSpace(std::move(f));  // ctor rejects duplicates
}

TensorSpace TensorSpace::subspace(const std::vector<std::string>& keep) const {
  std::set<std::string> want(keep.begin(), keep.end());
  for (const auto& l : keep) position(l);  // validate
  std::vector<Factor> f;
  for (const auto& fac : factors_)
    if (want.count(fac.label)) f.push_back(fac);
  return TensorSpace(std::move(f));
}

std::vector<std::string> TensorSpace::complement(
    const std::vector<std::string>& labels) const {
  std::set<std::string> drop(labels.begin(), labels.end());
  for (const auto& l : labels) position(l);
  std::vector<std::string> out;
  for (const auto& fac : factors_)
    if (!drop.count(fac.label)) out.push_back(fac.label);
  return out;
}

bool TensorSpace::same_factors(const TensorSpace& other) const {
  if (n_factors() != other.n_factors()) return false;
  for (int i = 0; i < n_factors(); ++i)
    if (factors_[i].label != other.factors_[i].label ||
        factors_[i].dim != other.factors_[i].dim)
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// raw tensor algebra
// ---------------------------------------------------------------------------

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

// composite offsets of every multi-index over the chosen factor positions,
// with respect to the full-space strides
std::vector<Eigen::Index> sub_offsets(const std::vector<int>& dims,
                                      const std::vector<int>& pos) {
  int n = static_cast<int>(dims.size());
  std::vector<Eigen::Index> strides(n, 1);
  for (int k = n - 2; k >= 0; --k)
    strides[k] = strides[k + 1] * dims[k + 1];
  Eigen::Index total = 1;
  for (int p : pos) total *= dims[p];
  std::vector<Eigen::Index> off(total, 0);
  Eigen::Index block = total;
  for (int p : pos) {
    block /= dims[p];
    // digit for position p cycles with period block over dims[p] values
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      Eigen::Index digit = (idx / block) % dims[p];
      off[idx] += digit * strides[p];
    }
  }
  return off;
}

}  // namespace

Mat partial_trace(const Mat& m, const std::vector<int>& dims,
                  const std::vector<int>& keep) {
  int n = static_cast<int>(dims.size());
  Eigen::Index total = 1;
  for (int d : dims) total *= d;
  if (m.rows() != total || m.cols() != total)
    throw Error("partial_trace: matrix size does not match dims");
  std::vector<int> kp = keep;
  std::sort(kp.begin(), kp.end());
  for (size_t i = 0; i + 1 < kp.size(); ++i)
    if (kp[i] == kp[i + 1]) throw Error("partial_trace: repeated keep index");
  for (int p : kp)
    if (p < 0 || p >= n) throw Error("partial_trace: keep index out of range");
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (!std::count(kp.begin(), kp.end(), i)) rest.push_back(i);

  auto offK = sub_offsets(dims, kp);
  auto offR = sub_offsets(dims, rest);
  Eigen::Index dk = static_cast<Eigen::Index>(offK.size());
  Mat out = Mat::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a)
    for (Eigen::Index b = 0; b < dk; ++b) {
      cd acc(0, 0);
      for (auto r : offR) acc += m(offK[a] + r, offK[b] + r);
      out(a, b) = acc;
    }
  return out;
}

std::vector<Eigen::Index> composite_index_map(const std::vector<int>& dims,
                                              const std::vector<int>& order) {
  int n = static_cast<int>(dims.size());
  if (static_cast<int>(order.size()) != n)
    throw Error("composite_index_map: order size mismatch");
  Eigen::Index total = 1;
  for (int d : dims) total *= d;
  std::vector<Eigen::Index> strides(n, 1);
  for (int k = n - 2; k >= 0; --k)
    strides[k] = strides[k + 1] * dims[k + 1];
  std::vector<Eigen::Index> map(total, 0);
  std::vector<int> newdims(n);
  for (int k = 0; k < n; ++k) newdims[k] = dims[order[k]];
  Eigen::Index block = total;
  for (int k = 0; k < n; ++k) {
    block /= newdims[k];
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      Eigen::Index digit = (idx / block) % newdims[k];
      map[idx] += digit * strides[order[k]];
    }
  }
  return map;
}

Mat permute_factors(const Mat& m, const std::vector<int>& dims,
                    const std::vector<int>& order) {
  Eigen::Index total = 1;
  for (int d : dims) total *= d;
  if (m.rows() != total || m.cols() != total)
    throw Error("permute_factors: matrix size does not match dims");
  auto map = composite_index_map(dims, order);
  Mat out(total, total);
  for (Eigen::Index a = 0; a < total; ++a)
    for (Eigen::Index b = 0; b < total; ++b)
      out(a, b) = m(map[a], map[b]);
  return out;
}

Mat embed_op(const Mat& x, const std::vector<int>& dims,
             const std::vector<int>& pos) {
  int n = static_cast<int>(dims.size());
  Eigen::Index dx = 1;
  for (int p : pos) {
    if (p < 0 || p >= n) throw Error("embed_op: position out of range");
    dx *= dims[p];
  }
  if (x.rows() != dx || x.cols() != dx)
    throw Error("embed_op: operator size does not match positions");

  std::vector<int> ordered = pos;
  for (int i = 0; i < n; ++i)
    if (!std::count(pos.begin(), pos.end(), i)) ordered.push_back(i);

  Eigen::Index drest = 1;
  for (size_t k = pos.size(); k < ordered.size(); ++k) drest *= dims[ordered[k]];
  Mat blk = kron(x, Mat::Identity(drest, drest));

  std::vector<int> ordered_dims(n);
  for (int k = 0; k < n; ++k) ordered_dims[k] = dims[ordered[k]];
  // new order restores original factor positions
  std::vector<int> inv(n);
  for (int k = 0; k < n; ++k) inv[ordered[k]] = k;
  std::vector<int> restore(n);
  for (int k = 0; k < n; ++k) restore[k] = inv[k];
  return permute_factors(blk, ordered_dims, restore);
}

Mat reorder_factors(const Mat& data, const TensorSpace& from,
                    const TensorSpace& to) {
  if (from.n_factors() != to.n_factors())
    throw Error("reorder_factors: factor sets differ");
  std::vector<int> order;
  order.reserve(to.n_factors());
  for (const Factor& f : to.factors()) {
    int p = from.position(f.label);  // throws on unknown label
    if (from.factor(p).dim != f.dim)
      throw Error("reorder_factors: factor sets differ");
    order.push_back(p);
  }
  return permute_factors(data, from.dims(), order);
}

// ---------------------------------------------------------------------------
// Hermitian helpers
// ---------------------------------------------------------------------------

cd trace_prod(const Mat& a, const Mat& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

Eigh eigh(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(h));
  if (es.info() != Eigen::Success) throw Error("eigh: decomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Mat exp_i(const Mat& h) {
  auto [ev, u] = eigh(h);
  Vec phases(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    phases(k) = std::exp(cd(0, ev(k)));
  return u * phases.asDiagonal() * u.adjoint();
}

LogSupport matrix_log_support(const Mat& h) {
  if (herm_drift_norm(h) > tol::herm * std::max(1.0, h.norm()))
    throw Error("matrix_log_support: input not Hermitian");
  auto [ev, u] = eigh(h);
  double lmax = ev.size() ? ev.maxCoeff() : 0.0;
  if (lmax < 0) throw Error("matrix_log_support: input not PSD");
  double cut = tol::rank_rel * lmax;
  const Eigen::Index d = ev.size();
  Mat lg = Mat::Zero(d, d);
  Mat proj = Mat::Zero(d, d);
  int rank = 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (ev(k) <= cut) {
      if (ev(k) < -tol::psd * std::max(1.0, lmax))
        throw Error("matrix_log_support: negative eigenvalue beyond tolerance");
      continue;
    }
    Mat vk = u.col(k) * u.col(k).adjoint();
    lg += std::log(ev(k)) * vk;
    proj += vk;
    ++rank;
  }
  return {hermitize(lg), hermitize(proj), rank};
}

namespace {
Mat psd_power(const Mat& h, double expo, bool on_support) {
  auto [ev, u] = eigh(h);
  double lmax = ev.size() ? ev.maxCoeff() : 0.0;
  double cut = tol::rank_rel * std::max(lmax, 0.0);
  Vec d(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    double v = ev(k);
    if (v <= cut) {
      if (!on_support && v <= 0)
        throw Error("psd_power: singular input");
      d(k) = 0.0;
    } else {
      d(k) = std::pow(v, expo);
    }
  }
  return u * d.asDiagonal() * u.adjoint();
}
}  // namespace

Mat sqrt_psd(const Mat& h) { return psd_power(h, 0.5, true); }
Mat inv_sqrt_on_support(const Mat& h) { return psd_power(h, -0.5, true); }
Mat inv_on_support(const Mat& h) { return psd_power(h, -1.0, true); }

Mat polar_orthonormalize(const Mat& v) {
  Mat g = v.adjoint() * v;
  return v * psd_power(g, -0.5, true);
}

double one_norm(const Mat& h) {
  if (herm_drift_norm(h) < 1e-9 * std::max(1.0, h.norm())) {
    auto [ev, u] = eigh(h);
    (void)u;
    return ev.cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Mat> svd(h);
  return svd.singularValues().sum();
}

double operator_norm(const Mat& h) {
  if (herm_drift_norm(h) < 1e-9 * std::max(1.0, h.norm())) {
    auto [ev, u] = eigh(h);
    (void)u;
    return ev.cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Mat> svd(h);
  return svd.singularValues().maxCoeff();
}

double trace_distance(const Mat& a, const Mat& b) {
  return 0.5 * one_norm(a - b);
}

// ---------------------------------------------------------------------------
// DensityMatrix & observables
// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(TensorSpace space, Mat data)
    : space_(std::move(space)), data_(std::move(data)) {
  if (data_.rows() != space_.dim() || data_.cols() != space_.dim())
    throw Error("DensityMatrix: data size does not match space");
  double scale = std::max(1.0, data_.norm());
  if (herm_drift_norm(data_) > tol::herm * scale)
    throw Error("DensityMatrix: not Hermitian");
  data_ = hermitize(data_);
  double tr = data_.trace().real();
  if (std::abs(tr - 1.0) > tol::trace)
    throw Error("DensityMatrix: trace differs from 1");
  auto [ev, u] = eigh(data_);
  (void)u;
  if (ev.size() && ev.minCoeff() < -tol::psd)
    throw Error("DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::unchecked(TensorSpace space, Mat data) {
  DensityMatrix d;
  d.space_ = std::move(space);
  d.data_ = std::move(data);
  return d;
}

HermitianObservable::HermitianObservable(TensorSpace s, Mat d)
    : space(std::move(s)), data(std::move(d)) {
  if (data.rows() != space.dim() || data.cols() != space.dim())
    throw Error("HermitianObservable: size mismatch");
  if (herm_drift_norm(data) > tol::herm * std::max(1.0, data.norm()))
    throw Error("HermitianObservable: not Hermitian");
  data = hermitize(data);
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::unchecked(a.space().tensor(b.space()),
                                  kron(a.data(), b.data()));
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<std::string>& keep) {
  auto pos = rho.space().positions(keep);
  Mat out = partial_trace(rho.data(), rho.space().dims(), pos);
  return DensityMatrix::unchecked(rho.space().subspace(keep), std::move(out));
}

double von_neumann_entropy(const Mat& rho) {
  auto [ev, u] = eigh(rho);
  (void)u;
  double lmax = ev.size() ? ev.maxCoeff() : 0.0;
  double cut = tol::rank_rel * std::max(lmax, 0.0);
  double s = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev(k) > cut) s -= ev(k) * std::log(ev(k));
  return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return von_neumann_entropy(rho.data());
}

EntropyValue relative_entropy(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows())
    throw Error("relative_entropy: dimension mismatch");
  LogSupport ls = matrix_log_support(sigma);
  double leak =
      (rho.trace() - trace_prod(rho, ls.support_projector)).real();
  if (leak > tol::support) return EntropyValue::divergent();
  double s = -von_neumann_entropy(rho) - trace_prod(rho, ls.log_on_support).real();
  return EntropyValue::finite(s);
}

EntropyValue relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!rho.space().same_factors(sigma.space()))
    throw Error("relative_entropy: spaces differ");
  return relative_entropy(rho.data(), sigma.data());
}

double mutual_information(const DensityMatrix& rho,
                          const std::vector<std::string>& part1,
                          const std::vector<std::string>& part2) {
  for (const auto& l : part1)
    if (std::count(part2.begin(), part2.end(), l))
      throw Error("mutual_information: overlapping partitions");
  if (part1.size() + part2.size() != static_cast<size_t>(rho.space().n_factors()))
    throw Error("mutual_information: partitions must cover all factors");
  auto r1 = partial_trace(rho, part1);
  auto r2 = partial_trace(rho, part2);
  return von_neumann_entropy(r1) + von_neumann_entropy(r2) -
         von_neumann_entropy(rho);
}

double mutual_information2(const Mat& rho, const std::vector<int>& dims,
                           const std::vector<int>& part1) {
  std::vector<int> part2;
  for (int i = 0; i < static_cast<int>(dims.size()); ++i)
    if (!std::count(part1.begin(), part1.end(), i)) part2.push_back(i);
  Mat r1 = partial_trace(rho, dims, part1);
  Mat r2 = partial_trace(rho, dims, part2);
  return von_neumann_entropy(r1) + von_neumann_entropy(r2) -
         von_neumann_entropy(rho);
}

Mat random_rho(int dim, int rank, Rng& rng) {
  if (rank < 1 || rank > dim) throw Error("random_rho: rank out of range");
  Mat g = rng.cgauss(dim, rank);
  Mat r = g * g.adjoint();
  r /= r.trace().real();
  return hermitize(r);
}

DensityMatrix random_density_matrix(const TensorSpace& space, std::uint64_t seed,
                                    int rank) {
  Rng rng(seed);
  return DensityMatrix::unchecked(space, random_rho(space.dim(), rank, rng));
}

Mat random_hermitian(int dim, Rng& rng) {
  Mat g = rng.cgauss(dim, dim);
  return hermitize(g);
}

Mat random_unitary(int dim, Rng& rng) {
  Mat g = rng.cgauss(dim, dim);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(dim, dim);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix column phases so the factorization is unique
  for (int k = 0; k < dim; ++k) {
    cd rkk = r(k, k);
    double a = std::abs(rkk);
    if (a > 0) q.col(k) *= rkk / a;
  }
  return q;
}

Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Mat pauli_y() {
  Mat m(2, 2);
  m << 0, cd(0, -1), cd(0, 1), 0;
  return m;
}

Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Mat identity(int d) { return Mat::Identity(d, d); }

Mat bloch_state(double ax, double ay, double az) {
  return 0.5 * (identity(2) + ax * pauli_x() + ay * pauli_y() + az * pauli_z());
}

}  // namespace stmi
