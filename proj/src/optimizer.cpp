#include "stmi/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "stmi/parallel.hpp"

namespace stmi {

namespace {
constexpr double kIsoTol = 1e-10;
constexpr double kStepFloor = 1e-14;
constexpr double kLeakCertify = 1e-8;
constexpr double kStallGradTol = 1e-4;
constexpr double kSpreadTol = 1e-3;
constexpr int kReorthoEvery = 100;
}  // namespace

// ---------------------------------------------------------------------------
// couplings
// ---------------------------------------------------------------------------

IsometryCoupling IsometryCoupling::make(TensorSpace in, TensorSpace out, Mat v) {
  if (in.n_factors() != 1) throw Error("coupling: input space must be a single factor");
  if (out.n_factors() < 2) throw Error("coupling: output space needs system and ancilla factors");
  if (out.factor(0).dim != in.dim())
    throw Error("coupling: output factor 0 must match the input dimension");
  if (v.rows() != out.dim() || v.cols() != in.dim())
    throw Error("coupling: matrix shape does not match the spaces");
  Mat gram = v.adjoint() * v;
  double defect = (gram - Mat::Identity(in.dim(), in.dim())).norm();
  if (defect > kIsoTol) throw Error("coupling: V^dag V deviates from the identity");
  IsometryCoupling c;
  c.in_space = std::move(in);
  c.out_space = std::move(out);
  c.v = std::move(v);
  return c;
}

IsometryCoupling random_isometry(int d_a, int d_w, Rng& rng) {
  if (d_a < 1 || d_w < 1) throw Error("random_isometry: dimensions must be positive");
  Mat g = rng.cgauss(d_a * d_w, d_a);
  return IsometryCoupling::make(
      TensorSpace::single("A", d_a),
      TensorSpace({Factor{"A", d_a}, Factor{"W", d_w}}), polar_orthonormalize(g));
}

IsometryCoupling identity_embedding(int d_a, int d_w) {
  if (d_a < 1 || d_w < 1) throw Error("identity_embedding: dimensions must be positive");
  Mat v = Mat::Zero(d_a * d_w, d_a);
  for (int a = 0; a < d_a; ++a) v(a * d_w, a) = 1.0;
  return IsometryCoupling::make(
      TensorSpace::single("A", d_a),
      TensorSpace({Factor{"A", d_a}, Factor{"W", d_w}}), std::move(v));
}

// V|a> = |psi>_{A,W2} (x) |a>_{W1}: the system state is parked in W1 while the
// purification marginal rho_w is fed through the channel; W2 holds the
// purifying reference.
static IsometryCoupling swap_coupling_from_psi(const Vec& psi, int d) {
  Mat v = Mat::Zero(d * d * d, d);
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) v((i * d + a) * d + j, a) = psi(i * d + j);
  return IsometryCoupling::make(
      TensorSpace::single("A", d),
      TensorSpace({Factor{"A", d}, Factor{"W1", d}, Factor{"W2", d}}),
      std::move(v));
}

IsometryCoupling swap_coupling_from_rho_w(const DensityMatrix& rho_w) {
  int d = rho_w.dim();
  Eigh es = eigh(rho_w.data());
  Vec psi = Vec::Zero(d * d);
  for (int j = 0; j < d; ++j) {
    double lam = std::max(es.values(j), 0.0);
    double root = std::sqrt(lam);
    for (int i = 0; i < d; ++i) psi(i * d + j) = root * es.vectors(i, j);
  }
  return swap_coupling_from_psi(psi, d);
}

IsometryCoupling superdensity_coupling(int d_a) {
  if (d_a < 1) throw Error("superdensity_coupling: dimension must be positive");
  Vec psi = Vec::Zero(d_a * d_a);
  double amp = 1.0 / std::sqrt(static_cast<double>(d_a));
  for (int i = 0; i < d_a; ++i) psi(i * d_a + i) = amp;
  return swap_coupling_from_psi(psi, d_a);
}

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

Problem::Problem(Mat rho_in, int d_a, int d_abar, std::vector<Mat> kraus,
                 std::vector<int> out_dims, std::vector<int> b_idx, int d_w)
    : d_a_(d_a),
      d_abar_(d_abar),
      d_w_(d_w),
      rho_in_(std::move(rho_in)),
      kraus_(std::move(kraus)),
      out_dims_(std::move(out_dims)),
      b_idx_(std::move(b_idx)) {
  if (d_a_ < 1 || d_abar_ < 1 || d_w_ < 1) throw Error("problem: dimensions must be positive");
  int d_in = d_a_ * d_abar_;
  if (rho_in_.rows() != d_in || rho_in_.cols() != d_in)
    throw Error("problem: input state dimension mismatch");
  if (kraus_.empty()) throw Error("problem: empty Kraus family");
  d_out_ = 1;
  for (int d : out_dims_) {
    if (d < 1) throw Error("problem: output factor dimensions must be positive");
    d_out_ *= d;
  }
  for (const Mat& k : kraus_)
    if (k.rows() != d_out_ || k.cols() != d_in)
      throw Error("problem: Kraus operator shape mismatch");
  std::sort(b_idx_.begin(), b_idx_.end());
  if (b_idx_.empty()) throw Error("problem: B selects no output factors");
  for (std::size_t i = 0; i < b_idx_.size(); ++i) {
    if (b_idx_[i] < 0 || b_idx_[i] >= static_cast<int>(out_dims_.size()))
      throw Error("problem: B factor index out of range");
    if (i > 0 && b_idx_[i] == b_idx_[i - 1]) throw Error("problem: duplicate B factor");
  }
  d_b_ = 1;
  for (int i : b_idx_) d_b_ *= out_dims_[i];

  // extend each Kraus operator to act as the identity on W:
  // [A, W, Abar] -> [out..., W]
  kraus_ext_.reserve(kraus_.size());
  for (const Mat& k : kraus_) {
    Mat k2 = Mat::Zero(static_cast<Eigen::Index>(d_out_) * d_w_,
                       static_cast<Eigen::Index>(d_a_) * d_w_ * d_abar_);
    for (int o = 0; o < d_out_; ++o)
      for (int a = 0; a < d_a_; ++a)
        for (int ab = 0; ab < d_abar_; ++ab) {
          cd val = k(o, a * d_abar_ + ab);
          if (val == cd(0.0, 0.0)) continue;
          for (int w = 0; w < d_w_; ++w)
            k2(static_cast<Eigen::Index>(o) * d_w_ + w,
               (static_cast<Eigen::Index>(a) * d_w_ + w) * d_abar_ + ab) = val;
        }
    kraus_ext_.push_back(std::move(k2));
  }

  outw_dims_ = out_dims_;
  outw_dims_.push_back(d_w_);
  bw_keep_ = b_idx_;
  bw_keep_.push_back(static_cast<int>(out_dims_.size()));

  Mat out0 = apply_raw(kraus_, rho_in_);
  rho_b0_ = partial_trace(out0, out_dims_, b_idx_);
  LogSupport ls = matrix_log_support(rho_b0_);
  b0_log_ = ls.log_on_support;
  b0_proj_ = ls.support_projector;
  b0_full_rank_ = (ls.rank == d_b_);

  Mat adj_lb0 = adjoint_raw(kraus_, embed_op(b0_log_, out_dims_, b_idx_));
  adj_lb0_ext_ = embed_op(adj_lb0, {d_a_, d_w_, d_abar_}, {0, 2});

  Mat off = Mat::Identity(d_b_, d_b_) - b0_proj_;
  leak_q_ = hermitize(adjoint_raw(kraus_ext_, embed_op(off, outw_dims_, b_idx_)));
}

Mat Problem::sigma(const Mat& v) const {
  Mat vf = kron(v, Mat::Identity(d_abar_, d_abar_));
  return hermitize(vf * rho_in_ * vf.adjoint());
}

Mat Problem::connected(const Mat& v) const {
  Mat outw = apply_raw(kraus_ext_, sigma(v));
  return partial_trace(outw, outw_dims_, bw_keep_);
}

Mat Problem::rho_w(const Mat& rho_bw) const {
  return partial_trace(rho_bw, {d_b_, d_w_}, {1});
}

EntropyValue Problem::objective(const Mat& v) const {
  Mat rbw = connected(v);
  Mat rw = rho_w(rbw);
  return relative_entropy(rbw, kron(rho_b0_, rw));
}

Mat Problem::gradient(const Mat& v) const {
  Mat sig = sigma(v);
  Mat outw = apply_raw(kraus_ext_, sig);
  Mat rbw = partial_trace(outw, outw_dims_, bw_keep_);
  Mat rw = rho_w(rbw);
  Mat lbw = matrix_log_support(rbw).log_on_support;
  Mat lw = matrix_log_support(rw).log_on_support;
  Mat l1 = adjoint_raw(kraus_ext_, embed_op(lbw, outw_dims_, bw_keep_));
  Mat l3 = kron(kron(Mat::Identity(d_a_, d_a_), lw),
                Mat::Identity(d_abar_, d_abar_));
  Mat g = l1 - adj_lb0_ext_ - l3;
  Mat c = g * sig - sig * g;
  Mat m = cd(0.0, 1.0) *
          partial_trace(c, {d_a_ * d_w_, d_abar_}, {0});
  return hermitize(m);
}

double Problem::leak(const Mat& v) const {
  return trace_prod(sigma(v), leak_q_).real();
}

Mat Problem::leak_gradient(const Mat& v) const {
  Mat sig = sigma(v);
  Mat c = leak_q_ * sig - sig * leak_q_;
  Mat m = cd(0.0, 1.0) * partial_trace(c, {d_a_ * d_w_, d_abar_}, {0});
  return hermitize(m);
}

Mat Problem::step(const Mat& v, const Mat& m, double s) {
  return exp_i(-s * m) * v;
}

// ---------------------------------------------------------------------------
// labeled wrappers
// ---------------------------------------------------------------------------

Problem make_problem(const DensityMatrix& rho_in, const KrausChannel& evolution,
                     const std::vector<std::string>& b_labels, int d_w,
                     const std::string& a_label) {
  const TensorSpace& in_sp = rho_in.space();
  if (!in_sp.has_label(a_label))
    throw Error("optimize: input state has no factor labeled '" + a_label + "'");
  if (!evolution.in_space.same_factors(in_sp))
    throw Error("optimize: evolution input space does not match the state space");
  if (b_labels.empty()) throw Error("optimize: empty B label set");

  int pa = in_sp.position(a_label);
  int d_a = in_sp.factor(pa).dim;
  std::vector<int> order{pa};
  for (int i = 0; i < in_sp.n_factors(); ++i)
    if (i != pa) order.push_back(i);
  std::vector<int> in_dims = in_sp.dims();
  Mat rho_c = permute_factors(rho_in.data(), in_dims, order);
  int d_abar = in_sp.dim() / d_a;

  // reorder Kraus columns from the evolution's factor order to [A, rest]
  std::vector<int> evo_order;
  evo_order.reserve(order.size());
  for (int i : order)
    evo_order.push_back(evolution.in_space.position(in_sp.factor(i).label));
  std::vector<Eigen::Index> cmap =
      composite_index_map(evolution.in_space.dims(), evo_order);
  std::vector<Mat> kraus_c;
  kraus_c.reserve(evolution.kraus.size());
  for (const Mat& k : evolution.kraus) {
    Mat kc(k.rows(), k.cols());
    for (Eigen::Index c = 0; c < k.cols(); ++c) kc.col(c) = k.col(cmap[c]);
    kraus_c.push_back(std::move(kc));
  }

  std::vector<int> b_idx = evolution.out_space.positions(b_labels);
  return Problem(std::move(rho_c), d_a, d_abar, std::move(kraus_c),
                 evolution.out_space.dims(), std::move(b_idx), d_w);
}

namespace {

TensorSpace bw_space(const KrausChannel& evolution,
                     const std::vector<std::string>& b_labels,
                     const IsometryCoupling& v) {
  std::vector<int> pos = evolution.out_space.positions(b_labels);
  std::sort(pos.begin(), pos.end());
  std::vector<Factor> fs;
  for (int p : pos) fs.push_back(evolution.out_space.factor(p));
  for (int i = 1; i < v.out_space.n_factors(); ++i)
    fs.push_back(v.out_space.factor(i));
  return TensorSpace(std::move(fs));
}

void check_coupling(const Problem& p, const IsometryCoupling& v) {
  if (v.d_a() != p.d_a() || v.d_w() != p.d_w())
    throw Error("optimize: coupling dimensions do not match the problem");
}

}  // namespace

DensityMatrix connected_state(const DensityMatrix& rho_in,
                              const IsometryCoupling& v,
                              const KrausChannel& evolution,
                              const std::vector<std::string>& b_labels) {
  Problem p = make_problem(rho_in, evolution, b_labels, v.d_w());
  check_coupling(p, v);
  return DensityMatrix(bw_space(evolution, b_labels, v), p.connected(v.v));
}

DensityMatrix disconnected_state(const DensityMatrix& rho_in,
                                 const IsometryCoupling& v,
                                 const KrausChannel& evolution,
                                 const std::vector<std::string>& b_labels) {
  Problem p = make_problem(rho_in, evolution, b_labels, v.d_w());
  check_coupling(p, v);
  Mat rbw = p.connected(v.v);
  return DensityMatrix(bw_space(evolution, b_labels, v),
                       kron(p.rho_b0(), p.rho_w(rbw)));
}

EntropyValue objective(const DensityMatrix& rho_in, const IsometryCoupling& v,
                       const KrausChannel& evolution,
                       const std::vector<std::string>& b_labels) {
  Problem p = make_problem(rho_in, evolution, b_labels, v.d_w());
  check_coupling(p, v);
  return p.objective(v.v);
}

HermitianObservable gradient(const DensityMatrix& rho_in,
                             const IsometryCoupling& v,
                             const KrausChannel& evolution,
                             const std::vector<std::string>& b_labels) {
  Problem p = make_problem(rho_in, evolution, b_labels, v.d_w());
  check_coupling(p, v);
  return HermitianObservable(v.out_space, p.gradient(v.v));
}

CouplingValue evaluate_coupling(const DensityMatrix& rho_in,
                                const IsometryCoupling& v,
                                const KrausChannel& evolution,
                                const std::vector<std::string>& b_labels) {
  Problem p = make_problem(rho_in, evolution, b_labels, v.d_w());
  check_coupling(p, v);
  CouplingValue out;
  Mat rbw = p.connected(v.v);
  Mat rw = p.rho_w(rbw);
  Mat rb = partial_trace(rbw, {p.d_b(), p.d_w()}, {0});
  out.mi_term = von_neumann_entropy(rb) + von_neumann_entropy(rw) -
                von_neumann_entropy(rbw);
  EntropyValue rel = relative_entropy(rb, p.rho_b0());
  out.relent_term = rel.value;
  out.objective = rel.is_finite()
                      ? EntropyValue::finite(out.mi_term + rel.value)
                      : EntropyValue::divergent();
  return out;
}

// ---------------------------------------------------------------------------
// divergence probe
// ---------------------------------------------------------------------------

namespace {

struct ProbeOutcome {
  bool divergent = false;
  Mat v;
  double leak = 0.0;
};

ProbeOutcome run_probe(const Problem& p) {
  ProbeOutcome out;
  if (p.rho_b0_full_rank()) return out;
  int d_a = p.d_a(), d_w = p.d_w();
  std::vector<Mat> starts;
  starts.push_back(identity_embedding(d_a, d_w).v);
  Rng rng(777);
  starts.push_back(random_isometry(d_a, d_w, rng).v);
  starts.push_back(random_isometry(d_a, d_w, rng).v);
  for (Mat v : starts) {
    double leak = p.leak(v);
    double eta = 0.2;
    for (int it = 0; it < 300 && leak <= kLeakCertify; ++it) {
      Mat m = p.leak_gradient(v);
      if (m.norm() < 1e-12) break;
      double s = eta;
      bool stepped = false;
      while (s > kStepFloor) {
        Mat vn = Problem::step(v, m, s);
        double ln = p.leak(vn);
        if (ln > leak) {
          v = std::move(vn);
          leak = ln;
          stepped = true;
          break;
        }
        s *= 0.5;
      }
      if (!stepped) break;
      eta = (s == eta) ? eta * 1.5 : s;
    }
    if (leak > out.leak) {
      out.leak = leak;
      out.v = v;
    }
    if (leak > kLeakCertify) {
      out.divergent = true;
      return out;
    }
  }
  return out;
}

}  // namespace

bool divergence_probe(const DensityMatrix& rho_in, const KrausChannel& evolution,
                      const std::vector<std::string>& b_labels) {
  int d_a = rho_in.space().factor(rho_in.space().position("A")).dim;
  Problem p = make_problem(rho_in, evolution, b_labels, d_a * d_a);
  return run_probe(p).divergent;
}

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

namespace {

struct RestartOutcome {
  double value = -kInf;
  Mat v;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  std::vector<double> trajectory;
};

RestartOutcome run_restart(const Problem& p, const OptimizerConfig& cfg,
                           std::uint64_t seed) {
  RestartOutcome out;
  Rng rng(seed);
  int d_a = p.d_a(), d_w = p.d_w();
  Mat v = random_isometry(d_a, d_w, rng).v;
  EntropyValue s = p.objective(v);
  for (int tries = 0; tries < 5 && !s.is_finite(); ++tries) {
    v = random_isometry(d_a, d_w, rng).v;
    s = p.objective(v);
  }
  if (!s.is_finite()) return out;
  double val = s.value;
  if (cfg.record_trajectory) out.trajectory.push_back(val);

  double eta = cfg.eta;
  int acc = 0;
  bool converged = false;
  double gn = 0.0;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    Mat m = p.gradient(v);
    gn = m.norm();
    if (gn < cfg.grad_tol) {
      converged = true;
      break;
    }
    bool stepped = false;
    double step = eta;
    while (step > kStepFloor) {
      Mat vn = Problem::step(v, m, step);
      EntropyValue sn = p.objective(vn);
      if (sn.is_finite() && sn.value > val) {
        v = std::move(vn);
        val = sn.value;
        stepped = true;
        break;
      }
      step *= cfg.backtrack;
    }
    if (!stepped) {
      converged = gn < kStallGradTol;
      break;
    }
    if (step == eta) {
      if (++acc >= 3) {
        eta *= 1.5;
        acc = 0;
      }
    } else {
      eta = step;
      acc = 0;
    }
    if ((it + 1) % kReorthoEvery == 0) v = polar_orthonormalize(v);
    if (cfg.record_trajectory) out.trajectory.push_back(val);
  }
  out.value = val;
  out.v = std::move(v);
  out.converged = converged;
  out.iterations = it;
  out.grad_norm = gn;
  return out;
}

StmiResult divergent_result(const Problem& p, const ProbeOutcome& probe,
                            int d_a, int d_w) {
  StmiResult res;
  res.value = kInf;
  res.divergent = true;
  res.converged = true;
  res.relent_term = kInf;
  Mat v = probe.v.size() > 0 ? probe.v : identity_embedding(d_a, d_w).v;
  Mat rbw = p.connected(v);
  Mat rw = p.rho_w(rbw);
  Mat rb = partial_trace(rbw, {p.d_b(), p.d_w()}, {0});
  res.mi_term = von_neumann_entropy(rb) + von_neumann_entropy(rw) -
                von_neumann_entropy(rbw);
  res.coupling = IsometryCoupling::make(
      TensorSpace::single("A", d_a),
      TensorSpace({Factor{"A", d_a}, Factor{"W", d_w}}),
      polar_orthonormalize(v));
  return res;
}

}  // namespace

StmiResult optimize_j1(const DensityMatrix& rho_in, const KrausChannel& evolution,
                       const std::vector<std::string>& b_labels,
                       const OptimizerConfig& cfg, const std::string& a_label) {
  int d_a = rho_in.space().factor(rho_in.space().position(a_label)).dim;
  int d_w = cfg.ancilla_dim > 0 ? cfg.ancilla_dim : d_a * d_a;
  Problem p = make_problem(rho_in, evolution, b_labels, d_w, a_label);

  if (!p.rho_b0_full_rank()) {
    ProbeOutcome probe = run_probe(p);
    if (probe.divergent) return divergent_result(p, probe, d_a, d_w);
  }

  int n = std::max(cfg.restarts, 1);
  std::vector<RestartOutcome> outs = parallel_map<RestartOutcome>(
      n, [&](int r) { return run_restart(p, cfg, cfg.seed + static_cast<std::uint64_t>(r)); });

  int best = 0;
  double lo = kInf, hi = -kInf;
  for (int r = 0; r < n; ++r) {
    if (outs[r].value > outs[best].value) best = r;
    if (outs[r].value > -kInf) {
      lo = std::min(lo, outs[r].value);
      hi = std::max(hi, outs[r].value);
    }
  }
  if (outs[best].value == -kInf)
    throw Error("optimize_j1: no restart produced a finite objective");

  StmiResult res;
  res.value = outs[best].value;
  res.converged = outs[best].converged;
  res.iterations = outs[best].iterations;
  res.grad_norm = outs[best].grad_norm;
  res.trajectory = std::move(outs[best].trajectory);
  res.restart_spread = hi - lo;
  res.restarts_disagree = res.restart_spread > kSpreadTol;
  res.coupling = IsometryCoupling::make(
      TensorSpace::single("A", d_a),
      TensorSpace({Factor{"A", d_a}, Factor{"W", d_w}}),
      polar_orthonormalize(outs[best].v));

  Mat rbw = p.connected(res.coupling.v);
  Mat rw = p.rho_w(rbw);
  Mat rb = partial_trace(rbw, {p.d_b(), p.d_w()}, {0});
  res.mi_term = von_neumann_entropy(rb) + von_neumann_entropy(rw) -
                von_neumann_entropy(rbw);
  res.relent_term = relative_entropy(rb, p.rho_b0()).value;
  return res;
}

// ---------------------------------------------------------------------------
// N = 2 stationarity
// ---------------------------------------------------------------------------

StationarityN2 stationarity_check_n2(const DensityMatrix& rho_in,
                                     const KrausChannel& evolution,
                                     const std::vector<std::string>& b_labels,
                                     const IsometryCoupling& v1) {
  int d_w = v1.d_w();
  Problem p1 = make_problem(rho_in, evolution, b_labels, d_w);
  check_coupling(p1, v1);
  int d_a = p1.d_a();
  int d_abar = rho_in.dim() / d_a;
  int d_out = 1;
  for (int d : evolution.out_space.dims()) d_out *= d;

  long sig2 = static_cast<long>(d_a) * d_a * d_w * d_w * d_abar * d_abar;
  long outw2 = static_cast<long>(d_out) * d_out * d_w * d_w;
  if (std::max(sig2, outw2) > (1L << 12))
    throw Error("stationarity_check_n2: doubled problem dimension exceeds 4096");

  // two independent copies, interleaved factors regrouped as [A1 A2 | Ab1 Ab2]
  std::vector<int> order{0, 2, 1, 3};

  // canonical [A, rest] single-copy pieces, same reordering as make_problem
  const TensorSpace& in_sp = rho_in.space();
  int pa = in_sp.position("A");
  std::vector<int> ord1{pa};
  for (int i = 0; i < in_sp.n_factors(); ++i)
    if (i != pa) ord1.push_back(i);
  Mat rho_c = permute_factors(rho_in.data(), in_sp.dims(), ord1);
  std::vector<int> evo_order;
  for (int i : ord1) evo_order.push_back(evolution.in_space.position(in_sp.factor(i).label));
  std::vector<Eigen::Index> cmap1 =
      composite_index_map(evolution.in_space.dims(), evo_order);
  std::vector<Mat> ks1;
  for (const Mat& k : evolution.kraus) {
    Mat kc(k.rows(), k.cols());
    for (Eigen::Index c = 0; c < k.cols(); ++c) kc.col(c) = k.col(cmap1[c]);
    ks1.push_back(std::move(kc));
  }

  Mat rho2 = permute_factors(kron(rho_c, rho_c), {d_a, d_abar, d_a, d_abar}, order);
  std::vector<Eigen::Index> cmap2 =
      composite_index_map({d_a, d_abar, d_a, d_abar}, order);
  std::vector<Mat> ks2;
  for (const Mat& ki : ks1)
    for (const Mat& kj : ks1) {
      Mat kk = kron(ki, kj);
      Mat kp(kk.rows(), kk.cols());
      for (Eigen::Index c = 0; c < kk.cols(); ++c) kp.col(c) = kk.col(cmap2[c]);
      ks2.push_back(std::move(kp));
    }

  std::vector<int> out_dims = evolution.out_space.dims();
  int n_out = static_cast<int>(out_dims.size());
  std::vector<int> out_dims2 = out_dims;
  out_dims2.insert(out_dims2.end(), out_dims.begin(), out_dims.end());
  std::vector<int> b_idx = evolution.out_space.positions(b_labels);
  std::vector<int> b_idx2 = b_idx;
  for (int b : b_idx) b_idx2.push_back(b + n_out);

  Problem p2(std::move(rho2), d_a * d_a, d_abar * d_abar, std::move(ks2),
             std::move(out_dims2), std::move(b_idx2), d_w * d_w);

  std::vector<Eigen::Index> rmap =
      composite_index_map({d_a, d_w, d_a, d_w}, order);
  Mat vk = kron(v1.v, v1.v);
  Mat v2(vk.rows(), vk.cols());
  for (Eigen::Index r = 0; r < vk.rows(); ++r) v2.row(r) = vk.row(rmap[r]);

  StationarityN2 out;
  out.grad_norm = p2.gradient(v2).norm();
  out.objective_half = p2.objective(v2).value / 2.0;
  out.j1 = p1.objective(v1.v).value;
  return out;
}

}  // namespace stmi
