#include "stmi/ansatz.hpp"

#include <algorithm>
#include <cmath>

namespace stmi {

namespace {

constexpr double kNullClamp = -50.0;

void check_state_dims(const KrausChannel& channel, const DensityMatrix& rho_in_a,
                      const DensityMatrix* rho_w) {
  if (channel.in_dim() != rho_in_a.dim())
    throw Error("ansatz: channel input dimension does not match the state");
  if (rho_w && rho_w->dim() != rho_in_a.dim())
    throw Error("ansatz: rho_w dimension does not match the input state");
}

double objective_raw(const std::vector<Mat>& kraus,
                     const std::vector<Mat>& kraus_tilde, const Mat& log_in,
                     const Mat& proj_in, const Mat& rho_w, bool* divergent) {
  Mat n_rho_w = apply_raw(kraus, rho_w);
  double leak =
      (n_rho_w.trace() - trace_prod(n_rho_w, proj_in)).real();
  if (leak > tol::support) {
    *divergent = true;
    return kInf;
  }
  *divergent = false;
  Mat gamma = apply_raw(kraus_tilde, rho_w);
  return -von_neumann_entropy(gamma) + von_neumann_entropy(rho_w) -
         trace_prod(n_rho_w, log_in).real();
}

}  // namespace

EntropyValue ansatz_objective(const AnsatzState& s) {
  check_state_dims(s.channel, s.rho_in_a, &s.rho_w);
  std::vector<Mat> kt = complement_kraus(s.channel.kraus);
  LogSupport ls = matrix_log_support(apply_raw(s.channel.kraus, s.rho_in_a.data()));
  bool divergent = false;
  double v = objective_raw(s.channel.kraus, kt, ls.log_on_support,
                           ls.support_projector, s.rho_w.data(), &divergent);
  return divergent ? EntropyValue::divergent() : EntropyValue::finite(v);
}

FixedPointResult fixed_point_solve(const KrausChannel& channel,
                                   const DensityMatrix& rho_in_a, double damping,
                                   int max_iters, double tol_in) {
  check_state_dims(channel, rho_in_a, nullptr);
  if (!(damping > 0.0 && damping <= 1.0))
    throw Error("fixed_point_solve: damping must lie in (0, 1]");
  if (max_iters < 1) throw Error("fixed_point_solve: max_iters must be positive");

  int d = channel.in_dim();
  std::vector<Mat> kt = complement_kraus(channel.kraus);
  Mat n_in = apply_raw(channel.kraus, rho_in_a.data());
  LogSupport ls_in = matrix_log_support(n_in);
  if (ls_in.rank < channel.out_dim())
    throw Error("fixed_point_solve: channel output of the input state is rank-deficient");
  Mat adj_log_in = adjoint_raw(channel.kraus, ls_in.log_on_support);

  Mat rho = Mat::Identity(d, d) / static_cast<double>(d);
  bool divergent = false;
  double best = objective_raw(channel.kraus, kt, ls_in.log_on_support,
                              ls_in.support_projector, rho, &divergent);
  Mat best_rho = rho;

  FixedPointResult res{
      AnsatzState{DensityMatrix::unchecked(TensorSpace::single("W", d), rho),
                  channel, rho_in_a},
      EntropyValue::finite(best)};
  res.history.push_back(best);

  int it = 0;
  for (; it < max_iters; ++it) {
    Mat gamma = apply_raw(kt, rho);
    LogSupport lg = matrix_log_support(gamma);
    Mat lg_clamped =
        lg.log_on_support +
        kNullClamp * (Mat::Identity(gamma.rows(), gamma.cols()) - lg.support_projector);
    Mat target = adjoint_raw(kt, lg_clamped) - adj_log_in;
    Mat lr = matrix_log_support(rho).log_on_support;
    Eigh es = eigh((1.0 - damping) * lr + damping * target);
    RVec ev = es.values.array() - es.values.maxCoeff();
    Mat next = es.vectors * ev.array().exp().matrix().asDiagonal() *
               es.vectors.adjoint();
    next /= next.trace().real();
    next = hermitize(next);
    double delta = one_norm(next - rho);
    rho = next;
    double obj = objective_raw(channel.kraus, kt, ls_in.log_on_support,
                               ls_in.support_projector, rho, &divergent);
    res.history.push_back(obj);
    if (!divergent && obj > best) {
      best = obj;
      best_rho = rho;
    }
    if (delta < tol_in) {
      res.converged = true;
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.objective = EntropyValue::finite(best);
  res.state.rho_w =
      DensityMatrix::unchecked(TensorSpace::single("W", d), best_rho);
  return res;
}

ClosedFormUnitary closed_form_unitary(const DensityMatrix& rho_in_a) {
  int d = rho_in_a.dim();
  LogSupport ls = matrix_log_support(rho_in_a.data());
  Mat inv = inv_on_support(rho_in_a.data());
  double z = inv.trace().real();
  Mat rho_w = hermitize(inv / z);
  ClosedFormUnitary out{
      DensityMatrix::unchecked(TensorSpace::single("W", d), rho_w),
      EntropyValue::finite(std::log(z))};
  if (ls.rank < d) out.j1 = EntropyValue::divergent();
  return out;
}

double divergent_part_dephasing(double epsilon, double p) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw Error("divergent_part_dephasing: epsilon must lie in (0, 1)");
  if (!(p > 0.0 && p < 1.0))
    throw Error("divergent_part_dephasing: p must lie in (0, 1)");
  return -2.0 * std::log(epsilon);
}

namespace {

std::vector<double> linspace(double lo, double hi, int n, bool endpoint = true) {
  std::vector<double> out;
  out.reserve(n);
  double denom = endpoint ? n - 1.0 : static_cast<double>(n);
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / denom);
  return out;
}

Mat bloch(const double n[3]) {
  Mat m(2, 2);
  m(0, 0) = cd(1.0 + n[2], 0.0);
  m(0, 1) = cd(n[0], -n[1]);
  m(1, 0) = cd(n[0], n[1]);
  m(1, 1) = cd(1.0 - n[2], 0.0);
  return 0.5 * m;
}

}  // namespace

BlochMax bloch_maximize(const std::function<double(const Mat&)>& fn) {
  BlochMax best;
  best.value = -kInf;
  auto consider = [&](const double n[3]) {
    double o = fn(bloch(n));
    if (std::isfinite(o) && o > best.value) {
      best.value = o;
      std::copy(n, n + 3, best.n.begin());
      return true;
    }
    return false;
  };
  std::vector<double> radii = linspace(0.02, 0.98, 14);
  radii.push_back(0.999);
  radii.push_back(0.9999);
  for (double r : radii)
    for (double th : linspace(0.0, M_PI, 11))
      for (double ph : linspace(0.0, 2.0 * M_PI, 8, false)) {
        double n[3] = {r * std::sin(th) * std::cos(ph),
                       r * std::sin(th) * std::sin(ph), r * std::cos(th)};
        consider(n);
      }
  if (best.value == -kInf)
    throw Error("bloch_maximize: objective is nowhere finite on the grid");
  double step = 0.08;
  for (int round = 0; round < 40; ++round) {
    bool improved = false;
    for (int c = 0; c < 3; ++c)
      for (int sgn : {+1, -1}) {
        double n2[3] = {best.n[0], best.n[1], best.n[2]};
        n2[c] += sgn * step;
        double norm = std::sqrt(n2[0] * n2[0] + n2[1] * n2[1] + n2[2] * n2[2]);
        if (norm >= 1.0)
          for (double& x : n2) x *= 0.999999 / norm;
        if (consider(n2)) improved = true;
      }
    if (!improved) {
      step /= 2.0;
      if (step < 1e-6) break;
    }
  }
  return best;
}

namespace {

BlochMax bloch_scan(const std::vector<Mat>& kraus, const std::vector<Mat>& kt,
                    const Mat& log_in, const Mat& proj_in) {
  return bloch_maximize([&](const Mat& rho_w) {
    bool div = false;
    double o = objective_raw(kraus, kt, log_in, proj_in, rho_w, &div);
    return div ? -kInf : o;
  });
}

}  // namespace

AnsatzSolveResult ansatz_solve(const KrausChannel& channel,
                               const DensityMatrix& rho_in_a, double damping,
                               int max_iters, double tol_in) {
  const int d_in = channel.in_dim();
  std::vector<Mat> kt = complement_kraus(channel.kraus);
  LogSupport ls = matrix_log_support(apply_raw(channel.kraus, rho_in_a.data()));

  if (ls.rank < channel.out_dim()) {
    // The fixed point needs N(rho_in) full rank.  The maximally mixed ansatz
    // state has the widest output support, so it decides divergence.
    Mat mix = Mat::Identity(d_in, d_in) / static_cast<double>(d_in);
    bool div = false;
    double v = objective_raw(channel.kraus, kt, ls.log_on_support,
                             ls.support_projector, mix, &div);
    EntropyValue val =
        div ? EntropyValue::divergent() : EntropyValue::finite(v);
    AnsatzSolveResult out{
        AnsatzState{
            DensityMatrix::unchecked(TensorSpace::single("W", d_in), mix),
            channel, rho_in_a},
        val, val, EntropyValue{}, div, 0, false};
    if (!div && d_in == 2) {
      BlochMax scan =
          bloch_scan(channel.kraus, kt, ls.log_on_support, ls.support_projector);
      out.grid_objective = EntropyValue::finite(scan.value);
      if (scan.value > out.objective.value) {
        out.objective = EntropyValue::finite(scan.value);
        out.state.rho_w = DensityMatrix::unchecked(TensorSpace::single("W", 2),
                                                   bloch(scan.n.data()));
      }
    }
    return out;
  }

  FixedPointResult fp = fixed_point_solve(channel, rho_in_a, damping, max_iters, tol_in);
  AnsatzSolveResult out{fp.state,      fp.objective,  fp.objective,
                        EntropyValue{}, fp.converged, fp.iterations,
                        false};
  if (d_in != 2) return out;

  BlochMax scan =
      bloch_scan(channel.kraus, kt, ls.log_on_support, ls.support_projector);
  out.grid_objective = EntropyValue::finite(scan.value);
  out.routes_disagree =
      std::abs(scan.value - fp.objective.value) > 1e-2;
  if (scan.value > out.objective.value) {
    out.objective = EntropyValue::finite(scan.value);
    out.state.rho_w = DensityMatrix::unchecked(TensorSpace::single("W", 2),
                                               bloch(scan.n.data()));
  }
  return out;
}

}  // namespace stmi
