// Acceptance gate: one pass/fail line per criterion, exit 0 only when all
// criteria hold.  Run through ctest or directly from the build tree.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stmi/ansatz.hpp"
#include "stmi/bounds.hpp"
#include "stmi/channel.hpp"
#include "stmi/classical.hpp"
#include "stmi/core.hpp"
#include "stmi/harness.hpp"
#include "stmi/models.hpp"
#include "stmi/optimizer.hpp"
#include "stmi/petz.hpp"

using namespace stmi;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void run(int id, const char* name, const std::function<Outcome()>& fn) {
  Clock::time_point t0 = Clock::now();
  Outcome out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  if (!out.pass) ++g_failures;
  std::printf("[%02d] %s %s: %s (%.1fs)\n", id, out.pass ? "PASS" : "FAIL",
              name, out.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

TensorSpace a2() { return TensorSpace::single("A", 2); }

DensityMatrix qubit_diag(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return DensityMatrix::unchecked(a2(), m);
}

KrausChannel random_qubit_channel(Rng& rng, int env_dim) {
  TensorSpace us({Factor{"A", 2}, Factor{"E", env_dim}});
  Mat u = random_unitary(2 * env_dim, rng);
  Mat e = Mat::Zero(env_dim, env_dim);
  e(0, 0) = 1.0;
  DensityMatrix env =
      DensityMatrix::unchecked(TensorSpace::single("E", env_dim), e);
  return channel_from_unitary(u, us, env, {"A"});
}

RMat random_stochastic(int rows, int cols, Rng& rng) {
  RMat m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (int r = 0; r < rows; ++r) {
      double x = -std::log(1.0 - rng.uniform());
      m(r, c) = x;
      sum += x;
    }
    m.col(c) /= sum;
  }
  return m;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

double coef_a(double b) {
  return std::exp(-2.0 * b) * (1.0 + 1.0 / std::tanh(b)) *
         (1.0 + b + b / std::tanh(b)) * std::tanh(b);
}

double coef_b(double b) { return -b / (std::sinh(b) * std::cosh(b)); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

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

Outcome closed_form_oracle() {
  Clock::time_point t0 = Clock::now();
  Rng rng(101);
  KrausChannel ch = unitary_channel(random_unitary(2, rng), a2());
  OptimizerConfig oc;
  oc.restarts = 4;
  oc.max_iters = 3000;
  oc.seed = 7;

  double worst = 0.0;
  auto check = [&](const DensityMatrix& rho, double target) {
    AnsatzSolveResult ar = ansatz_solve(ch, rho);
    StmiResult vr = optimize_j1(rho, ch, {"A"}, oc);
    worst = std::max(worst, std::abs(ar.objective.value - target));
    worst = std::max(worst, std::abs(vr.value - target));
  };
  check(qubit_diag(0.9, 0.1), 2.407945608652);
  check(qubit_diag(0.5, 0.5), std::log(4.0));

  double secs = seconds_since(t0);
  std::ostringstream d;
  d << "worst |J - log tr rho^-1| = " << worst << ", " << secs << "s";
  return {worst <= 1e-3 && secs < 5.0, d.str()};
}

Outcome depolarizing_limit() {
  Clock::time_point t0 = Clock::now();
  double p = 0.999;
  AnsatzSolveResult r = ansatz_solve(depolarizing(p), qubit_diag(1.0, 0.0));
  double j = r.objective.value;
  double beta = std::atanh(trace_prod(r.state.rho_w.data(), pauli_z()).real());
  double pred = coef_a(beta) * (1.0 - p) * (1.0 - p) +
                coef_b(beta) * (1.0 - p) * (1.0 - p) * (1.0 - p);
  double relerr = std::abs(j - pred) / pred;
  double beta_target = -0.72 - 0.68 * (1.0 - p);
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << "J = " << j << ", pred = " << pred << " (relerr " << relerr
    << "), beta = " << beta << " vs " << beta_target;
  return {relerr <= 0.05 && std::abs(beta - beta_target) <= 0.05 &&
              secs < 30.0,
          d.str()};
}

Outcome dephasing_divergence() {
  Clock::time_point t0 = Clock::now();
  std::vector<double> eps{1e-2, 1e-3, 1e-4};
  std::vector<double> x;
  for (double e : eps) x.push_back(-std::log(e));
  std::ostringstream d;
  bool ok = true;
  for (double p : {0.3, 0.6, 0.9}) {
    std::vector<double> j;
    for (double e : eps) {
      // pure input tilted off the dephasing axis by a Bloch angle ~ e
      Mat m = 0.5 * (Mat::Identity(2, 2) + e * pauli_x() +
                     std::sqrt(1.0 - e * e) * pauli_z());
      DensityMatrix rho(TensorSpace::single("A", 2), m);
      AnsatzSolveResult r = ansatz_solve(dephasing(p), rho);
      j.push_back(r.objective.value);
    }
    double slope = fit_slope(x, j);
    ok = ok && std::abs(slope - 2.0) <= 0.1;
    d << "p=" << p << " slope=" << slope << " ";
  }
  double secs = seconds_since(t0);
  return {ok && secs < 120.0, d.str()};
}

Outcome reduction_to_mi() {
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 2}});
  KrausChannel id = identity_channel(sp);
  double worst = 0.0;
  int nonconv = 0;
  for (int i = 0; i < 20; ++i) {
    DensityMatrix rho = random_density_matrix(sp, 1000 + i, 4);
    OptimizerConfig oc;
    oc.restarts = 8;
    oc.max_iters = 5000;
    oc.seed = static_cast<std::uint64_t>(i);
    StmiResult r = optimize_j1(rho, id, {"B"}, oc);
    if (!r.converged) ++nonconv;
    double mi = mutual_information(rho, {"A"}, {"B"});
    worst = std::max(worst, std::abs(r.value - mi));
  }
  std::ostringstream d;
  d << "20 states, worst |J - I(A:B)| = " << worst << ", " << nonconv
    << " non-converged";
  return {worst <= 1e-3 && nonconv == 0, d.str()};
}

Outcome correlator_bounds() {
  Clock::time_point t0 = Clock::now();
  Rng rng(7);
  int failures = 0;
  double worst = kInf;
  for (int i = 0; i < 200; ++i) {
    KrausChannel ch = random_qubit_channel(rng, 2 + (i % 2));
    DensityMatrix rho =
        DensityMatrix::unchecked(a2(), random_rho(2, 2, rng));
    HermitianObservable oa(a2(), random_hermitian(2, rng));
    HermitianObservable ob(a2(), random_hermitian(2, rng));
    Theorem1Report rep = verify_theorem1(rho, ch, oa, ob);
    worst = std::min({worst, rep.margin_retarded, rep.margin_symmetric,
                      rep.margin_mi});
    if (!rep.ok) ++failures;
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << "200 instances, " << failures << " violations, worst margin = "
    << worst << ", " << secs << "s";
  return {failures == 0 && secs < 300.0, d.str()};
}

Outcome superdensity_bounds() {
  Rng rng(8);
  int failures = 0;
  double worst_margin = kInf;
  double worst_ident = 0.0;
  for (int i = 0; i < 100; ++i) {
    KrausChannel ch = random_qubit_channel(rng, 2 + (i % 2));
    DensityMatrix rho =
        DensityMatrix::unchecked(a2(), random_rho(2, 2, rng));
    Mat h = random_hermitian(2, rng);
    h -= (h.trace() / 2.0) * Mat::Identity(2, 2);
    HermitianObservable oa(a2(), h);
    HermitianObservable ob(a2(), random_hermitian(2, rng));
    SuperdensityReport rep = superdensity_bound(rho, ch, oa, ob);
    double ident = std::abs(rep.two_point_connected - rep.two_point_expected);
    worst_ident = std::max(worst_ident, ident);
    worst_margin = std::min({worst_margin, rep.margin_j, rep.margin_mi});
    if (!rep.ok || ident > 1e-10) ++failures;
  }
  std::ostringstream d;
  d << "100 instances, " << failures << " violations, worst margin = "
    << worst_margin << ", worst two-point residue = " << worst_ident;
  return {failures == 0, d.str()};
}

Outcome gradient_check() {
  Rng rng(15);
  TensorSpace sp({Factor{"A", 2}, Factor{"Abar", 2}});
  DensityMatrix rho(sp, random_rho(4, 4, rng));
  TensorSpace us({Factor{"A", 2}, Factor{"Abar", 2}, Factor{"E", 2}});
  Mat e0 = Mat::Zero(2, 2);
  e0(0, 0) = 1.0;
  DensityMatrix env =
      DensityMatrix::unchecked(TensorSpace::single("E", 2), e0);
  KrausChannel ch =
      channel_from_unitary(random_unitary(8, rng), us, env, {"A", "Abar"});
  IsometryCoupling v = random_isometry(2, 4, rng);
  HermitianObservable m = gradient(rho, v, ch, {"A"});

  double eps = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Mat t = random_hermitian(8, rng);
    auto value_at = [&](double e) {
      Mat vv = exp_i(-e * t) * v.v;
      return objective(rho,
                       IsometryCoupling::make(v.in_space, v.out_space, vv),
                       ch, {"A"})
          .value;
    };
    double fd = (value_at(eps) - value_at(-eps)) / (2.0 * eps);
    double an = trace_prod(t, m.data).real();
    worst = std::max(worst,
                     std::abs(fd - an) / std::max(std::abs(an), 1e-9));
  }
  std::ostringstream d;
  d << "50 directions, worst relative error = " << worst;
  return {worst < 1e-5, d.str()};
}

Outcome ansatz_stationarity() {
  double worst = 0.0;
  int bad = 0;
  for (int i = 0; i < 20; ++i) {
    Rng rng(3000 + i);
    KrausChannel ch = random_qubit_channel(rng, 2);
    DensityMatrix rho =
        DensityMatrix::unchecked(a2(), random_rho(2, 2, rng));
    FixedPointResult fp = fixed_point_solve(ch, rho);
    if (!fp.converged || fp.objective.support_violation) {
      ++bad;
      continue;
    }
    IsometryCoupling v = swap_coupling_from_rho_w(fp.state.rho_w);
    double g = gradient(rho, v, ch, {"A"}).data.norm();
    worst = std::max(worst, g);
  }
  std::ostringstream d;
  d << "20 instances, worst gradient norm at the fixed point = " << worst
    << ", " << bad << " non-converged";
  return {worst < 1e-5 && bad == 0, d.str()};
}

Outcome doubled_stationarity() {
  double worst_grad = 0.0, worst_diff = 0.0;
  int bad = 0;
  for (int i = 0; i < 10; ++i) {
    Rng rng(909 + 1315423911ULL * static_cast<std::uint64_t>(i + 1));
    Mat psi = rng.cgauss(2, 1);
    psi /= psi.norm();
    DensityMatrix rho = DensityMatrix::unchecked(a2(), psi * psi.adjoint());
    double p = 0.25 + 0.5 * rng.uniform();
    KrausChannel ch = compose(depolarizing(p),
                              unitary_channel(random_unitary(2, rng), a2()));
    OptimizerConfig oc;
    oc.restarts = 8;
    oc.max_iters = 5000;
    oc.seed = 909 + static_cast<std::uint64_t>(i);
    StmiResult r = optimize_j1(rho, ch, {"A"}, oc);
    if (!r.converged) ++bad;
    StationarityN2 s = stationarity_check_n2(rho, ch, {"A"}, r.coupling);
    worst_grad = std::max(worst_grad, s.grad_norm);
    worst_diff = std::max(worst_diff, std::abs(s.objective_half - s.j1));
  }
  std::ostringstream d;
  d << "10 instances, worst doubled gradient = " << worst_grad
    << ", worst |objective/2 - J1| = " << worst_diff;
  return {worst_grad < 1e-5 && worst_diff < 1e-6 && bad == 0, d.str()};
}

Outcome mbl_plateau() {
  Clock::time_point t0 = Clock::now();
  MblParams p;
  p.L = 8;
  p.w = 10.0;
  p.xi = 2.0;
  p.seed = 12;
  TimeSeriesOptions opt;
  opt.times = {2.0, 4.0, 8.0, 16.0, 32.0};
  opt.alphas = {0.0, 0.05, 0.1};
  opt.method = "ansatz";
  opt.env = EnvKind::mixed;
  opt.site = 4;
  std::vector<TimeSeriesPoint> pts = stmi_time_series(p, opt);

  bool ok = true;
  std::ostringstream d;
  for (double alpha : {0.05, 0.1}) {
    std::vector<double> js;
    for (const auto& pt : pts)
      if (std::abs(pt.alpha - alpha) < 1e-12) js.push_back(pt.j1);
    double med = median(js);
    double target = -2.0 * std::log(alpha);
    ok = ok && js.size() == 5 && std::abs(med - target) <= 1.0;
    d << "alpha=" << alpha << " median=" << med << " target=" << target
      << " ";
  }
  int inf_count = 0, zero_count = 0;
  for (const auto& pt : pts)
    if (pt.alpha == 0.0) {
      ++zero_count;
      if (std::isinf(pt.j1)) ++inf_count;
    }
  ok = ok && zero_count == 5 && inf_count == 5;
  d << "alpha=0 divergent " << inf_count << "/" << zero_count;
  double secs = seconds_since(t0);
  return {ok && secs < 600.0, d.str()};
}

Outcome floquet_decay() {
  FloquetParams p;
  TimeSeriesOptions opt;
  opt.times = {1.0, 5.0, 10.0, 20.0};
  opt.alphas = {0.0, M_PI / 8.0, M_PI / 4.0};
  opt.epsilon = 1e-5;
  opt.method = "ansatz";
  opt.env = EnvKind::mixed;
  opt.site = 4;
  std::vector<TimeSeriesPoint> pts = stmi_time_series(p, opt);

  bool ok = true;
  std::ostringstream d;
  for (double alpha : {0.0, M_PI / 8.0, M_PI / 4.0}) {
    double j1 = -1.0, j20 = -1.0;
    for (const auto& pt : pts) {
      if (std::abs(pt.alpha - alpha) > 1e-12) continue;
      if (pt.t == 1.0) j1 = pt.j1;
      if (pt.t == 20.0) j20 = pt.j1;
    }
    ok = ok && j20 < 0.05 && j1 > 0.4;
    d << "alpha=" << alpha << " J(1)=" << j1 << " J(20)=" << j20 << " ";
  }
  return {ok, d.str()};
}

Outcome entangled_input_counterexample() {
  AppendixCReport rep = appendix_c_test({1e-2, 1e-3, 1e-4});
  std::ostringstream d;
  d << "slopes: direct = " << rep.xa_slope << " (want 1.00 +- 0.05), swap = "
    << rep.swap_slope << " (want 0.75 +- 0.05), ratio = " << rep.slope_ratio;
  return {rep.ok, d.str()};
}

Outcome classical_bounds() {
  int failures = 0;
  double worst_margin = kInf;
  double worst_cmi = 0.0;
  int copy_violations = 0;
  for (int idx = 0; idx < 500; ++idx) {
    Rng rng(808 + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(idx + 1));
    auto rint = [&](int lo, int hi) {
      return lo +
             static_cast<int>(rng.raw() %
                              static_cast<std::uint64_t>(hi - lo + 1));
    };
    int na = rint(2, 4);
    int nab = rint(2, 3);
    int nb = rint(2, 4);
    int nbb = rint(2, 3);
    TensorSpace in_space({Factor{"A", na}, Factor{"Ab", nab}});
    TensorSpace out_space({Factor{"B", nb}, Factor{"Bb", nbb}});
    RMat probs = random_stochastic(na * nab, 1, rng);
    Distribution p_in(in_space, probs.col(0));
    StochasticMap m = StochasticMap::make(
        in_space, out_space, random_stochastic(nb * nbb, na * nab, rng));
    RMat n_a = random_stochastic(na, na, rng) - RMat::Identity(na, na);
    RVec o_b(nb), o_a(na);
    for (int i = 0; i < nb; ++i) o_b(i) = rng.gauss();
    for (int i = 0; i < na; ++i) o_a(i) = rng.gauss();
    ClassicalBoundsReport rep =
        verify_classical_bounds(p_in, m, n_a, o_b, o_a, {"B"});
    int nwg = rint(2, 3);
    TensorSpace k_out({Factor{"A", na}, Factor{"Wg", nwg}});
    StochasticMap k = StochasticMap::make(
        TensorSpace::single("A", na), k_out,
        random_stochastic(na * nwg, na, rng));
    double cmi = coupling_record_cmi(p_in, m, k, {"B"});

    worst_margin = std::min(
        {worst_margin, rep.margin_response, rep.margin_correlation});
    worst_cmi = std::max(worst_cmi, cmi);
    if (rep.j_value < rep.copy_mi - 1e-9) ++copy_violations;
    if (!rep.ok || cmi >= 1e-12) ++failures;
  }
  std::ostringstream d;
  d << "500 instances, " << failures << " violations, worst margin = "
    << worst_margin << ", worst record CMI = " << worst_cmi << ", "
    << copy_violations << " copy-MI violations";
  return {failures == 0 && copy_violations == 0, d.str()};
}

Outcome recovery_map() {
  double worst_dist = 0.0, worst_mirror = 0.0;
  for (int i = 0; i < 5; ++i) {
    Rng rng(7000 + i);
    DensityMatrix rho = markov_chain_state(rng);
    DensityMatrix rho_ab = partial_trace(rho, {"A", "B"});
    DensityMatrix rho_b = partial_trace(rho, {"B"});
    DensityMatrix rho_bc = partial_trace(rho, {"B", "C"});
    PetzResult rec = petz_map(rho_ab, rho_b, rho_bc);
    worst_dist = std::max(worst_dist,
                          trace_distance(rec.state.data(), rho.data()));
    TensorSpace sbc({Factor{"B", 2}, Factor{"C", 2}});
    for (int k = 0; k < 3; ++k) {
      Mat oa = random_hermitian(2, rng);
      Mat obc = random_hermitian(4, rng);
      HermitianObservable mir =
          mirror_operator(rho_b, rho_bc, HermitianObservable(sbc, obc));
      cd lhs = trace_prod(rho.data(), kron(oa, obc));
      cd rhs = trace_prod(rho_ab.data(), kron(oa, mir.data));
      worst_mirror = std::max(worst_mirror, std::abs(lhs - rhs));
    }
  }

  Rng rng(42);
  Mat ra = random_rho(2, 2, rng);
  Mat rc = random_rho(2, 2, rng);
  TensorSpace sac({Factor{"A", 2}, Factor{"C", 2}});
  DensityMatrix rho_in =
      DensityMatrix::unchecked(sac, kron(ra, rc));
  KrausChannel ch =
      unitary_channel(kron(random_unitary(2, rng), Mat::Identity(2, 2)), sac);
  OptimizerConfig oc;
  oc.restarts = 6;
  oc.max_iters = 4000;
  oc.seed = 42;
  MarkovReport rep = markov_check(rho_in, ch, "A", {"A"}, {"C"}, oc);

  std::ostringstream d;
  d << "markov states: worst recovery distance = " << worst_dist
    << ", worst mirror residue = " << worst_mirror
    << "; decoupled run: petz = " << rep.petz_reconstruction_error
    << ", mirror = " << rep.mirror_operator_check
    << ", markov = " << (rep.markov ? "yes" : "no");
  bool ok = worst_dist < 1e-8 && worst_mirror < 1e-8 && rep.markov &&
            rep.petz_reconstruction_error < 1e-8 &&
            rep.mirror_operator_check < 1e-8;
  return {ok, d.str()};
}

Outcome determinism() {
  fs::path dir = fs::temp_directory_path() / "stmi-acceptance";
  fs::create_directories(dir);
  fs::path out = dir / "det.csv";
  std::string text =
      "[run]\nkind = stmi-channel-sweep\noutput = " + out.string() +
      "\nseed = 3\n[channel]\nfamily = depolarizing\n[sweep]\np = 0.2, 0.6\n"
      "[method]\nmethod = both\n[optimizer]\nrestarts = 3\nmax_iters = 800\n";
  Config cfg = Config::parse_text(text, "det.ini");
  std::ostringstream log;

  setenv("STMI_WORKERS", "3", 1);
  int rc1 = run_experiment(cfg, log);
  std::string first = slurp(out);
  setenv("STMI_WORKERS", "1", 1);
  int rc2 = run_experiment(cfg, log);
  std::string second = slurp(out);
  unsetenv("STMI_WORKERS");

  bool ok = rc1 == kExitOk && rc2 == kExitOk && !first.empty() &&
            first == second;
  std::ostringstream d;
  d << "workers 3 vs 1: " << first.size() << " bytes, "
    << (first == second ? "identical" : "DIFFER");
  return {ok, d.str()};
}

}  // namespace

int main() {
  std::printf("stmi acceptance suite\n");
  run(1, "closed-form oracle", closed_form_oracle);
  run(2, "depolarizing limit", depolarizing_limit);
  run(3, "dephasing divergence", dephasing_divergence);
  run(4, "reduction to mutual information", reduction_to_mi);
  run(5, "correlator bounds", correlator_bounds);
  run(6, "superdensity bounds", superdensity_bounds);
  run(7, "gradient check", gradient_check);
  run(8, "ansatz stationarity", ansatz_stationarity);
  run(9, "doubled-system stationarity", doubled_stationarity);
  run(10, "mbl plateau", mbl_plateau);
  run(11, "floquet decay", floquet_decay);
  run(12, "entangled-input counterexample", entangled_input_counterexample);
  run(13, "classical bounds", classical_bounds);
  run(14, "recovery map", recovery_map);
  run(15, "determinism", determinism);

  std::printf("acceptance: %d/15 criteria passed\n", 15 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
