#include "stmi/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "stmi/ansatz.hpp"
#include "stmi/parallel.hpp"

namespace stmi {

namespace {

constexpr int kMaxDenseL = 12;

void check_mbl(const MblParams& p) {
  if (p.L < 2 || p.L > kMaxDenseL) {
    throw Error("mbl: L must be in [2, " + std::to_string(kMaxDenseL) + "]");
  }
  if (p.w <= 0.0 || p.xi <= 0.0) {
    throw Error("mbl: w and xi must be positive");
  }
}

void check_floquet(const FloquetParams& p) {
  if (p.L < 2 || p.L > kMaxDenseL) {
    throw Error("floquet: L must be in [2, " + std::to_string(kMaxDenseL) + "]");
  }
}

int resolve_site(int site, int L) {
  int s = site < 0 ? L / 2 : site;
  if (s >= L) throw Error("site index out of range");
  return s;
}

}  // namespace

DensityMatrix BlochState::density(const std::string& label) const {
  double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  if (n > 1.0 + 1e-12) throw Error("BlochState: |a| must not exceed 1");
  return DensityMatrix(TensorSpace::single(label, 2),
                       bloch_state(a[0], a[1], a[2]));
}

RVec mbl_energies(const MblParams& p) {
  check_mbl(p);
  const int L = p.L;
  Rng rg(p.seed);

  std::vector<double> h(L);
  for (int i = 0; i < L; ++i) h[i] = rg.uniform(-p.w, p.w);

  std::vector<double> jij(static_cast<size_t>(L) * L, 0.0);
  for (int i = 0; i < L; ++i) {
    for (int j = i + 1; j < L; ++j) {
      jij[static_cast<size_t>(i) * L + j] =
          std::exp(-std::abs(i - j) / p.xi) * rg.uniform(-p.w, p.w);
    }
  }

  struct Triple {
    int i, j, k;
    double v;
  };
  std::vector<Triple> jijk;
  if (p.include_three_body) {
    for (int i = 0; i < L; ++i) {
      for (int j = i + 1; j < L; ++j) {
        for (int k = j + 1; k < L; ++k) {
          jijk.push_back({i, j, k,
                          std::exp(-std::abs(i - k) / p.xi) *
                              rg.uniform(-p.w, p.w)});
        }
      }
    }
  }

  const int dim = 1 << L;
  RVec e(dim);
  std::vector<int> z(L);
  for (int s = 0; s < dim; ++s) {
    for (int i = 0; i < L; ++i) z[i] = 1 - 2 * ((s >> (L - 1 - i)) & 1);
    double v = 0.0;
    for (int i = 0; i < L; ++i) v += h[i] * z[i];
    for (int i = 0; i < L; ++i) {
      for (int j = i + 1; j < L; ++j) {
        v += jij[static_cast<size_t>(i) * L + j] * z[i] * z[j];
      }
    }
    for (const Triple& tr : jijk) v += tr.v * z[tr.i] * z[tr.j] * z[tr.k];
    e[s] = v;
  }
  return e;
}

Mat build_mbl_unitary(const MblParams& p, double t) {
  RVec e = mbl_energies(p);
  Mat u = Mat::Zero(e.size(), e.size());
  for (Eigen::Index s = 0; s < e.size(); ++s) {
    u(s, s) = std::exp(cd(0.0, -t * e[s]));
  }
  return u;
}

cd mbl_f(const MblParams& p, const RVec& energies, int site, double t) {
  const int L = p.L;
  if (energies.size() != (1 << L)) {
    throw Error("mbl_f: energies size does not match 2^L");
  }
  if (site < 0 || site >= L) throw Error("mbl_f: site out of range");
  const int n_env = 1 << (L - 1);
  cd tot = 0.0;
  for (int env = 0; env < n_env; ++env) {
    int hi = env >> (L - 1 - site);
    int lo = env & ((1 << (L - 1 - site)) - 1);
    int s0 = (hi << (L - site)) | lo;
    int s1 = s0 | (1 << (L - 1 - site));
    tot += std::exp(cd(0.0, -t * (energies[s0] - energies[s1])));
  }
  return tot / static_cast<double>(n_env);
}

KrausChannel dephasing_from_f(cd f, const std::string& label) {
  const double af = std::abs(f);
  if (af > 1.0 + 1e-12) throw Error("dephasing_from_f: |f| must not exceed 1");
  TensorSpace sp = TensorSpace::single(label, 2);
  Mat k1 = Mat::Zero(2, 2);
  Mat k2 = Mat::Zero(2, 2);
  if (af < 1e-300) {
    k1(0, 0) = 1.0;
    k2(1, 1) = 1.0;
  } else {
    cd u = f / af;
    double q = (1.0 + af) / 2.0;
    k1(0, 0) = std::sqrt(q);
    k1(1, 1) = std::sqrt(q) * std::conj(u);
    k2(0, 0) = std::sqrt(1.0 - q);
    k2(1, 1) = -std::sqrt(1.0 - q) * std::conj(u);
  }
  return KrausChannel::make(sp, sp, {k1, k2});
}

Mat build_floquet_unitary(const FloquetParams& p) {
  check_floquet(p);
  const int L = p.L;
  Mat rot = exp_i(-(p.tau / 2.0) * p.g * pauli_x());
  Mat ux = Mat::Identity(1, 1);
  for (int i = 0; i < L; ++i) ux = kron(ux, rot);

  const int dim = 1 << L;
  Mat uz = Mat::Zero(dim, dim);
  std::vector<int> z(L);
  for (int s = 0; s < dim; ++s) {
    for (int i = 0; i < L; ++i) z[i] = 1 - 2 * ((s >> (L - 1 - i)) & 1);
    double ez = 0.0;
    for (int j = 0; j + 1 < L; ++j) ez += z[j] * z[j + 1];
    for (int i = 0; i < L; ++i) ez += p.h * z[i];
    uz(s, s) = std::exp(cd(0.0, -p.tau * ez));
  }
  return ux * uz * ux;
}

KrausChannel effective_single_site_channel(const Mat& u, int L,
                                           const DensityMatrix& env_state,
                                           int site) {
  if (L < 2 || L > kMaxDenseL) {
    throw Error("effective_single_site_channel: L must be in [2, " +
                std::to_string(kMaxDenseL) + "]");
  }
  if (u.rows() != (1 << L) || u.cols() != (1 << L)) {
    throw Error("effective_single_site_channel: unitary is not 2^L x 2^L");
  }
  if (site < 0 || site >= L) {
    throw Error("effective_single_site_channel: site out of range");
  }
  const TensorSpace& es = env_state.space();
  if (es.n_factors() != L - 1) {
    throw Error("effective_single_site_channel: env_state needs L-1 factors");
  }
  std::vector<Factor> fs;
  fs.reserve(L);
  for (int j = 0; j < L; ++j) {
    if (j == site) {
      fs.push_back({"A", 2});
    } else {
      const Factor& f = es.factor(j < site ? j : j - 1);
      if (f.dim != 2) {
        throw Error("effective_single_site_channel: env factors must be qubits");
      }
      if (f.label == "A") {
        throw Error("effective_single_site_channel: env label A collides");
      }
      fs.push_back(f);
    }
  }
  KrausChannel ch =
      channel_from_unitary(u, TensorSpace(fs), env_state, {"A"});
  return compress_choi(ch);
}

DensityMatrix environment_state(int n_qubits, EnvKind kind, std::uint64_t seed) {
  if (n_qubits < 1) throw Error("environment_state: need at least one qubit");
  std::vector<Factor> fs;
  fs.reserve(n_qubits);
  for (int i = 0; i < n_qubits; ++i) {
    fs.push_back({"E" + std::to_string(i), 2});
  }
  TensorSpace sp(fs);

  const int dim = 1 << n_qubits;
  Mat data;
  switch (kind) {
    case EnvKind::zeros: {
      data = Mat::Zero(dim, dim);
      data(0, 0) = 1.0;
      break;
    }
    case EnvKind::mixed: {
      data = Mat::Identity(dim, dim) / static_cast<double>(dim);
      break;
    }
    case EnvKind::random_product: {
      Rng rg(seed);
      data = Mat::Identity(1, 1);
      for (int i = 0; i < n_qubits; ++i) {
        Vec psi = rg.cgauss(2, 1);
        psi /= psi.norm();
        data = kron(data, psi * psi.adjoint());
      }
      break;
    }
  }
  return DensityMatrix(sp, data);
}

DensityMatrix chi_state(double alpha, double epsilon, const std::string& label) {
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw Error("chi_state: epsilon must be in [0, 1]");
  }
  Vec chi(2);
  chi << std::cos(alpha), std::sin(alpha);
  Mat rho = (1.0 - epsilon) * (chi * chi.adjoint()) +
            (epsilon / 2.0) * Mat::Identity(2, 2);
  return DensityMatrix(TensorSpace::single(label, 2), rho);
}

namespace {

std::vector<TimeSeriesPoint> eval_methods(const KrausChannel& ch,
                                          const DensityMatrix& rho_in, double t,
                                          double alpha,
                                          const TimeSeriesOptions& opt) {
  const bool var = opt.method == "variational" || opt.method == "both";
  const bool ans = opt.method == "ansatz" || opt.method == "both";
  if (!var && !ans) {
    throw Error("stmi_time_series: unknown method " + opt.method);
  }
  std::vector<TimeSeriesPoint> rows;
  if (var) {
    StmiResult r = optimize_j1(rho_in, ch, {"A"}, opt.opt);
    rows.push_back(TimeSeriesPoint{t, alpha, opt.opt.seed, "variational",
                                   r.value, r.mi_term, r.relent_term,
                                   r.converged});
  }
  if (ans) {
    AnsatzSolveResult r = ansatz_solve(ch, rho_in);
    IsometryCoupling v = swap_coupling_from_rho_w(r.state.rho_w);
    CouplingValue cv = evaluate_coupling(rho_in, v, ch, {"A"});
    rows.push_back(TimeSeriesPoint{t, alpha, opt.opt.seed, "ansatz",
                                   r.objective.value, cv.mi_term,
                                   cv.relent_term, r.converged});
  }
  return rows;
}

std::vector<TimeSeriesPoint> flatten(std::vector<std::vector<TimeSeriesPoint>> rows) {
  std::vector<TimeSeriesPoint> out;
  for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

}  // namespace

std::vector<TimeSeriesPoint> stmi_time_series(const MblParams& p,
                                              const TimeSeriesOptions& opt) {
  check_mbl(p);
  const int site = resolve_site(opt.site, p.L);
  RVec energies = mbl_energies(p);

  struct Job {
    double t, alpha;
  };
  std::vector<Job> jobs;
  for (double t : opt.times) {
    for (double a : opt.alphas) jobs.push_back({t, a});
  }
  auto rows = parallel_map<std::vector<TimeSeriesPoint>>(
      static_cast<int>(jobs.size()), [&](int i) {
        const Job& jb = jobs[static_cast<size_t>(i)];
        KrausChannel ch =
            opt.env == EnvKind::mixed
                ? dephasing_from_f(mbl_f(p, energies, site, jb.t))
                : effective_single_site_channel(
                      build_mbl_unitary(p, jb.t), p.L,
                      environment_state(p.L - 1, opt.env, p.seed + 917), site);
        DensityMatrix rho_in = chi_state(jb.alpha, opt.epsilon);
        return eval_methods(ch, rho_in, jb.t, jb.alpha, opt);
      });
  return flatten(std::move(rows));
}

std::vector<TimeSeriesPoint> stmi_time_series(const FloquetParams& p,
                                              const TimeSeriesOptions& opt) {
  check_floquet(p);
  const int site = resolve_site(opt.site, p.L);

  std::vector<int> periods;
  periods.reserve(opt.times.size());
  for (double t : opt.times) {
    int n = static_cast<int>(std::lround(t));
    if (n < 0 || std::abs(t - n) > 1e-9) {
      throw Error("stmi_time_series: Floquet times must be whole period counts");
    }
    periods.push_back(n);
  }

  DensityMatrix env = environment_state(p.L - 1, opt.env, opt.opt.seed + 917);
  Mat uf = build_floquet_unitary(p);

  std::vector<int> uniq = periods;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::map<int, KrausChannel> channels;
  Mat un = Mat::Identity(uf.rows(), uf.cols());
  int cur = 0;
  for (int n : uniq) {
    for (; cur < n; ++cur) un = uf * un;
    channels.emplace(n, effective_single_site_channel(un, p.L, env, site));
  }

  struct Job {
    int n;
    double alpha;
  };
  std::vector<Job> jobs;
  for (int n : periods) {
    for (double a : opt.alphas) jobs.push_back({n, a});
  }
  auto rows = parallel_map<std::vector<TimeSeriesPoint>>(
      static_cast<int>(jobs.size()), [&](int i) {
        const Job& jb = jobs[static_cast<size_t>(i)];
        DensityMatrix rho_in = chi_state(jb.alpha, opt.epsilon);
        return eval_methods(channels.at(jb.n), rho_in,
                            static_cast<double>(jb.n), jb.alpha, opt);
      });
  return flatten(std::move(rows));
}

}  // namespace stmi
