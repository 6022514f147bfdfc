#include "stmi/classical.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace stmi {

namespace {

constexpr double kZero = 1e-300;
constexpr double kDistTol = 1e-12;

RVec reorder_vector(const RVec& v, const std::vector<Eigen::Index>& map) {
  RVec out(v.size());
  for (Eigen::Index x = 0; x < v.size(); ++x) out[x] = v[map[x]];
  return out;
}

// canonicalized classical instance: input composite (i, j) with the coupled
// factor most significant, outputs aggregated onto the sorted-B composite
struct Engine {
  int n_a = 0, n_abar = 0;
  int n_out = 0, n_b = 0;
  RVec pin;   // canonical input distribution
  RMat m;     // columns in canonical input order
  std::vector<int> b_of_out;
  RVec p_a, p_b0;
  TensorSpace a_space;
  TensorSpace b_space;
};

Engine build_engine(const Distribution& p_in, const StochasticMap& m,
                    std::vector<std::string> b_labels,
                    const std::string& a_label) {
  const TensorSpace& in_sp = p_in.space();
  if (!in_sp.has_label(a_label)) {
    throw Error("classical: input has no factor " + a_label);
  }
  if (!in_sp.same_factors(m.in_space)) {
    throw Error("classical: map input alphabet does not match the distribution");
  }

  Engine e;
  int pa = in_sp.position(a_label);
  e.a_space = in_sp.subspace({a_label});
  e.n_a = e.a_space.dim();
  e.n_abar = in_sp.dim() / e.n_a;

  std::vector<int> order{pa};
  for (int i = 0; i < in_sp.n_factors(); ++i) {
    if (i != pa) order.push_back(i);
  }
  e.pin = reorder_vector(p_in.probs(),
                         composite_index_map(in_sp.dims(), order));

  std::vector<int> morder;
  morder.reserve(order.size());
  for (int t : order) {
    morder.push_back(m.in_space.position(in_sp.factor(t).label));
  }
  std::vector<Eigen::Index> cmap =
      composite_index_map(m.in_space.dims(), morder);
  e.m.resize(m.out_dim(), m.in_dim());
  for (Eigen::Index c = 0; c < e.m.cols(); ++c) {
    e.m.col(c) = m.matrix.col(cmap[c]);
  }

  if (b_labels.empty()) b_labels = m.out_space.labels();
  std::vector<int> b_idx = m.out_space.positions(b_labels);
  std::sort(b_idx.begin(), b_idx.end());
  if (std::adjacent_find(b_idx.begin(), b_idx.end()) != b_idx.end()) {
    throw Error("classical: duplicate B labels");
  }
  std::vector<std::string> sorted_b;
  sorted_b.reserve(b_idx.size());
  for (int t : b_idx) sorted_b.push_back(m.out_space.factor(t).label);
  e.b_space = m.out_space.subspace(sorted_b);
  e.n_out = m.out_dim();
  e.n_b = e.b_space.dim();

  const std::vector<int> odims = m.out_space.dims();
  const int nf = static_cast<int>(odims.size());
  std::vector<int> dg(nf);
  e.b_of_out.assign(e.n_out, 0);
  for (int o = 0; o < e.n_out; ++o) {
    int x = o;
    for (int t = nf - 1; t >= 0; --t) {
      dg[t] = x % odims[t];
      x /= odims[t];
    }
    int b = 0;
    for (int t : b_idx) b = b * odims[t] + dg[t];
    e.b_of_out[o] = b;
  }

  e.p_a = RVec::Zero(e.n_a);
  for (int i = 0; i < e.n_a; ++i) {
    for (int j = 0; j < e.n_abar; ++j) e.p_a[i] += e.pin[i * e.n_abar + j];
  }
  RVec pout = e.m * e.pin;
  e.p_b0 = RVec::Zero(e.n_b);
  for (int o = 0; o < e.n_out; ++o) e.p_b0[e.b_of_out[o]] += pout[o];
  return e;
}

// T(kb; q, i) = sum_{l, j} M(kb l | q j) P_in(i, j), carrying the P_A(i) weight
RMat reduced_t(const Engine& e) {
  RMat t = RMat::Zero(e.n_b, static_cast<Eigen::Index>(e.n_a) * e.n_a);
  for (int o = 0; o < e.n_out; ++o) {
    int kb = e.b_of_out[o];
    for (int q = 0; q < e.n_a; ++q) {
      for (int j = 0; j < e.n_abar; ++j) {
        double mv = e.m(o, q * e.n_abar + j);
        if (mv == 0.0) continue;
        for (int i = 0; i < e.n_a; ++i) {
          t(kb, q * e.n_a + i) += mv * e.pin[i * e.n_abar + j];
        }
      }
    }
  }
  return t;
}

void check_coupling(const Engine& e, const StochasticMap& k, const char* who) {
  if (k.in_space.n_factors() != 1) {
    throw Error(std::string(who) + ": coupling input must be a single factor");
  }
  const Factor& af = k.in_space.factor(0);
  if (af.label != e.a_space.factor(0).label || af.dim != e.n_a) {
    throw Error(std::string(who) + ": coupling input factor mismatch");
  }
  if (k.out_space.n_factors() < 2 || k.out_space.factor(0).label != af.label ||
      k.out_space.factor(0).dim != af.dim) {
    throw Error(std::string(who) +
                ": coupling output must lead with the input factor");
  }
}

RMat connected_matrix(const Engine& e, const StochasticMap& k) {
  const int n_w = k.out_dim() / e.n_a;
  RMat pbw = RMat::Zero(e.n_b, n_w);
  for (int o = 0; o < e.n_out; ++o) {
    int kb = e.b_of_out[o];
    for (int q = 0; q < e.n_a; ++q) {
      for (int j = 0; j < e.n_abar; ++j) {
        double mv = e.m(o, q * e.n_abar + j);
        if (mv == 0.0) continue;
        for (int w = 0; w < n_w; ++w) {
          for (int i = 0; i < e.n_a; ++i) {
            pbw(kb, w) += mv * k.matrix(q * n_w + w, i) * e.pin[i * e.n_abar + j];
          }
        }
      }
    }
  }
  return pbw;
}

// D(P_BW | P_B0 x P_W) together with its I(B:W) + D(P_B | P_B0) split
struct Split {
  double d, mi, relent;
};

Split split_value(const RMat& pbw, const RVec& p_b0) {
  RVec pb = pbw.rowwise().sum();
  RVec pw = pbw.colwise().sum();
  double d = 0.0, mi = 0.0;
  for (Eigen::Index kb = 0; kb < pbw.rows(); ++kb) {
    for (Eigen::Index w = 0; w < pbw.cols(); ++w) {
      double v = pbw(kb, w);
      if (v <= kZero) continue;
      if (p_b0[kb] <= kZero || pw[w] <= kZero) return {kInf, kInf, kInf};
      d += v * std::log(v / (p_b0[kb] * pw[w]));
      mi += v * std::log(v / (pb[kb] * pw[w]));
    }
  }
  double relent = 0.0;
  for (Eigen::Index kb = 0; kb < pb.size(); ++kb) {
    if (pb[kb] <= kZero) continue;
    if (p_b0[kb] <= kZero) return {kInf, mi, kInf};
    relent += pb[kb] * std::log(pb[kb] / p_b0[kb]);
  }
  return {d, mi, relent};
}

RMat random_stochastic(int n_out, int n_in, Rng& rg) {
  RMat m(n_out, n_in);
  for (int j = 0; j < n_in; ++j) {
    double s = 0.0;
    for (int i = 0; i < n_out; ++i) {
      double x = -std::log(std::max(1.0 - rg.uniform(), kZero));
      m(i, j) = x;
      s += x;
    }
    m.col(j) /= s;
  }
  return m;
}

void check_generator(const RMat& n_a, int dim) {
  if (n_a.rows() != dim || n_a.cols() != dim) {
    throw Error("classical: generator must be square on the coupled alphabet");
  }
  for (int i = 0; i < dim; ++i) {
    if (std::abs(n_a.col(i).sum()) > 1e-9) {
      throw Error("classical: generator columns must sum to zero");
    }
    for (int j = 0; j < dim; ++j) {
      if (j != i && n_a(j, i) < -1e-12) {
        throw Error("classical: generator off-diagonals must be nonnegative");
      }
    }
  }
}

}  // namespace

Distribution::Distribution(TensorSpace space, RVec probs) {
  if (probs.size() != space.dim()) {
    throw Error("Distribution: size does not match the alphabet");
  }
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] < -kDistTol) throw Error("Distribution: negative probability");
    if (probs[i] < 0.0) probs[i] = 0.0;
  }
  if (std::abs(probs.sum() - 1.0) > kDistTol) {
    throw Error("Distribution: probabilities must sum to one");
  }
  space_ = std::move(space);
  probs_ = std::move(probs);
}

Distribution Distribution::unchecked(TensorSpace space, RVec probs) {
  Distribution d;
  d.space_ = std::move(space);
  d.probs_ = std::move(probs);
  return d;
}

StochasticMap StochasticMap::make(TensorSpace in, TensorSpace out, RMat m) {
  if (m.rows() != out.dim() || m.cols() != in.dim()) {
    throw Error("StochasticMap: matrix shape does not match the alphabets");
  }
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m(i, j) < -kDistTol) throw Error("StochasticMap: negative entry");
      if (m(i, j) < 0.0) m(i, j) = 0.0;
    }
    if (std::abs(m.col(j).sum() - 1.0) > kDistTol) {
      throw Error("StochasticMap: columns must sum to one");
    }
  }
  return StochasticMap{std::move(in), std::move(out), std::move(m)};
}

Distribution apply(const StochasticMap& m, const Distribution& p) {
  if (!p.space().same_factors(m.in_space)) {
    throw Error("apply: alphabet mismatch");
  }
  std::vector<int> morder;
  for (const Factor& f : p.space().factors()) {
    morder.push_back(m.in_space.position(f.label));
  }
  std::vector<Eigen::Index> cmap =
      composite_index_map(m.in_space.dims(), morder);
  RVec out = RVec::Zero(m.out_dim());
  for (Eigen::Index c = 0; c < m.matrix.cols(); ++c) {
    out += m.matrix.col(cmap[c]) * p.probs()[c];
  }
  return Distribution::unchecked(m.out_space, std::move(out));
}

Distribution marginal(const Distribution& p,
                      const std::vector<std::string>& keep) {
  std::vector<int> idx = p.space().positions(keep);
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    throw Error("marginal: duplicate labels");
  }
  std::vector<std::string> sorted;
  sorted.reserve(idx.size());
  for (int t : idx) sorted.push_back(p.space().factor(t).label);
  TensorSpace out_sp = p.space().subspace(sorted);

  const std::vector<int> dims = p.space().dims();
  const int nf = static_cast<int>(dims.size());
  std::vector<int> dg(nf);
  RVec out = RVec::Zero(out_sp.dim());
  for (Eigen::Index x = 0; x < p.probs().size(); ++x) {
    Eigen::Index rem = x;
    for (int t = nf - 1; t >= 0; --t) {
      dg[t] = static_cast<int>(rem % dims[t]);
      rem /= dims[t];
    }
    Eigen::Index b = 0;
    for (int t : idx) b = b * dims[t] + dg[t];
    out[b] += p.probs()[x];
  }
  return Distribution::unchecked(std::move(out_sp), std::move(out));
}

double kl_raw(const RVec& p, const RVec& q) {
  if (p.size() != q.size()) throw Error("kl_raw: size mismatch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= kZero) continue;
    if (q[i] <= kZero) return kInf;
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
  if (p.space().labels() != q.space().labels() ||
      p.space().dims() != q.space().dims()) {
    throw Error("kl_divergence: alphabet mismatch");
  }
  return kl_raw(p.probs(), q.probs());
}

Distribution classical_connected(const Distribution& p_in,
                                 const StochasticMap& m,
                                 const StochasticMap& k,
                                 const std::vector<std::string>& b_labels) {
  if (k.in_space.n_factors() != 1) {
    throw Error("classical_connected: coupling input must be a single factor");
  }
  Engine e = build_engine(p_in, m, b_labels, k.in_space.factor(0).label);
  check_coupling(e, k, "classical_connected");
  RMat pbw = connected_matrix(e, k);

  std::vector<std::string> w_labels = k.out_space.labels();
  w_labels.erase(w_labels.begin());
  TensorSpace sp = e.b_space.tensor(k.out_space.subspace(w_labels));
  RVec probs(pbw.size());
  for (Eigen::Index kb = 0; kb < pbw.rows(); ++kb) {
    for (Eigen::Index w = 0; w < pbw.cols(); ++w) {
      probs[kb * pbw.cols() + w] = pbw(kb, w);
    }
  }
  return Distribution(std::move(sp), std::move(probs));
}

Distribution classical_disconnected(const Distribution& p_in,
                                    const StochasticMap& m,
                                    const std::vector<std::string>& b_labels) {
  Engine e =
      build_engine(p_in, m, b_labels, p_in.space().factor(0).label);
  return Distribution(e.b_space, e.p_b0);
}

ClassicalStmiResult classical_stmi(const Distribution& p_in,
                                   const StochasticMap& m,
                                   const std::vector<std::string>& b_labels,
                                   const ClassicalOptimizerConfig& cfg,
                                   const std::string& a_label) {
  Engine e = build_engine(p_in, m, b_labels, a_label);
  RMat t = reduced_t(e);

  RMat c = RMat::Zero(e.n_a, e.n_a);
  for (int i = 0; i < e.n_a; ++i) {
    if (e.p_a[i] <= kZero) continue;
    for (int q = 0; q < e.n_a; ++q) {
      RVec tv = t.col(q * e.n_a + i) / e.p_a[i];
      c(q, i) = e.p_a[i] * kl_raw(tv, e.p_b0);
    }
  }

  ClassicalStmiResult res;
  std::vector<int> choice(e.n_a, 0);
  double jr = 0.0;
  for (int i = 0; i < e.n_a; ++i) {
    if (e.p_a[i] <= kZero) continue;
    int bq = 0;
    for (int q = 1; q < e.n_a; ++q) {
      if (c(q, i) > c(bq, i)) bq = q;
    }
    choice[i] = bq;
    jr += c(bq, i);
  }
  res.reduced_value = jr;
  res.divergent = !std::isfinite(jr);

  if (res.divergent) {
    res.ascent_value = kInf;
  } else {
    Rng rg(cfg.seed);
    double best = -kInf;
    for (int r = 0; r < cfg.restarts; ++r) {
      RMat k = random_stochastic(e.n_a, e.n_a, rg);
      RMat gain = (cfg.lr * c).array().exp();
      for (int it = 0; it < cfg.iters; ++it) {
        k = k.cwiseProduct(gain);
        for (int j = 0; j < e.n_a; ++j) k.col(j) /= k.col(j).sum();
      }
      best = std::max(best, k.cwiseProduct(c).sum());
    }
    res.ascent_value = best;
  }

  RVec p_abar = RVec::Zero(e.n_abar);
  for (int i = 0; i < e.n_a; ++i) {
    for (int j = 0; j < e.n_abar; ++j) p_abar[j] += e.pin[i * e.n_abar + j];
  }
  double fdiff = 0.0;
  for (int i = 0; i < e.n_a; ++i) {
    for (int j = 0; j < e.n_abar; ++j) {
      fdiff = std::max(
          fdiff, std::abs(e.pin[i * e.n_abar + j] - e.p_a[i] * p_abar[j]));
    }
  }
  res.factorized_input = fdiff <= 1e-12;
  if (res.factorized_input) {
    double fbest = -kInf;
    for (int q = 0; q < e.n_a; ++q) {
      RVec nu = RVec::Zero(e.n_b);
      for (int o = 0; o < e.n_out; ++o) {
        for (int j = 0; j < e.n_abar; ++j) {
          nu[e.b_of_out[o]] += e.m(o, q * e.n_abar + j) * p_abar[j];
        }
      }
      fbest = std::max(fbest, kl_raw(nu, e.p_b0));
    }
    res.factorized_value = fbest;
  }

  res.value = std::max(res.reduced_value, res.ascent_value);
  bool ascent_off = std::isfinite(jr) &&
                    std::abs(res.ascent_value - res.reduced_value) > 1e-6;
  bool fact_off = res.factorized_input && std::isfinite(jr) &&
                  std::abs(res.factorized_value - res.reduced_value) > 1e-6;
  res.routes_disagree = ascent_off || fact_off;

  const int n_w = e.n_a * e.n_a;
  RMat kmat = RMat::Zero(static_cast<Eigen::Index>(e.n_a) * n_w, e.n_a);
  for (int i = 0; i < e.n_a; ++i) {
    int q = choice[i];
    kmat(static_cast<Eigen::Index>(q) * n_w + q * e.n_a + i, i) = 1.0;
  }
  res.coupling = StochasticMap::make(
      e.a_space,
      TensorSpace({e.a_space.factor(0), Factor{"W", n_w}}),
      std::move(kmat));

  Split sp = split_value(connected_matrix(e, res.coupling), e.p_b0);
  res.mi_term = sp.mi;
  res.relent_term = sp.relent;
  return res;
}

double classical_response(const Distribution& p_in, const StochasticMap& m,
                          const RMat& n_a, const RVec& o_b,
                          const std::vector<std::string>& b_labels,
                          const std::string& a_label) {
  Engine e = build_engine(p_in, m, b_labels, a_label);
  check_generator(n_a, e.n_a);
  if (o_b.size() != e.n_b) {
    throw Error("classical_response: observable size does not match B");
  }
  double gr = 0.0;
  for (int o = 0; o < e.n_out; ++o) {
    double ob = o_b[e.b_of_out[o]];
    if (ob == 0.0) continue;
    for (int q = 0; q < e.n_a; ++q) {
      for (int j = 0; j < e.n_abar; ++j) {
        double mv = e.m(o, q * e.n_abar + j);
        if (mv == 0.0) continue;
        for (int i = 0; i < e.n_a; ++i) {
          gr += ob * mv * n_a(q, i) * e.pin[i * e.n_abar + j];
        }
      }
    }
  }
  return gr;
}

double coupling_record_cmi(const Distribution& p_in, const StochasticMap& m,
                           const StochasticMap& k,
                           const std::vector<std::string>& b_labels,
                           const std::string& a_label) {
  Engine e = build_engine(p_in, m, b_labels, a_label);
  check_coupling(e, k, "coupling_record_cmi");
  const int n_w = k.out_dim() / e.n_a;
  RMat t = reduced_t(e);

  double cmi = 0.0;
  RMat blk(e.n_b, n_w);
  for (int i = 0; i < e.n_a; ++i) {
    for (int q = 0; q < e.n_a; ++q) {
      for (int kb = 0; kb < e.n_b; ++kb) {
        for (int w = 0; w < n_w; ++w) {
          blk(kb, w) = t(kb, q * e.n_a + i) * k.matrix(q * n_w + w, i);
        }
      }
      double s = blk.sum();
      if (s < 1e-14) continue;
      RVec pk = blk.rowwise().sum();
      RVec pw = blk.colwise().sum();
      for (int kb = 0; kb < e.n_b; ++kb) {
        for (int w = 0; w < n_w; ++w) {
          if (blk(kb, w) > kZero) {
            cmi += blk(kb, w) * std::log(blk(kb, w) * s / (pk[kb] * pw[w]));
          }
        }
      }
    }
  }
  return cmi;
}

ClassicalBoundsReport verify_classical_bounds(
    const Distribution& p_in, const StochasticMap& m, const RMat& n_a,
    const RVec& o_b, const RVec& o_a, const std::vector<std::string>& b_labels,
    const std::string& a_label) {
  Engine e = build_engine(p_in, m, b_labels, a_label);
  check_generator(n_a, e.n_a);
  if (o_b.size() != e.n_b || o_a.size() != e.n_a) {
    throw Error("verify_classical_bounds: observable size mismatch");
  }

  ClassicalBoundsReport rep;
  rep.response = classical_response(p_in, m, n_a, o_b, b_labels, a_label);
  double nrm_n = 0.0;
  for (int i = 0; i < e.n_a; ++i) {
    nrm_n = std::max(nrm_n, n_a.col(i).cwiseAbs().sum());
  }
  double nrm_b = o_b.cwiseAbs().maxCoeff();
  double nrm_a = o_a.cwiseAbs().maxCoeff();

  if (nrm_n > kZero && nrm_b > kZero) {
    RMat k2 = RMat::Zero(static_cast<Eigen::Index>(e.n_a) * 2, e.n_a);
    for (int i = 0; i < e.n_a; ++i) {
      for (int j = 0; j < e.n_a; ++j) {
        double d = j == i ? 1.0 : 0.0;
        k2(static_cast<Eigen::Index>(j) * 2 + 0, i) =
            0.5 * (d + n_a(j, i) / nrm_n);
        k2(static_cast<Eigen::Index>(j) * 2 + 1, i) = 0.5 * d;
      }
    }
    StochasticMap resp = StochasticMap::make(
        e.a_space, TensorSpace({e.a_space.factor(0), Factor{"W", 2}}),
        std::move(k2));
    rep.coupling_value = split_value(connected_matrix(e, resp), e.p_b0).d;
    double ratio = rep.response / (nrm_b * nrm_n);
    rep.bound_response = ratio * ratio / 8.0;
  }
  rep.margin_response = rep.coupling_value - rep.bound_response;

  RMat kc = RMat::Zero(static_cast<Eigen::Index>(e.n_a) * e.n_a, e.n_a);
  for (int i = 0; i < e.n_a; ++i) {
    kc(static_cast<Eigen::Index>(i) * e.n_a + i, i) = 1.0;
  }
  StochasticMap copy = StochasticMap::make(
      e.a_space, TensorSpace({e.a_space.factor(0), Factor{"W", e.n_a}}),
      std::move(kc));
  RMat pba = connected_matrix(e, copy);
  double mean_b = 0.0, mean_a = 0.0, corr = 0.0;
  for (int kb = 0; kb < e.n_b; ++kb) mean_b += e.p_b0[kb] * o_b[kb];
  for (int i = 0; i < e.n_a; ++i) mean_a += e.p_a[i] * o_a[i];
  for (int kb = 0; kb < e.n_b; ++kb) {
    for (int i = 0; i < e.n_a; ++i) corr += pba(kb, i) * o_b[kb] * o_a[i];
  }
  rep.correlation = corr - mean_b * mean_a;
  rep.copy_mi = split_value(pba, e.p_b0).mi;
  if (nrm_b > kZero && nrm_a > kZero) {
    double ratio = rep.correlation / (nrm_b * nrm_a);
    rep.bound_correlation = ratio * ratio / 2.0;
  }
  rep.margin_correlation = rep.copy_mi - rep.bound_correlation;

  rep.j_value =
      classical_stmi(p_in, m, b_labels, ClassicalOptimizerConfig{}, a_label)
          .value;
  auto geq = [](double lhs, double rhs) {
    return lhs == kInf || lhs >= rhs - 1e-9;
  };
  rep.ok = geq(rep.coupling_value, rep.bound_response) &&
           geq(rep.copy_mi, rep.bound_correlation) &&
           geq(rep.j_value, rep.coupling_value) &&
           geq(rep.j_value, rep.copy_mi);
  return rep;
}

}  // namespace stmi
