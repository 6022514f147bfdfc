#include "stmi/petz.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace stmi {

namespace {

constexpr double kMarginalTol = 1e-8;
constexpr double kTraceSlack = 1e-8;

void require_contains(const TensorSpace& space, const TensorSpace& block,
                      const char* who) {
  for (const auto& f : block.factors()) {
    if (!space.has_label(f.label)) {
      throw Error(std::string(who) + ": factor " + f.label +
                  " missing from joint state");
    }
  }
}

}  // namespace

PetzResult petz_map(const DensityMatrix& rho_ab, const DensityMatrix& rho_b,
                    const DensityMatrix& rho_bc) {
  const TensorSpace& sab = rho_ab.space();
  const TensorSpace& sbc_in = rho_bc.space();
  const TensorSpace& sb = rho_b.space();
  require_contains(sab, sb, "petz_map");
  require_contains(sbc_in, sb, "petz_map");

  std::vector<std::string> b_labels = sb.labels();
  TensorSpace sa = sab.subspace(sab.complement(b_labels));
  TensorSpace sc = sbc_in.subspace(sbc_in.complement(b_labels));
  TensorSpace sab_c = sa.tensor(sb);
  TensorSpace sbc_c = sb.tensor(sc);

  Mat ab = reorder_factors(rho_ab.data(), sab, sab_c);
  Mat bc = reorder_factors(rho_bc.data(), sbc_in, sbc_c);
  const int da = sa.dim();
  const int db = sb.dim();
  const int dc = sc.dim();

  if (one_norm(partial_trace(ab, {da, db}, {1}) - rho_b.data()) > kMarginalTol) {
    throw Error("petz_map: Tr_A rho_AB does not match rho_B");
  }
  if (one_norm(partial_trace(bc, {db, dc}, {0}) - rho_b.data()) > kMarginalTol) {
    throw Error("petz_map: Tr_C rho_BC does not match rho_B");
  }

  LogSupport ls = matrix_log_support(rho_b.data());
  Mat pb = kron(Mat::Identity(da, da), ls.support_projector);
  Mat abp = hermitize(pb * ab * pb);
  double leaked = (ab.trace() - abp.trace()).real();

  Mat ib = kron(Mat::Identity(da, da), inv_sqrt_on_support(rho_b.data()));
  Mat core = ib * abp * ib;
  Mat lhs = kron(Mat::Identity(da, da), sqrt_psd(bc));
  Mat out = hermitize(lhs * kron(core, Mat::Identity(dc, dc)) * lhs);

  if (out.trace().real() > 1.0 + kTraceSlack) {
    throw Error("petz_map: output trace exceeds one");
  }
  return {DensityMatrix::unchecked(sab_c.tensor(sc), std::move(out)), leaked};
}

PetzResult petz_bcw(const DensityMatrix& rho_bw, const DensityMatrix& rho_b0,
                    const DensityMatrix& rho_bc0) {
  const TensorSpace& sbw = rho_bw.space();
  const TensorSpace& sbc_in = rho_bc0.space();
  const TensorSpace& sb = rho_b0.space();
  require_contains(sbw, sb, "petz_bcw");
  require_contains(sbc_in, sb, "petz_bcw");

  std::vector<std::string> b_labels = sb.labels();
  TensorSpace sw = sbw.subspace(sbw.complement(b_labels));
  TensorSpace sc = sbc_in.subspace(sbc_in.complement(b_labels));
  TensorSpace sbw_c = sb.tensor(sw);
  TensorSpace sbc_c = sb.tensor(sc);

  Mat bw = reorder_factors(rho_bw.data(), sbw, sbw_c);
  Mat bc = reorder_factors(rho_bc0.data(), sbc_in, sbc_c);
  const int db = sb.dim();
  const int dw = sw.dim();
  const int dc = sc.dim();

  // only the anchor pair is constrained; rho_BW may have any B marginal
  if (one_norm(partial_trace(bc, {db, dc}, {0}) - rho_b0.data()) > kMarginalTol) {
    throw Error("petz_bcw: Tr_C rho_BC0 does not match rho_B0");
  }

  LogSupport ls = matrix_log_support(rho_b0.data());
  Mat pb = kron(ls.support_projector, Mat::Identity(dw, dw));
  Mat bwp = hermitize(pb * bw * pb);
  double leaked = (bw.trace() - bwp.trace()).real();

  Mat ib = kron(inv_sqrt_on_support(rho_b0.data()), Mat::Identity(dw, dw));
  Mat core = embed_op(ib * bwp * ib, {db, dc, dw}, {0, 2});
  Mat lhs = kron(sqrt_psd(bc), Mat::Identity(dw, dw));
  Mat out = hermitize(lhs * core * lhs);

  if (out.trace().real() > 1.0 + kTraceSlack) {
    throw Error("petz_bcw: output trace exceeds one");
  }
  return {DensityMatrix::unchecked(sbc_c.tensor(sw), std::move(out)), leaked};
}

HermitianObservable mirror_operator(const DensityMatrix& rho_b0,
                                    const DensityMatrix& rho_bc0,
                                    const HermitianObservable& o_bc) {
  const TensorSpace& sbc_in = rho_bc0.space();
  const TensorSpace& sb = rho_b0.space();
  require_contains(sbc_in, sb, "mirror_operator");

  TensorSpace sc = sbc_in.subspace(sbc_in.complement(sb.labels()));
  TensorSpace sbc_c = sb.tensor(sc);
  Mat bc = reorder_factors(rho_bc0.data(), sbc_in, sbc_c);
  Mat obs = reorder_factors(o_bc.data, o_bc.space, sbc_c);

  Mat sq = sqrt_psd(bc);
  Mat xb = partial_trace(sq * obs * sq, {sb.dim(), sc.dim()}, {0});
  Mat ib = inv_sqrt_on_support(rho_b0.data());
  return HermitianObservable(sb, hermitize(ib * xb * ib));
}

double conditional_mutual_information(const DensityMatrix& rho,
                                      const std::vector<std::string>& a_labels,
                                      const std::vector<std::string>& c_labels,
                                      const std::vector<std::string>& b_labels) {
  std::vector<std::string> all = a_labels;
  all.insert(all.end(), c_labels.begin(), c_labels.end());
  all.insert(all.end(), b_labels.begin(), b_labels.end());
  std::vector<int> pos = rho.space().positions(all);
  std::sort(pos.begin(), pos.end());
  if (std::adjacent_find(pos.begin(), pos.end()) != pos.end()) {
    throw Error("conditional_mutual_information: blocks overlap");
  }

  auto block_entropy = [&rho](std::vector<std::string> keep) {
    if (keep.empty()) return 0.0;
    return von_neumann_entropy(partial_trace(rho, keep));
  };
  std::vector<std::string> ab = a_labels;
  ab.insert(ab.end(), b_labels.begin(), b_labels.end());
  std::vector<std::string> bc = b_labels;
  bc.insert(bc.end(), c_labels.begin(), c_labels.end());

  return block_entropy(ab) + block_entropy(bc) - block_entropy(b_labels) -
         block_entropy(all);
}

MarkovReport markov_check(const DensityMatrix& rho_in,
                          const KrausChannel& evolution,
                          const std::string& a_label,
                          const std::vector<std::string>& b_labels,
                          const std::vector<std::string>& c_labels,
                          const OptimizerConfig& cfg, double markov_threshold) {
  std::vector<std::string> bc_labels = b_labels;
  bc_labels.insert(bc_labels.end(), c_labels.begin(), c_labels.end());
  {
    std::vector<int> pos = evolution.out_space.positions(bc_labels);
    std::sort(pos.begin(), pos.end());
    if (std::adjacent_find(pos.begin(), pos.end()) != pos.end()) {
      throw Error("markov_check: B and C blocks overlap");
    }
  }

  MarkovReport rep;
  rep.threshold = markov_threshold;

  StmiResult res_ab = optimize_j1(rho_in, evolution, b_labels, cfg, a_label);
  StmiResult res_abc = optimize_j1(rho_in, evolution, bc_labels, cfg, a_label);
  rep.j_ab = res_ab.value;
  rep.j_abc = res_abc.value;
  rep.converged_ab = res_ab.converged;
  rep.converged_abc = res_abc.converged;
  rep.divergent = res_ab.divergent || res_abc.divergent;
  if (rep.divergent) {
    rep.markov = res_ab.divergent && res_abc.divergent;
    return rep;
  }
  rep.markov = std::abs(rep.j_abc - rep.j_ab) < markov_threshold;

  const Mat& vopt = res_ab.coupling.v;
  const int d_w = res_ab.coupling.d_w();
  Problem p_b = make_problem(rho_in, evolution, b_labels, d_w, a_label);
  Problem p_bc = make_problem(rho_in, evolution, bc_labels, d_w, a_label);
  rep.untraced_value = p_bc.objective(vopt).value;

  TensorSpace sb = evolution.out_space.subspace(b_labels);
  TensorSpace sbc = evolution.out_space.subspace(bc_labels);
  TensorSpace sw = TensorSpace::single("W", d_w);
  Mat rbw = p_b.connected(vopt);
  Mat rbcw = p_bc.connected(vopt);
  DensityMatrix rho_bw = DensityMatrix::unchecked(sb.tensor(sw), rbw);
  DensityMatrix rho_bcw = DensityMatrix::unchecked(sbc.tensor(sw), rbcw);
  DensityMatrix rho_b0 = DensityMatrix::unchecked(sb, p_b.rho_b0());
  DensityMatrix rho_bc0 = DensityMatrix::unchecked(sbc, p_bc.rho_b0());

  PetzResult recon = petz_bcw(rho_bw, rho_b0, rho_bc0);
  Mat aligned = reorder_factors(recon.state.data(), recon.state.space(),
                                rho_bcw.space());
  rep.petz_reconstruction_error = trace_distance(aligned, rho_bcw.data());

  Rng rng(cfg.seed + 101);
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    Mat obc = random_hermitian(sbc.dim(), rng);
    obc /= operator_norm(obc);
    Mat ow = random_hermitian(d_w, rng);
    ow /= operator_norm(ow);
    HermitianObservable mirror =
        mirror_operator(rho_b0, rho_bc0, HermitianObservable(sbc, obc));
    cd lhs = trace_prod(rbcw, kron(obc, ow));
    cd rhs = trace_prod(rbw, kron(mirror.data, ow));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  rep.mirror_operator_check = worst;
  return rep;
}

}  // namespace stmi
