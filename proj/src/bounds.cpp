#include "stmi/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace stmi {

namespace {

constexpr double kMarginTol = 1e-6;
constexpr double kImagTol = 1e-10;

// place an observable at its labeled factors inside a larger space
Mat embed_observable(const Mat& data, const TensorSpace& from,
                     const TensorSpace& into) {
  std::vector<int> pos = into.positions(from.labels());
  for (int k = 0; k < from.n_factors(); ++k)
    if (into.factor(pos[k]).dim != from.factor(k).dim)
      throw Error("bounds: factor '" + from.factor(k).label +
                  "' has mismatched dimension");
  return embed_op(data, into.dims(), pos);
}

// rho_in reindexed to the evolution's input factor order
Mat rho_in_evolution_order(const DensityMatrix& rho_in,
                           const KrausChannel& evolution) {
  if (!rho_in.space().same_factors(evolution.in_space))
    throw Error("bounds: state factors do not match the evolution input");
  return reorder_factors(rho_in.data(), rho_in.space(), evolution.in_space);
}

// o_b reindexed so its factors follow their (sorted) positions in out_space,
// matching the B block of the connected state
Mat o_b_sorted(const HermitianObservable& o_b, const TensorSpace& out_space) {
  std::vector<int> pos = out_space.positions(o_b.space.labels());
  std::vector<int> idx(pos.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return pos[a] < pos[b]; });
  return permute_factors(o_b.data, o_b.space.dims(), idx);
}

double real_checked(cd z, const char* what) {
  if (std::abs(z.imag()) > kImagTol * std::max(1.0, std::abs(z.real())))
    throw Error(std::string("bounds: ") + what + " has a non-real residue");
  return z.real();
}

std::string site_label(const HermitianObservable& o_a) {
  if (o_a.space.n_factors() != 1)
    throw Error("bounds: O_A must live on a single factor");
  return o_a.space.factor(0).label;
}

double margin_of(const EntropyValue& j, double bound) {
  return j.is_finite() ? j.value - bound : kInf;
}

struct CoupledState {
  Mat rbw;
  Mat rw;
  Mat rb;
  EntropyValue j;
  double mi = 0.0;
};

CoupledState coupled_state(const Problem& p, const Mat& v) {
  CoupledState s;
  s.rbw = p.connected(v);
  s.rw = p.rho_w(s.rbw);
  s.rb = partial_trace(s.rbw, {p.d_b(), p.d_w()}, {0});
  s.j = relative_entropy(s.rbw, kron(p.rho_b0(), s.rw));
  s.mi = von_neumann_entropy(s.rb) + von_neumann_entropy(s.rw) -
         von_neumann_entropy(s.rbw);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// control coupling
// ---------------------------------------------------------------------------

ControlCoupling ControlCoupling::make(const HermitianObservable& o_a) {
  int d = o_a.space.dim();
  double na = operator_norm(o_a.data);
  if (na < 1e-14) throw Error("control coupling: O_A must be nonzero");
  double r = std::sqrt(0.5);
  Mat x0 = r * Mat::Identity(d, d);
  Mat x1 = r * o_a.data / na;
  Eigh es = eigh(Mat::Identity(d, d) - o_a.data * o_a.data / (na * na));
  Mat x2 = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    double ev = std::max(es.values(i), 0.0);
    x2 += std::sqrt(ev) * es.vectors.col(i) * es.vectors.col(i).adjoint();
  }
  x2 *= r;
  ControlCoupling c{o_a, {x0, x1, hermitize(x2)}, na};
  Mat comp = Mat::Zero(d, d);
  for (const Mat& x : c.x_ops) comp += x.adjoint() * x;
  if ((comp - Mat::Identity(d, d)).norm() > 1e-10)
    throw Error("control coupling: completeness defect");
  return c;
}

IsometryCoupling ControlCoupling::coupling() const {
  int d = o_a.space.dim();
  Mat v = Mat::Zero(d * 3, d);
  for (int i = 0; i < 3; ++i)
    for (int b = 0; b < d; ++b)
      for (int a = 0; a < d; ++a) v(b * 3 + i, a) = x_ops[i](b, a);
  return IsometryCoupling::make(
      o_a.space, TensorSpace({o_a.space.factor(0), Factor{"W", 3}}), std::move(v));
}

Mat y_w_matrix() {
  Mat y = Mat::Zero(3, 3);
  y(0, 1) = cd(0.0, -1.0);
  y(1, 0) = cd(0.0, 1.0);
  return y;
}

Mat x_w_matrix() {
  Mat x = Mat::Zero(3, 3);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  return x;
}

// ---------------------------------------------------------------------------
// correlators
// ---------------------------------------------------------------------------

namespace {

struct CorrelatorParts {
  Mat rho;  // evolution input order
  Mat oa;   // embedded in the input space
  Mat obt;  // Heisenberg O_B(t) in the input space
};

CorrelatorParts correlator_parts(const DensityMatrix& rho_in,
                                 const KrausChannel& evolution,
                                 const HermitianObservable& o_a,
                                 const HermitianObservable& o_b) {
  CorrelatorParts c;
  c.rho = rho_in_evolution_order(rho_in, evolution);
  c.oa = embed_observable(o_a.data, o_a.space, evolution.in_space);
  Mat ob = embed_observable(o_b.data, o_b.space, evolution.out_space);
  c.obt = adjoint_raw(evolution.kraus, ob);
  return c;
}

}  // namespace

double retarded_correlator(const DensityMatrix& rho_in,
                           const KrausChannel& evolution,
                           const HermitianObservable& o_a,
                           const HermitianObservable& o_b) {
  CorrelatorParts c = correlator_parts(rho_in, evolution, o_a, o_b);
  cd val = cd(0.0, -1.0) * trace_prod(c.rho, c.obt * c.oa - c.oa * c.obt);
  return real_checked(val, "retarded correlator");
}

double symmetric_connected_correlator(const DensityMatrix& rho_in,
                                      const KrausChannel& evolution,
                                      const HermitianObservable& o_a,
                                      const HermitianObservable& o_b) {
  CorrelatorParts c = correlator_parts(rho_in, evolution, o_a, o_b);
  cd anti = trace_prod(c.rho, c.obt * c.oa + c.oa * c.obt);
  cd disc = trace_prod(c.rho, c.obt) * trace_prod(c.rho, c.oa);
  return real_checked(anti - 2.0 * disc, "symmetric correlator");
}

// ---------------------------------------------------------------------------
// Theorem 1 verification
// ---------------------------------------------------------------------------

Theorem1Report verify_theorem1(const DensityMatrix& rho_in,
                               const KrausChannel& evolution,
                               const HermitianObservable& o_a,
                               const HermitianObservable& o_b) {
  Theorem1Report rep;
  std::string site = site_label(o_a);
  ControlCoupling cc = ControlCoupling::make(o_a);

  Problem p = make_problem(rho_in, evolution, o_b.space.labels(),
                           ControlCoupling::ancilla_dim, site);
  Mat v = cc.coupling().v;
  CoupledState st = coupled_state(p, v);

  rep.retarded = retarded_correlator(rho_in, evolution, o_a, o_b);
  rep.symmetric = symmetric_connected_correlator(rho_in, evolution, o_a, o_b);
  rep.norm_a = cc.norm_a;
  rep.norm_b = operator_norm(o_b.data);
  if (rep.norm_b < 1e-14) throw Error("verify_theorem1: O_B must be nonzero");

  double denom = rep.norm_a * rep.norm_b;
  rep.bound_retarded = rep.retarded * rep.retarded / (denom * denom) / 8.0;
  rep.bound_symmetric = rep.symmetric * rep.symmetric / (denom * denom) / 8.0;
  rep.j_value = st.j.value;
  rep.mi_value = st.mi;
  rep.margin_retarded = margin_of(st.j, rep.bound_retarded);
  rep.margin_symmetric = margin_of(st.j, rep.bound_symmetric);
  rep.margin_mi = st.mi - rep.bound_retarded;

  Mat ob = o_b_sorted(o_b, evolution.out_space);
  Mat yw = y_w_matrix(), xw = x_w_matrix();
  rep.trace_y_value = trace_prod(st.rbw, kron(ob, yw)).real();
  rep.trace_y_expected = rep.retarded / (2.0 * rep.norm_a);
  double x_disc = trace_prod(p.rho_b0(), ob).real() * trace_prod(st.rw, xw).real();
  rep.trace_x_value = trace_prod(st.rbw, kron(ob, xw)).real() - x_disc;
  rep.trace_x_expected = rep.symmetric / (2.0 * rep.norm_a);
  rep.disconnected_y = trace_prod(st.rw, yw).real();

  rep.ok = rep.margin_retarded >= -kMarginTol &&
           rep.margin_symmetric >= -kMarginTol && rep.margin_mi >= -kMarginTol;
  return rep;
}

Theorem1Report verify_theorem1(const DensityMatrix& rho_in,
                               const KrausChannel& evolution,
                               const HermitianObservable& o_a,
                               const HermitianObservable& o_b,
                               double j_lower_estimate) {
  Theorem1Report rep = verify_theorem1(rho_in, evolution, o_a, o_b);
  rep.has_estimate = true;
  rep.j_estimate = j_lower_estimate;
  rep.margin_estimate_retarded = j_lower_estimate - rep.bound_retarded;
  rep.margin_estimate_symmetric = j_lower_estimate - rep.bound_symmetric;
  rep.ok = rep.ok && rep.margin_estimate_retarded >= -kMarginTol &&
           rep.margin_estimate_symmetric >= -kMarginTol;
  return rep;
}

// ---------------------------------------------------------------------------
// swap + EPR coupling bounds
// ---------------------------------------------------------------------------

namespace {

Vec epr_vector(int d) {
  Vec e = Vec::Zero(d * d);
  double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) e(i * d + i) = amp;
  return e;
}

}  // namespace

SuperdensityReport superdensity_bound(const DensityMatrix& rho_in,
                                      const KrausChannel& evolution,
                                      const HermitianObservable& o_a,
                                      const HermitianObservable& o_b) {
  SuperdensityReport rep;
  std::string site = site_label(o_a);
  int d = o_a.space.dim();
  if (std::abs(o_a.data.trace()) > 1e-10)
    throw Error("superdensity_bound: O_A must be traceless");

  Problem p = make_problem(rho_in, evolution, o_b.space.labels(), d * d, site);
  Mat v = superdensity_coupling(d).v;
  CoupledState st = coupled_state(p, v);

  Vec epr = epr_vector(d);
  Mat proj = epr * epr.adjoint();
  Mat oa_w1 = kron(o_a.data, Mat::Identity(d, d));
  Mat ow = hermitize(cd(0.0, 1.0) * (proj * oa_w1 - oa_w1 * proj));

  Mat ob = o_b_sorted(o_b, evolution.out_space);
  double disc = trace_prod(p.rho_b0(), ob).real() * trace_prod(st.rw, ow).real();
  rep.two_point_connected = trace_prod(st.rbw, kron(ob, ow)).real() - disc;

  double r = retarded_correlator(rho_in, evolution, o_a, o_b);
  rep.two_point_expected = -r / static_cast<double>(d * d);
  rep.norm_w = operator_norm(ow);
  rep.norm_a = operator_norm(o_a.data);
  rep.norm_b = operator_norm(o_b.data);
  if (rep.norm_a < 1e-14 || rep.norm_b < 1e-14)
    throw Error("superdensity_bound: observables must be nonzero");

  double d4 = std::pow(static_cast<double>(d), 4);
  rep.bound = r * r / (8.0 * d4 * rep.norm_a * rep.norm_a * rep.norm_b * rep.norm_b);
  rep.j_value = st.j.value;
  rep.mi_value = st.mi;
  rep.margin_j = margin_of(st.j, rep.bound);
  rep.margin_mi = st.mi - rep.bound;
  rep.ok = rep.margin_j >= -kMarginTol && rep.margin_mi >= -kMarginTol &&
           rep.norm_w <= 2.0 * rep.norm_a + 1e-9;
  return rep;
}

CausalInfluenceReport causal_influence_bound(const DensityMatrix& rho_in,
                                             const KrausChannel& evolution,
                                             const HermitianObservable& o_b,
                                             const Mat& u_a,
                                             const std::string& a_label) {
  CausalInfluenceReport rep;
  int pa = rho_in.space().position(a_label);
  int d = rho_in.space().factor(pa).dim;
  if (u_a.rows() != d || u_a.cols() != d)
    throw Error("causal_influence_bound: unitary dimension mismatch");
  if ((u_a.adjoint() * u_a - Mat::Identity(d, d)).norm() > 1e-10)
    throw Error("causal_influence_bound: u_a is not unitary");

  Problem p = make_problem(rho_in, evolution, o_b.space.labels(), d * d, a_label);
  Mat v = superdensity_coupling(d).v;
  CoupledState st = coupled_state(p, v);

  // O_W sandwiched with u_a^dag so the connected two-point function matches
  // the forward influence of applying u_a at the input
  Vec epr = epr_vector(d);
  Mat proj = epr * epr.adjoint();
  Mat rot = kron(u_a.adjoint(), Mat::Identity(d, d));
  Mat ow = hermitize(rot * proj * rot.adjoint());

  Mat ob = o_b_sorted(o_b, evolution.out_space);
  double disc = trace_prod(p.rho_b0(), ob).real() * trace_prod(st.rw, ow).real();
  rep.two_point_connected = trace_prod(st.rbw, kron(ob, ow)).real() - disc;

  // <O_B> with the unitary applied at the input, against the baseline
  Mat rho = rho_in_evolution_order(rho_in, evolution);
  Mat u_emb = embed_op(u_a, evolution.in_space.dims(),
                       {evolution.in_space.position(a_label)});
  Mat out_rot = apply_raw(evolution.kraus, u_emb * rho * u_emb.adjoint());
  std::vector<int> b_pos = evolution.out_space.positions(o_b.space.labels());
  std::sort(b_pos.begin(), b_pos.end());
  Mat rb_rot = partial_trace(out_rot, evolution.out_space.dims(), b_pos);
  rep.influence =
      (trace_prod(rb_rot, ob) - trace_prod(p.rho_b0(), ob)).real();

  double nb = operator_norm(o_b.data);
  if (nb < 1e-14) throw Error("causal_influence_bound: O_B must be nonzero");
  rep.bound = rep.influence * rep.influence / (2.0 * d * d * nb * nb);
  rep.j_value = st.j.value;
  rep.mi_value = st.mi;
  rep.margin = margin_of(st.j, rep.bound);
  rep.ok = rep.margin >= -kMarginTol;
  return rep;
}

}  // namespace stmi
