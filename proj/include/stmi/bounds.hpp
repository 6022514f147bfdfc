#pragma once

// Explicit couplings that certify correlation-function lower bounds on the
// space-time mutual information: the control-gate coupling (qutrit ancilla)
// and the swap+EPR coupling, together with their verification reports.

#include <array>

#include "stmi/channel.hpp"
#include "stmi/core.hpp"
#include "stmi/optimizer.hpp"

namespace stmi {

// V = sum_i X_i (x) |i>_W with
//   X0 = sqrt(1/2) Id, X1 = sqrt(1/2) O_A/||O_A||, X2 = sqrt(1/2)(Id - X1-part)^(1/2)
struct ControlCoupling {
  HermitianObservable o_a;
  std::array<Mat, 3> x_ops;
  double norm_a = 0.0;
  static constexpr int ancilla_dim = 3;

  static ControlCoupling make(const HermitianObservable& o_a);
  IsometryCoupling coupling() const;
};

// qutrit ancilla observables picking out the commutator / anticommutator parts
Mat y_w_matrix();
Mat x_w_matrix();

// -i Tr(rho_in [O_B(t), O_A]); O_B(t) in the Heisenberg picture
double retarded_correlator(const DensityMatrix& rho_in,
                           const KrausChannel& evolution,
                           const HermitianObservable& o_a,
                           const HermitianObservable& o_b);

// Tr(rho_in {O_B(t), O_A}) - 2 Tr(rho_in O_B(t)) Tr(rho_in O_A)
double symmetric_connected_correlator(const DensityMatrix& rho_in,
                                      const KrausChannel& evolution,
                                      const HermitianObservable& o_a,
                                      const HermitianObservable& o_b);

struct Theorem1Report {
  double retarded = 0.0;
  double symmetric = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  double j_value = 0.0;   // S(rho_BW | rho_B0 (x) rho_W) at the control coupling
  double mi_value = 0.0;  // I(B:W) of the same state
  double bound_retarded = 0.0;
  double bound_symmetric = 0.0;
  double margin_retarded = 0.0;
  double margin_symmetric = 0.0;
  double margin_mi = 0.0;  // tighter bound: mi_value - bound_retarded
  // ancilla trace identities at the control coupling
  double trace_y_value = 0.0;
  double trace_y_expected = 0.0;  // retarded / (2 ||O_A||)
  double trace_x_value = 0.0;
  double trace_x_expected = 0.0;  // symmetric / (2 ||O_A||)
  double disconnected_y = 0.0;    // Tr(rho_W Y_W), vanishes identically
  bool has_estimate = false;
  double j_estimate = 0.0;
  double margin_estimate_retarded = 0.0;
  double margin_estimate_symmetric = 0.0;
  bool ok = false;  // all margins >= -1e-6
};

Theorem1Report verify_theorem1(const DensityMatrix& rho_in,
                               const KrausChannel& evolution,
                               const HermitianObservable& o_a,
                               const HermitianObservable& o_b);
// additionally checks an externally supplied lower estimate of J against the
// same right-hand sides
Theorem1Report verify_theorem1(const DensityMatrix& rho_in,
                               const KrausChannel& evolution,
                               const HermitianObservable& o_a,
                               const HermitianObservable& o_b,
                               double j_lower_estimate);

struct SuperdensityReport {
  double two_point_connected = 0.0;  // connected <O_B O_W> through the coupling
  double two_point_expected = 0.0;   // d_A^{-2} i Tr([O_B(t), O_A] rho_in)
  double norm_w = 0.0;               // ||O_W|| <= 2 ||O_A||
  double norm_a = 0.0;
  double norm_b = 0.0;
  double j_value = 0.0;
  double mi_value = 0.0;
  double bound = 0.0;  // commutator^2 / (8 d_A^4 ||O_B||^2 ||O_A||^2)
  double margin_j = 0.0;
  double margin_mi = 0.0;
  bool ok = false;
};

// O_A must be traceless
SuperdensityReport superdensity_bound(const DensityMatrix& rho_in,
                                      const KrausChannel& evolution,
                                      const HermitianObservable& o_a,
                                      const HermitianObservable& o_b);

struct CausalInfluenceReport {
  double influence = 0.0;  // <O_B> with u_a applied at the input, minus baseline
  double two_point_connected = 0.0;  // equals influence / d_A^2
  double j_value = 0.0;
  double mi_value = 0.0;
  double bound = 0.0;  // influence^2 / (2 d_A^2 ||O_B||^2)
  double margin = 0.0;
  bool ok = false;
};

CausalInfluenceReport causal_influence_bound(const DensityMatrix& rho_in,
                                             const KrausChannel& evolution,
                                             const HermitianObservable& o_b,
                                             const Mat& u_a,
                                             const std::string& a_label = "A");

}  // namespace stmi
