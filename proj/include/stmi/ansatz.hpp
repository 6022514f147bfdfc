#pragma once

// Factorized-input ansatz: the coupling is restricted to a swap against an
// ancilla marginal rho_W, turning the V-supremum into a d_A x d_A state
// optimization
//
//   F(rho_W) = -S(Ntilde(rho_W)) + S(rho_W) - Tr N(rho_W) log N(rho_in).

#include <array>
#include <functional>

#include "stmi/channel.hpp"
#include "stmi/core.hpp"

namespace stmi {

struct BlochMax {
  double value = 0.0;
  std::array<double, 3> n{0.0, 0.0, 0.0};
};

// Maximize fn over qubit density matrices (1 + n.sigma)/2 by a Bloch-ball
// grid scan with coordinate refinement.  Candidates where fn is NaN or
// -infinity are skipped; throws when nothing finite is found.
BlochMax bloch_maximize(const std::function<double(const Mat&)>& fn);

struct AnsatzState {
  DensityMatrix rho_w;
  KrausChannel channel;
  DensityMatrix rho_in_a;
};

// +infinity when supp N(rho_W) leaks outside supp N(rho_in)
EntropyValue ansatz_objective(const AnsatzState& s);

struct FixedPointResult {
  AnsatzState state;       // best-objective iterate (non-monotone safeguard)
  EntropyValue objective;
  bool converged = false;
  int iterations = 0;
  std::vector<double> history;  // objective value per iterate
};

// damped log-space iteration
//   rho <- normalize exp((1-lambda) log rho + lambda [Ntilde^dag log Ntilde(rho)
//                                                    - N^dag log N(rho_in)])
// started from the maximally mixed state
FixedPointResult fixed_point_solve(const KrausChannel& channel,
                                   const DensityMatrix& rho_in_a,
                                   double damping = 0.5, int max_iters = 20000,
                                   double tol = 1e-10);

struct ClosedFormUnitary {
  DensityMatrix rho_w;
  EntropyValue j1;
};

// unitary evolution: rho_W = rho_in^{-1} / Tr rho_in^{-1}, J1 = log Tr rho_in^{-1};
// rank-deficient rho_in diverges
ClosedFormUnitary closed_form_unitary(const DensityMatrix& rho_in_a);

// leading divergence of the dephasing family with an epsilon-tilted pure
// input; p-independent
double divergent_part_dephasing(double epsilon, double p);

struct AnsatzSolveResult {
  AnsatzState state;
  EntropyValue objective;
  EntropyValue fixed_point_objective;
  EntropyValue grid_objective;  // Bloch scan, qubit inputs only
  bool converged = false;
  int iterations = 0;
  bool routes_disagree = false;  // fixed point vs Bloch scan differ > 1e-2
};

// fixed point cross-validated against a Bloch-ball grid scan with local
// refinement (d_A = 2); returns the better of the two
AnsatzSolveResult ansatz_solve(const KrausChannel& channel,
                               const DensityMatrix& rho_in_a,
                               double damping = 0.5, int max_iters = 20000,
                               double tol = 1e-10);

}  // namespace stmi
