#pragma once

// Petz recovery and the Markov property of the space-time mutual information
// when an added output block C is causally disconnected from the coupled
// input factor.

#include "stmi/channel.hpp"
#include "stmi/core.hpp"
#include "stmi/optimizer.hpp"

namespace stmi {

struct PetzResult {
  DensityMatrix state;
  // mass of the input state outside the support of the recovery anchor,
  // projected out before mapping; the output trace is reduced by this amount
  double leaked_mass = 0.0;
};

// rho_BC^{1/2} (rho_B^{-1/2} rho_AB rho_B^{-1/2} (x) Id_C) rho_BC^{1/2},
// output on [A, B, C]; marginals must agree to 1e-8
PetzResult petz_map(const DensityMatrix& rho_ab, const DensityMatrix& rho_b,
                    const DensityMatrix& rho_bc);

// rho_BC0^{1/2} (rho_B0^{-1/2} rho_BW rho_B0^{-1/2} (x) Id_C) rho_BC0^{1/2},
// acting trivially on the ancilla W; output on [B, C, W]
PetzResult petz_bcw(const DensityMatrix& rho_bw, const DensityMatrix& rho_b0,
                    const DensityMatrix& rho_bc0);

// O_B with Tr(rho_BCW O_BC O_W) = Tr(rho_BW O_B O_W) on exactly recovered
// states: rho_B0^{-1/2} Tr_C[rho_BC0^{1/2} O_BC rho_BC0^{1/2}] rho_B0^{-1/2}
HermitianObservable mirror_operator(const DensityMatrix& rho_b0,
                                    const DensityMatrix& rho_bc0,
                                    const HermitianObservable& o_bc);

// I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC); factors outside the three blocks
// are traced out
double conditional_mutual_information(const DensityMatrix& rho,
                                      const std::vector<std::string>& a_labels,
                                      const std::vector<std::string>& c_labels,
                                      const std::vector<std::string>& b_labels);

struct MarkovReport {
  double j_ab = 0.0;
  double j_abc = 0.0;
  double petz_reconstruction_error = 0.0;  // trace distance
  double mirror_operator_check = 0.0;      // worst two-point residue
  double untraced_value = 0.0;  // J(A:BC)-objective at the J(A:B)-optimal V
  double threshold = 0.0;
  bool markov = false;
  bool converged_ab = false;
  bool converged_abc = false;
  bool divergent = false;
};

// optimizes J(A:B) and J(A:BC), compares them against the threshold, and
// reconstructs the BCW state from the BW state through the Petz map
MarkovReport markov_check(const DensityMatrix& rho_in,
                          const KrausChannel& evolution,
                          const std::string& a_label,
                          const std::vector<std::string>& b_labels,
                          const std::vector<std::string>& c_labels,
                          const OptimizerConfig& cfg,
                          double markov_threshold = 1e-3);

}  // namespace stmi
