#pragma once

// Model systems: the MBL fixed-point Hamiltonian, the Floquet kicked Ising
// chain, and single-site time-series experiments over either.

#include <array>
#include <string>
#include <vector>

#include "stmi/channel.hpp"
#include "stmi/core.hpp"
#include "stmi/optimizer.hpp"

namespace stmi {

struct MblParams {
  int L = 8;
  double w = 10.0;   // disorder width
  double xi = 2.0;   // localization length
  std::uint64_t seed = 0;
  bool include_three_body = true;
};

struct FloquetParams {
  int L = 8;
  double g = 0.9045;
  double h = 0.8090;
  double tau = 0.8;
};

struct BlochState {
  std::array<double, 3> a{0.0, 0.0, 0.0};

  DensityMatrix density(const std::string& label = "A") const;
};

// diagonal energies E(s) over computational basis states s (site 0 is the
// most significant bit, z_i = 1 - 2 bit_i):
//   E = sum_i h_i z_i + sum_{i<j} J_ij z_i z_j [+ sum_{i<j<k} J_ijk z_i z_j z_k]
// with J_ij = e^{-|i-j|/xi} Jt_ij, J_ijk = e^{-|i-k|/xi} Jt_ijk and
// h, Jt drawn uniformly from [-w, w]
RVec mbl_energies(const MblParams& p);

// exp(-i H t); H is diagonal, so this is a dense diagonal phase matrix
Mat build_mbl_unitary(const MblParams& p, double t);

// coherence damping factor of the effective single-site channel for a
// maximally mixed environment:
//   f(t) = 2^{-(L-1)} sum_env exp(-i t (E(0,env) - E(1,env)))
cd mbl_f(const MblParams& p, const RVec& energies, int site, double t);

// single-qubit channel preserving populations and multiplying the coherence
// by f; |f| <= 1 required
KrausChannel dephasing_from_f(cd f, const std::string& label = "A");

// U = e^{-i (tau/2) g sum sx} e^{-i tau (sum sz sz + h sum sz)} e^{-i (tau/2) g sum sx}
// with open boundary on the zz sum
Mat build_floquet_unitary(const FloquetParams& p);

// channel on the chosen site obtained by contracting u against env_state on
// the remaining L-1 qubits and tracing them out; the kept factor is labeled
// "A" and the Kraus family is Choi-compressed
KrausChannel effective_single_site_channel(const Mat& u, int L,
                                           const DensityMatrix& env_state,
                                           int site);

enum class EnvKind { zeros, mixed, random_product };

// n_qubits product state on factors E0..E{n-1}
DensityMatrix environment_state(int n_qubits, EnvKind kind,
                                std::uint64_t seed = 0);

// (1 - epsilon) |chi_alpha><chi_alpha| + (epsilon/2) Id with
// |chi_alpha> = cos(alpha)|0> + sin(alpha)|1>
DensityMatrix chi_state(double alpha, double epsilon = 0.0,
                        const std::string& label = "A");

struct TimeSeriesPoint {
  double t = 0.0;      // time, or period count for Floquet
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string method;  // "variational" | "ansatz"
  double j1 = 0.0;
  double mi_term = 0.0;
  double relent_term = 0.0;
  bool converged = false;
};

struct TimeSeriesOptions {
  std::vector<double> times{2.0, 4.0, 8.0, 16.0, 32.0};
  std::vector<double> alphas{0.02, 0.05, 0.1, 0.2, 0.4};
  double epsilon = 0.0;           // Id/2 admixture into the site state
  std::string method = "ansatz";  // "ansatz" | "variational" | "both"
  EnvKind env = EnvKind::mixed;
  int site = -1;                  // -1 selects L/2
  OptimizerConfig opt;            // variational method settings
};

std::vector<TimeSeriesPoint> stmi_time_series(const MblParams& p,
                                              const TimeSeriesOptions& opt);
// times are interpreted as integer period counts
std::vector<TimeSeriesPoint> stmi_time_series(const FloquetParams& p,
                                              const TimeSeriesOptions& opt);

}  // namespace stmi
