#pragma once

// Ancilla couplings and the variational maximization of the space-time
// mutual information
//
//   J_1(A:B) = sup_V S(rho_BW | rho_B0 (x) rho_W).
//
// The coupling is an isometry V : A -> A (x) W acting on the system factor
// labeled "A"; remaining input factors ride along untouched.  The joint
// state sigma = V rho_in V^dag lives on [A, W, Abar]; the evolution extends
// to [out..., W] by acting trivially on W.

#include "stmi/channel.hpp"
#include "stmi/core.hpp"

namespace stmi {

// ---------------------------------------------------------------------------
// couplings
// ---------------------------------------------------------------------------

struct IsometryCoupling {
  TensorSpace in_space;   // system factor A
  TensorSpace out_space;  // [A, W...]
  Mat v;                  // (d_a * d_w) x d_a, row index a*d_w + w

  int d_a() const { return in_space.dim(); }
  int d_w() const { return out_space.dim() / in_space.dim(); }

  static IsometryCoupling make(TensorSpace in, TensorSpace out, Mat v);
};

IsometryCoupling random_isometry(int d_a, int d_w, Rng& rng);
// V = Id_A (x) |0>_W
IsometryCoupling identity_embedding(int d_a, int d_w);
// swap coupling with ancilla W = W1 (x) W2 prepared in the symmetric
// purification of rho_w; the purification marginal rho_w is fed through the
// channel while the system state is preserved in W1
IsometryCoupling swap_coupling_from_rho_w(const DensityMatrix& rho_w);
// swap coupling with EPR ancilla (rho_w maximally mixed); W1 carries the
// preserved input, W2 the maximally entangled reference
IsometryCoupling superdensity_coupling(int d_a);

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

struct OptimizerConfig {
  double eta = 0.05;
  int max_iters = 5000;
  double grad_tol = 1e-7;  // Frobenius norm of the gradient
  int restarts = 8;
  std::uint64_t seed = 0;
  double backtrack = 0.5;
  int ancilla_dim = 0;  // 0 selects d_A^2
  bool strict = false;
  bool record_trajectory = true;
};

struct StmiResult {
  double value = 0.0;
  double mi_term = 0.0;      // I(B:W) of the optimal connected state
  double relent_term = 0.0;  // S(rho_B | rho_B0)
  IsometryCoupling coupling;
  int iterations = 0;
  bool converged = false;
  bool divergent = false;  // value = +inf certified by the leak probe
  double grad_norm = 0.0;
  double restart_spread = 0.0;
  bool restarts_disagree = false;
  std::vector<double> trajectory;  // best restart's accepted objectives
};

// Internal engine shared by the public entry points.  rho_in is given on
// [A, Abar] with A most significant; the Kraus operators use the same input
// ordering; b_idx selects output factors forming B.
class Problem {
 public:
  Problem(Mat rho_in, int d_a, int d_abar, std::vector<Mat> kraus,
          std::vector<int> out_dims, std::vector<int> b_idx, int d_w);

  int d_a() const { return d_a_; }
  int d_w() const { return d_w_; }
  int d_b() const { return d_b_; }

  Mat sigma(const Mat& v) const;          // on [A, W, Abar]
  Mat connected(const Mat& v) const;      // rho_BW on [B, W]
  Mat rho_w(const Mat& rho_bw) const;
  const Mat& rho_b0() const { return rho_b0_; }
  EntropyValue objective(const Mat& v) const;
  Mat gradient(const Mat& v) const;       // Hermitian M on A (x) W
  double leak(const Mat& v) const;        // mass outside supp(rho_B0)
  Mat leak_gradient(const Mat& v) const;
  bool rho_b0_full_rank() const { return b0_full_rank_; }

  // ascent update used everywhere: V <- exp(-i s M) V
  static Mat step(const Mat& v, const Mat& m, double s);

 private:
  Mat ext_apply(const Mat& sig) const;                    // sum Kext sig Kext^dag
  Mat ext_adjoint(const Mat& obs_out_w) const;            // sum Kext^dag X Kext
  int d_a_, d_abar_, d_w_, d_b_, d_out_;
  Mat rho_in_;
  std::vector<Mat> kraus_;
  std::vector<Mat> kraus_ext_;
  std::vector<int> out_dims_, b_idx_;
  std::vector<int> outw_dims_, bw_keep_;
  Mat rho_b0_;
  Mat b0_log_, b0_proj_;
  Mat adj_lb0_ext_;  // N^dag(log rho_B0) embedded on [A, W, Abar]
  Mat leak_q_;       // sum Kext^dag (Id - Proj_B0) Kext, on [A, W, Abar]
  bool b0_full_rank_ = true;
};

// Builds the internal Problem from labeled API types.  rho_in must contain a
// factor labeled a_label (default "A"); evolution input factors must match
// rho_in's factors as a set.
Problem make_problem(const DensityMatrix& rho_in, const KrausChannel& evolution,
                     const std::vector<std::string>& b_labels, int d_w,
                     const std::string& a_label = "A");

DensityMatrix connected_state(const DensityMatrix& rho_in,
                              const IsometryCoupling& v,
                              const KrausChannel& evolution,
                              const std::vector<std::string>& b_labels);
DensityMatrix disconnected_state(const DensityMatrix& rho_in,
                                 const IsometryCoupling& v,
                                 const KrausChannel& evolution,
                                 const std::vector<std::string>& b_labels);
EntropyValue objective(const DensityMatrix& rho_in, const IsometryCoupling& v,
                       const KrausChannel& evolution,
                       const std::vector<std::string>& b_labels);
HermitianObservable gradient(const DensityMatrix& rho_in,
                             const IsometryCoupling& v,
                             const KrausChannel& evolution,
                             const std::vector<std::string>& b_labels);

StmiResult optimize_j1(const DensityMatrix& rho_in, const KrausChannel& evolution,
                       const std::vector<std::string>& b_labels,
                       const OptimizerConfig& cfg,
                       const std::string& a_label = "A");

bool divergence_probe(const DensityMatrix& rho_in, const KrausChannel& evolution,
                      const std::vector<std::string>& b_labels);

// objective of a fixed coupling together with its I(B:W) and S(rho_B|rho_B0)
// decomposition
struct CouplingValue {
  EntropyValue objective;
  double mi_term = 0.0;
  double relent_term = 0.0;
};
CouplingValue evaluate_coupling(const DensityMatrix& rho_in,
                                const IsometryCoupling& v,
                                const KrausChannel& evolution,
                                const std::vector<std::string>& b_labels);

struct StationarityN2 {
  double grad_norm = 0.0;
  double objective_half = 0.0;
  double j1 = 0.0;
};
StationarityN2 stationarity_check_n2(const DensityMatrix& rho_in,
                                     const KrausChannel& evolution,
                                     const std::vector<std::string>& b_labels,
                                     const IsometryCoupling& v1);

}  // namespace stmi
