#pragma once

// Classical space-time mutual information over finite alphabets: stochastic
// maps, the KL-divergence objective, its reduced optimization form, and the
// classical correlation/response bounds.

#include <string>
#include <vector>

#include "stmi/core.hpp"

namespace stmi {

// probability distribution over a product of labeled finite alphabets;
// row-major composite indexing, leftmost factor most significant
class Distribution {
 public:
  Distribution(TensorSpace space, RVec probs);  // validates normalization

  const TensorSpace& space() const { return space_; }
  const RVec& probs() const { return probs_; }
  int dim() const { return space_.dim(); }

  static Distribution unchecked(TensorSpace space, RVec probs);

 private:
  Distribution() = default;
  TensorSpace space_;
  RVec probs_;
};

// column-stochastic matrix M(j|i) indexed [output][input]
struct StochasticMap {
  TensorSpace in_space;
  TensorSpace out_space;
  RMat matrix;

  int in_dim() const { return in_space.dim(); }
  int out_dim() const { return out_space.dim(); }

  // validates nonnegativity and unit column sums (1e-12)
  static StochasticMap make(TensorSpace in, TensorSpace out, RMat m);
};

Distribution apply(const StochasticMap& m, const Distribution& p);
Distribution marginal(const Distribution& p,
                      const std::vector<std::string>& keep);

// sum p log(p/q) with 0 log(0/q) = 0; +infinity when p charges a q-null
// symbol; alphabets must match exactly
double kl_divergence(const Distribution& p, const Distribution& q);
double kl_raw(const RVec& p, const RVec& q);

// connected ancilla-system distribution P_BW(k, w) = sum M(kl|qj) K(qw|i)
// P_in(ij).  The coupling k maps the factor a_label to [A, W...]; its output
// A leg feeds the map, the input symbol's record rides in W.  b_labels
// selects the output factors forming B (all of them when empty).
Distribution classical_connected(const Distribution& p_in,
                                 const StochasticMap& m,
                                 const StochasticMap& k,
                                 const std::vector<std::string>& b_labels = {});
// P_B0 = marginal of m applied to p_in
Distribution classical_disconnected(const Distribution& p_in,
                                    const StochasticMap& m,
                                    const std::vector<std::string>& b_labels = {});

struct ClassicalOptimizerConfig {
  int restarts = 6;
  int iters = 3000;
  double lr = 0.5;
  std::uint64_t seed = 0;
};

struct ClassicalStmiResult {
  double value = 0.0;
  StochasticMap coupling;  // deterministic record coupling, W = (q, i) pairs
  double reduced_value = 0.0;     // exact optimum of the reduced form
  double ascent_value = 0.0;      // mirror-ascent cross-check
  double factorized_value = 0.0;  // state-maximization route (factorized p_in)
  bool factorized_input = false;
  bool routes_disagree = false;  // cross-checks differ beyond 1e-6
  double mi_term = 0.0;          // I(B:W) at the returned coupling
  double relent_term = 0.0;      // D(P_B | P_B0) at the returned coupling
  bool divergent = false;
};

// J_1(A:B) = sup_K D(P_BW,1 | P_B0 x P_W).  The supremum is taken in the
// reduced form J = sum_i P_A(i) max_q D(T(.|q,i) | P_B0), whose objective is
// linear in the coupling, so the deterministic per-symbol argmax is the
// exact optimum; mirror ascent over stochastic couplings cross-checks it.
ClassicalStmiResult classical_stmi(const Distribution& p_in,
                                   const StochasticMap& m,
                                   const std::vector<std::string>& b_labels = {},
                                   const ClassicalOptimizerConfig& cfg = {},
                                   const std::string& a_label = "A");

// linear response of <O_B> to the perturbation Id + eps N_A of the coupled
// input symbol; n_a columns must sum to zero with nonnegative off-diagonals;
// o_b is indexed over the sorted-B composite alphabet
double classical_response(const Distribution& p_in, const StochasticMap& m,
                          const RMat& n_a, const RVec& o_b,
                          const std::vector<std::string>& b_labels = {},
                          const std::string& a_label = "A");

// I(B : W1 | W0 W2) for a general coupling with recorded input (W0 = i) and
// fed symbol (W2 = q); vanishes identically, which is what licenses the
// reduced form
double coupling_record_cmi(const Distribution& p_in, const StochasticMap& m,
                           const StochasticMap& k,
                           const std::vector<std::string>& b_labels = {},
                           const std::string& a_label = "A");

struct ClassicalBoundsReport {
  double response = 0.0;        // G_R
  double coupling_value = 0.0;  // D at the two-state response coupling
  double bound_response = 0.0;
  double margin_response = 0.0;
  double correlation = 0.0;  // connected <O_B O_A> under the copy coupling
  double copy_mi = 0.0;      // I(B:A)
  double bound_correlation = 0.0;
  double margin_correlation = 0.0;
  double j_value = 0.0;  // classical_stmi optimum
  bool ok = false;
};

// checks D >= (G_R / (|O_B| |N_A|))^2 / 8 at the explicit two-state coupling
// and I(B:A) >= (corr / (|O_B| |O_A|))^2 / 2 at the copy coupling; |O| is the
// sup norm, |N_A| the max column 1-norm
ClassicalBoundsReport verify_classical_bounds(
    const Distribution& p_in, const StochasticMap& m, const RMat& n_a,
    const RVec& o_b, const RVec& o_a,
    const std::vector<std::string>& b_labels = {},
    const std::string& a_label = "A");

}  // namespace stmi
