#pragma once

// Quantum channels as Kraus families, channel calculus, and effective
// channels traced out of many-body unitaries.

#include "stmi/core.hpp"

namespace stmi {

struct KrausChannel {
  TensorSpace in_space;
  TensorSpace out_space;
  std::vector<Mat> kraus;  // each out_dim x in_dim

  int in_dim() const { return in_space.dim(); }
  int out_dim() const { return out_space.dim(); }

  // validates completeness sum K^dag K = Id to tol::completeness
  static KrausChannel make(TensorSpace in, TensorSpace out, std::vector<Mat> ks);
  // skips the completeness check (internal constructions that verify later)
  static KrausChannel unchecked(TensorSpace in, TensorSpace out, std::vector<Mat> ks);

  double completeness_defect() const;
};

Mat apply_raw(const std::vector<Mat>& kraus, const Mat& rho);
Mat adjoint_raw(const std::vector<Mat>& kraus, const Mat& obs);

DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho);
HermitianObservable adjoint_apply(const KrausChannel& ch, const HermitianObservable& obs);

// Gamma_IJ = Tr(K_I rho K_J^dag) on an environment space of dim = #Kraus
DensityMatrix complement(const KrausChannel& ch, const DensityMatrix& rho);
Mat complement_raw(const std::vector<Mat>& kraus, const Mat& rho);

// Kraus family of the complementary channel itself: one operator per output
// basis index b, with rows indexed by the original Kraus label
std::vector<Mat> complement_kraus(const std::vector<Mat>& kraus);

// second(first(rho)); Kraus products, second-channel index major
KrausChannel compose(const KrausChannel& second, const KrausChannel& first);

// tensor product channel a (x) b; index (i,j) lexicographic, a-major
KrausChannel tensor(const KrausChannel& a, const KrausChannel& b);

// channel A -> B obtained by contracting u against an environment state and
// tracing the complement of out_keep.  env labels must be factors of u_space;
// the remaining factors form the channel input, in their original order.
// Kraus index (l, m): l = traced-output basis index, m = environment
// eigenvector index, lexicographic l-major.  Environment eigenvalues below
// tol::rank_rel * lambda_max are dropped.
KrausChannel channel_from_unitary(const Mat& u, const TensorSpace& u_space,
                                  const DensityMatrix& rho_env,
                                  const std::vector<std::string>& out_keep);

// rebuild a minimal Kraus family from the Choi matrix; entropy-equivalent,
// deterministic ordering (descending Choi eigenvalues, phase-fixed)
KrausChannel compress_choi(const KrausChannel& ch);

KrausChannel identity_channel(const TensorSpace& space);
KrausChannel unitary_channel(const Mat& u, const TensorSpace& space);

// single-qubit families on a space labeled "A" by default
KrausChannel depolarizing(double p, const std::string& label = "A");
KrausChannel dephasing(double p, const std::string& label = "A");
// output is rho_fix regardless of input
KrausChannel replacer(const DensityMatrix& rho_fix, const TensorSpace& in_space);

}  // namespace stmi
