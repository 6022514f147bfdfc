#pragma once

// Tensor-factored Hilbert spaces, density matrices, entropies.
//
// Conventions used throughout the library:
//   * composite indices are row-major with the leftmost factor most
//     significant: |i0 i1 ... in> -> i0*d1*...*dn + i1*d2*...*dn + ...
//   * natural logarithm everywhere
//   * support of a PSD matrix = eigenspace with eigenvalues > 1e-12 * lambda_max

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stmi {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace tol {
inline constexpr double herm = 1e-12;        // relative hermiticity tolerance
inline constexpr double psd = 1e-10;         // allowed negative eigenvalue
inline constexpr double trace = 1e-10;       // |Tr rho - 1|
inline constexpr double rank_rel = 1e-12;    // support cutoff (relative)
inline constexpr double support = 1e-9;      // leaked mass => divergence
inline constexpr double completeness = 1e-10;
inline constexpr double herm_drift = 1e-8;   // hard error after symmetrize
}  // namespace tol

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// deterministic RNG
// ---------------------------------------------------------------------------

// mt19937_64 with fixed mappings so streams are reproducible across
// platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0,1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller, pairwise
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // complex Gaussian matrix; traversal row-major, real part then imaginary
  Mat cgauss(int rows, int cols) {
    Mat g(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        double re = gauss();
        double im = gauss();
        g(i, j) = cd(re, im);
      }
    return g;
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// TensorSpace
// ---------------------------------------------------------------------------

struct Factor {
  std::string label;
  int dim = 0;
};

class TensorSpace {
 public:
  TensorSpace() = default;
  explicit TensorSpace(std::vector<Factor> factors);
  TensorSpace(std::initializer_list<Factor> factors)
      : TensorSpace(std::vector<Factor>(factors)) {}

  static TensorSpace single(const std::string& label, int dim) {
    return TensorSpace({Factor{label, dim}});
  }

  int dim() const { return dim_; }
  int n_factors() const { return static_cast<int>(factors_.size()); }
  const std::vector<Factor>& factors() const { return factors_; }
  const Factor& factor(int i) const { return factors_.at(i); }

  bool has_label(const std::string& label) const;
  int position(const std::string& label) const;  // throws on unknown label
  std::vector<int> positions(const std::vector<std::string>& labels) const;
  std::vector<int> dims() const;
  std::vector<std::string> labels() const;

  // concatenation; duplicate labels across the two spaces are an error
  TensorSpace tensor(const TensorSpace& other) const;

  // kept labels in their original factor order
  TensorSpace subspace(const std::vector<std::string>& keep) const;

  // complement of the given labels, original order
  std::vector<std::string> complement(const std::vector<std::string>& labels) const;

  bool same_factors(const TensorSpace& other) const;

 private:
  std::vector<Factor> factors_;
  int dim_ = 1;
};

// ---------------------------------------------------------------------------
// raw tensor algebra on matrices (dims = factor dimensions, row-major)
// ---------------------------------------------------------------------------

Mat kron(const Mat& a, const Mat& b);

// trace out all factors not listed in keep; kept factors stay in their
// original relative order regardless of the order inside keep
Mat partial_trace(const Mat& m, const std::vector<int>& dims,
                  const std::vector<int>& keep);

// reorder tensor factors; order[k] = old position of the factor that ends up
// at new position k
Mat permute_factors(const Mat& m, const std::vector<int>& dims,
                    const std::vector<int>& order);

// map from permuted composite index to original composite index, same
// convention as permute_factors
std::vector<Eigen::Index> composite_index_map(const std::vector<int>& dims,
                                              const std::vector<int>& order);

// operator x acting on the factors listed in pos (in x's own factor order),
// identity on the rest
Mat embed_op(const Mat& x, const std::vector<int>& dims,
             const std::vector<int>& pos);

// data given on `from`, reindexed to the factor order of `to`; both spaces
// must carry the same factor set
Mat reorder_factors(const Mat& data, const TensorSpace& from,
                    const TensorSpace& to);

// ---------------------------------------------------------------------------
// Hermitian linear algebra helpers
// ---------------------------------------------------------------------------

inline Mat dag(const Mat& m) { return m.adjoint(); }

inline Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

inline double herm_drift_norm(const Mat& m) {
  return 0.5 * (m - m.adjoint()).norm();
}

// trace(a*b) without forming the product
cd trace_prod(const Mat& a, const Mat& b);

struct Eigh {
  RVec values;  // ascending
  Mat vectors;  // columns
};
Eigh eigh(const Mat& h);

// exp(i*h) for Hermitian h
Mat exp_i(const Mat& h);

// on-support functions of a PSD matrix (cutoff tol::rank_rel * lambda_max)
struct LogSupport {
  Mat log_on_support;
  Mat support_projector;
  int rank = 0;
};
LogSupport matrix_log_support(const Mat& h);

Mat sqrt_psd(const Mat& h);
Mat inv_sqrt_on_support(const Mat& h);
Mat inv_on_support(const Mat& h);

// polar re-orthonormalization v * (v^dag v)^{-1/2}
Mat polar_orthonormalize(const Mat& v);

double one_norm(const Mat& h);        // sum of singular values (Hermitian: |eigs|)
double operator_norm(const Mat& h);   // largest singular value
double trace_distance(const Mat& a, const Mat& b);  // (1/2)||a-b||_1

// ---------------------------------------------------------------------------
// quantum states and observables
// ---------------------------------------------------------------------------

struct EntropyValue {
  double value = 0.0;
  bool support_violation = false;

  static EntropyValue finite(double v) { return {v, false}; }
  static EntropyValue divergent() { return {kInf, true}; }
  bool is_finite() const { return !support_violation; }
};

class DensityMatrix {
 public:
  DensityMatrix(TensorSpace space, Mat data);  // validates invariants

  const TensorSpace& space() const { return space_; }
  const Mat& data() const { return data_; }
  int dim() const { return space_.dim(); }

  // skips validation; for internal loops where invariants are maintained
  static DensityMatrix unchecked(TensorSpace space, Mat data);

 private:
  DensityMatrix() = default;
  TensorSpace space_;
  Mat data_;
};

struct HermitianObservable {
  TensorSpace space;
  Mat data;

  HermitianObservable(TensorSpace s, Mat d);
};

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<std::string>& keep);

double von_neumann_entropy(const Mat& rho);
double von_neumann_entropy(const DensityMatrix& rho);

EntropyValue relative_entropy(const Mat& rho, const Mat& sigma);
EntropyValue relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

double mutual_information(const DensityMatrix& rho,
                          const std::vector<std::string>& part1,
                          const std::vector<std::string>& part2);
// MI on a raw bipartite matrix with explicit factor dims
double mutual_information2(const Mat& rho, const std::vector<int>& dims,
                           const std::vector<int>& part1);

DensityMatrix random_density_matrix(const TensorSpace& space, std::uint64_t seed,
                                    int rank);
Mat random_rho(int dim, int rank, Rng& rng);
Mat random_hermitian(int dim, Rng& rng);
Mat random_unitary(int dim, Rng& rng);

// common fixed matrices
Mat pauli_x();
Mat pauli_y();
Mat pauli_z();
Mat identity(int d);
Mat bloch_state(double ax, double ay, double az);  // (1/2)(Id + a.sigma)

}  // namespace stmi
