#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace tkp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Largest supported Hilbert space: a bipartite pair of dimension-11 qudits.
inline constexpr int kMaxDim = 121;

inline constexpr double kNormTol = 1e-9;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-9;
inline constexpr double kZeroBranchTol = 1e-12;

/// Normalized pure state on a small Hilbert space.
class StateVector {
 public:
  explicit StateVector(Vector amplitudes);

  /// Builds a state from unnormalized amplitudes.
  static StateVector normalized(Vector amplitudes);

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }
  Complex amplitude(int i) const { return amps_(i); }

  Complex inner(const StateVector& other) const;

 private:
  Vector amps_;
};

/// Hermitian, unit-trace, positive-semidefinite operator.
class DensityOperator {
 public:
  /// Validates Hermiticity, trace and positivity of `m`.
  static DensityOperator from_matrix(Matrix m);

  /// |psi><psi|; positive by construction, skips the eigenvalue check.
  static DensityOperator from_pure(const StateVector& psi);

  static DensityOperator maximally_mixed(int dim);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& matrix() const { return mat_; }

  double min_eigenvalue() const;

 private:
  explicit DensityOperator(Matrix m) : mat_(std::move(m)) {}
  Matrix mat_;
};

/// Idempotent Hermitian operator (P^2 = P, P = P^dagger).
class Projector {
 public:
  explicit Projector(Matrix m);

  static Projector onto(const StateVector& psi);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& matrix() const { return mat_; }

 private:
  Matrix mat_;
};

// Kronecker products, row-major with subsystem 1 as the slow index:
// combined index k = dim_b * i + j.
StateVector tensor_product(const StateVector& a, const StateVector& b);
Matrix tensor_product(const Matrix& a, const Matrix& b);
DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b);

/// Reduced state of a d x d bipartite density operator; keep is 1 or 2.
DensityOperator partial_trace(const DensityOperator& rho, int keep);

/// Projection probabilities onto a complete orthonormal basis, clamped to [0,1].
std::vector<double> born_probabilities(const DensityOperator& rho,
                                       const std::vector<StateVector>& basis);

struct ProjectionResult {
  std::optional<DensityOperator> state;  // empty on the zero-probability branch
  double probability = 0.0;
  bool zero_branch() const { return !state.has_value(); }
};

ProjectionResult project_and_renormalize(const DensityOperator& rho, const Projector& p);

}  // namespace tkp
