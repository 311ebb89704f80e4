#include "tkp/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tkp {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("dimension " + std::to_string(dim) +
                                " outside supported range [1, " +
                                std::to_string(kMaxDim) + "]");
  }
}

int isqrt_exact(int n) {
  int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (root * root != n) {
    throw std::invalid_argument("dimension " + std::to_string(n) +
                                " is not a perfect square");
  }
  return root;
}

}  // namespace

StateVector::StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
  check_dim(static_cast<int>(amps_.size()));
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > kNormTol) {
    throw std::invalid_argument("state vector norm " + std::to_string(norm) +
                                " deviates from 1");
  }
}

StateVector StateVector::normalized(Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (norm < kZeroBranchTol) {
    throw std::invalid_argument("cannot normalize a zero vector");
  }
  return StateVector(amplitudes / norm);
}

Complex StateVector::inner(const StateVector& other) const {
  if (dim() != other.dim()) {
    throw std::invalid_argument("inner product dimension mismatch");
  }
  return amps_.dot(other.amps_);  // Eigen's dot conjugates the left operand
}

DensityOperator DensityOperator::from_matrix(Matrix m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("density operator must be square");
  }
  check_dim(static_cast<int>(m.rows()));
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
    throw std::invalid_argument("density operator is not Hermitian");
  }
  if (std::abs(m.trace() - Complex(1.0, 0.0)) > kTraceTol) {
    throw std::invalid_argument("density operator trace deviates from 1");
  }
  DensityOperator rho(std::move(m));
  const double lambda_min = rho.min_eigenvalue();
  if (lambda_min < kEigenvalueFloor) {
    throw std::invalid_argument("density operator has negative eigenvalue " +
                                std::to_string(lambda_min));
  }
  return rho;
}

DensityOperator DensityOperator::from_pure(const StateVector& psi) {
  return DensityOperator(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityOperator DensityOperator::maximally_mixed(int dim) {
  check_dim(dim);
  return DensityOperator(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Projector::Projector(Matrix m) : mat_(std::move(m)) {
  if (mat_.rows() != mat_.cols()) {
    throw std::invalid_argument("projector must be square");
  }
  check_dim(static_cast<int>(mat_.rows()));
  if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
    throw std::invalid_argument("projector is not Hermitian");
  }
  if ((mat_ * mat_ - mat_).cwiseAbs().maxCoeff() > kHermTol) {
    throw std::invalid_argument("projector is not idempotent");
  }
}

Projector Projector::onto(const StateVector& psi) {
  return Projector(psi.amplitudes() * psi.amplitudes().adjoint());
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
  const int da = a.dim();
  const int db = b.dim();
  check_dim(da * db);
  Vector out(da * db);
  for (int i = 0; i < da; ++i) {
    out.segment(i * db, db) = a.amplitude(i) * b.amplitudes();
  }
  return StateVector(std::move(out));
}

Matrix tensor_product(const Matrix& a, const Matrix& b) {
  const int ra = static_cast<int>(a.rows());
  const int ca = static_cast<int>(a.cols());
  const int rb = static_cast<int>(b.rows());
  const int cb = static_cast<int>(b.cols());
  if (ra * rb > kMaxDim || ca * cb > kMaxDim) {
    throw std::invalid_argument("tensor product exceeds supported dimension " +
                                std::to_string(kMaxDim));
  }
  Matrix out(ra * rb, ca * cb);
  for (int i = 0; i < ra; ++i) {
    for (int k = 0; k < ca; ++k) {
      out.block(i * rb, k * cb, rb, cb) = a(i, k) * b;
    }
  }
  return out;
}

DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator::from_matrix(tensor_product(a.matrix(), b.matrix()));
}

DensityOperator partial_trace(const DensityOperator& rho, int keep) {
  if (keep != 1 && keep != 2) {
    throw std::invalid_argument("partial_trace: keep must be 1 or 2");
  }
  const int d = isqrt_exact(rho.dim());
  const Matrix& m = rho.matrix();
  Matrix out = Matrix::Zero(d, d);
  if (keep == 1) {
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j) out(i, k) += m(i * d + j, k * d + j);
  } else {
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l)
        for (int i = 0; i < d; ++i) out(j, l) += m(i * d + j, i * d + l);
  }
  return DensityOperator::from_matrix(std::move(out));
}

std::vector<double> born_probabilities(const DensityOperator& rho,
                                       const std::vector<StateVector>& basis) {
  const int dim = rho.dim();
  if (static_cast<int>(basis.size()) != dim) {
    throw std::invalid_argument("basis does not span the space");
  }
  for (size_t i = 0; i < basis.size(); ++i) {
    if (basis[i].dim() != dim) {
      throw std::invalid_argument("basis vector dimension mismatch");
    }
    for (size_t j = i; j < basis.size(); ++j) {
      const Complex overlap = basis[i].inner(basis[j]);
      const double expected = (i == j) ? 1.0 : 0.0;
      if (std::abs(overlap - expected) > kNormTol) {
        throw std::invalid_argument("basis is not orthonormal");
      }
    }
  }
  std::vector<double> probs(basis.size());
  double total = 0.0;
  for (size_t i = 0; i < basis.size(); ++i) {
    const Vector& v = basis[i].amplitudes();
    double p = std::real(Complex(v.dot(rho.matrix() * v)));
    p = std::clamp(p, 0.0, 1.0);
    probs[i] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > kNormTol) {
    throw std::logic_error("born probabilities sum to " + std::to_string(total));
  }
  return probs;
}

ProjectionResult project_and_renormalize(const DensityOperator& rho, const Projector& p) {
  if (rho.dim() != p.dim()) {
    throw std::invalid_argument("projector does not act on the state space");
  }
  Matrix projected = p.matrix() * rho.matrix() * p.matrix();
  const double probability = std::real(projected.trace());
  if (probability <= kZeroBranchTol) {
    return ProjectionResult{std::nullopt, std::max(probability, 0.0)};
  }
  return ProjectionResult{DensityOperator::from_matrix(projected / probability),
                          probability};
}

}  // namespace tkp
