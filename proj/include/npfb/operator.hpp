#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "npfb/field.hpp"
#include "npfb/grid.hpp"

namespace npfb {

/// How the zero-gradient viscosity branches are scaled.
///
/// `consistent` uses (1/p)(tr D2u + (p-2) lambda_{max|min}), which matches the
/// 1/p in front of the Laplacian part of the operator. `paper_literal` drops
/// the 1/p factor.
enum class BranchNormalization { consistent, paper_literal };

class SingularPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class OperatorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
using JetVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
template <typename Scalar>
using JetMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

template <typename Scalar>
struct OperatorParams {
  Scalar p = Scalar(2);
  Scalar delta = Scalar(0);
  int n = 2;
  BranchNormalization branch = BranchNormalization::consistent;

  /// Smallest eigenvalue bound of the coefficient matrix.
  Scalar lambda() const { return std::min((p - 1) / p, Scalar(1) / p); }
  /// Largest eigenvalue bound of the coefficient matrix.
  Scalar Lambda() const { return std::max((p - 1) / p, Scalar(1) / p); }

  void validate() const {
    if (!(p > Scalar(1))) throw OperatorError("p must exceed 1");
    if (!(delta >= Scalar(0))) throw OperatorError("delta must be non-negative");
    if (n < 1 || n > kMaxDim) throw OperatorError("dimension must be in 1..3");
  }
};

/// Spatial gradient, Hessian and backward time difference at one node.
template <typename Scalar>
struct LocalJet {
  JetVector<Scalar> grad;
  JetMatrix<Scalar> hess;
  Scalar ut = Scalar(0);
};

/// a_ij(eta) = (1/p) delta_ij + ((p-2)/p) eta_i eta_j / (|eta|^2 + delta).
template <typename Derived>
JetMatrix<typename Derived::Scalar> regularized_coefficients(
    const Eigen::MatrixBase<Derived>& eta, const OperatorParams<typename Derived::Scalar>& params) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm2 = eta.squaredNorm();
  const Eigen::Index n = eta.size();
  JetMatrix<Scalar> a = JetMatrix<Scalar>::Identity(n, n) / params.p;
  if (params.delta == Scalar(0) && norm2 == Scalar(0))
    throw SingularPointError("coefficients undefined at zero gradient with delta = 0");
  if (params.p != Scalar(2))
    a.noalias() += ((params.p - 2) / params.p / (norm2 + params.delta)) * (eta * eta.transpose());
  return a;
}

/// Sum_ij a_ij(grad) hess_ij.
template <typename Scalar>
Scalar regularized_operator(const LocalJet<Scalar>& jet, const OperatorParams<Scalar>& params) {
  return regularized_coefficients(jet.grad, params).cwiseProduct(jet.hess).sum();
}

template <typename Scalar>
void check_symmetric(const JetMatrix<Scalar>& hess) {
  for (Eigen::Index i = 0; i < hess.rows(); ++i)
    for (Eigen::Index j = i + 1; j < hess.cols(); ++j) {
      using std::abs;
      const Scalar bound = Scalar(1e-12) * std::max(Scalar(1), abs(hess(i, j)));
      if (abs(hess(i, j) - hess(j, i)) > bound) throw OperatorError("Hessian is not symmetric");
    }
}

/// Elliptic part of the operator in the viscosity sense.
///
/// Away from critical points this is (1/p) tr H + ((p-2)/p) <H q, q> with
/// q = grad/|grad|. At (numerically) zero gradient the extremal eigenvalue
/// of H replaces <H q, q>: lambda_max for p >= 2, lambda_min for p < 2.
template <typename Scalar>
Scalar viscosity_branch_value(const LocalJet<Scalar>& jet, const OperatorParams<Scalar>& params,
                              Scalar scale = Scalar(1)) {
  using std::sqrt;
  check_symmetric(jet.hess);
  const Scalar p = params.p;
  const Scalar trace = jet.hess.trace();
  const Scalar threshold =
      Scalar(10) * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), scale);
  const Scalar gnorm = sqrt(jet.grad.squaredNorm());
  if (gnorm > threshold) {
    const JetVector<Scalar> q = jet.grad / gnorm;
    return trace / p + (p - 2) / p * q.dot(jet.hess * q);
  }
  Eigen::SelfAdjointEigenSolver<JetMatrix<Scalar>> es(jet.hess, Eigen::EigenvaluesOnly);
  const Scalar extreme = p >= Scalar(2) ? es.eigenvalues().maxCoeff() : es.eigenvalues().minCoeff();
  const Scalar value = trace + (p - 2) * extreme;
  return params.branch == BranchNormalization::consistent ? value / p : value;
}

/// Central-difference jet of a spatial slice at an interior node.
LocalJet<double> slice_jet(const double* slice, const SpaceTimeGrid& grid, const NodeIndex& node);

/// Jet at a space-time node; ut is the backward difference (0 on the first level).
LocalJet<double> local_jet(const Field& field, const GridIndex& idx);

/// Discrete sum_ij a_ij(grad_h u) (D2_h u)_ij at an interior node.
double apply_operator(const Field& field, const GridIndex& idx, const OperatorParams<double>& params);

}  // namespace npfb
