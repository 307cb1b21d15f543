#pragma once

// Linear map between block spaces stored as an explicit real matrix in
// isometric Hermitian coordinates. Built once by probing a matrix-free map
// with the coordinate basis; (A A^*)^{-1} is a spectral pseudo-inverse so that
// redundant constraints (e.g. the shared trace of two marginals) are harmless.

#include <functional>
#include <utility>

#include "qstrassen/sdp/blocks.hpp"

namespace qstrassen::sdp {

class DenseOperator {
 public:
  using Map = std::function<Blocks(const Blocks&)>;

  DenseOperator(std::vector<Eigen::Index> primal_dims, std::vector<Eigen::Index> constraint_dims, const Map& map)
      : pdims_(std::move(primal_dims)), cdims_(std::move(constraint_dims)) {
    Eigen::Index n = 0;
    for (auto d : pdims_) n += herm_dim(d);
    Eigen::Index m = 0;
    for (auto d : cdims_) m += herm_dim(d);
    mat_.resize(m, n);
    RVector unit = RVector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      unit(k) = 1.0;
      mat_.col(k) = vectorize(map(devectorize(unit, pdims_)));
      unit(k) = 0.0;
    }
    const Eigen::MatrixXd gram = mat_ * mat_.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const RVector& w = es.eigenvalues();
    const double cutoff = 1e-12 * std::max(1.0, w.maxCoeff());
    RVector inv = w.unaryExpr([cutoff](double v) { return v > cutoff ? 1.0 / v : 0.0; });
    normal_pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  }

  Blocks apply(const Blocks& x) const { return devectorize(mat_ * vectorize(x), cdims_); }
  Blocks adjoint(const Blocks& y) const { return devectorize(mat_.transpose() * vectorize(y), pdims_); }
  Blocks solve_normal(const Blocks& r) const { return devectorize(normal_pinv_ * vectorize(r), cdims_); }
  const std::vector<Eigen::Index>& primal_dims() const { return pdims_; }
  const std::vector<Eigen::Index>& constraint_dims() const { return cdims_; }
  const Eigen::MatrixXd& matrix() const { return mat_; }

 private:
  std::vector<Eigen::Index> pdims_;
  std::vector<Eigen::Index> cdims_;
  Eigen::MatrixXd mat_;
  Eigen::MatrixXd normal_pinv_;
};

}  // namespace qstrassen::sdp
