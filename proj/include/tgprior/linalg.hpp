#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

namespace tgprior {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric eigendecomposition with eigenvalues sorted in descending order.
struct SymEig {
  Vector values;
  Matrix vectors;
};

inline SymEig sym_eig_desc(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Eigen::Index n = sym.rows();
  SymEig out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = es.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

// f(M) for symmetric positive semi-definite M via its spectrum.
template <class F>
Matrix spectral_apply(const Matrix& m, F f) {
  const SymEig e = sym_eig_desc(m);
  Vector fv(e.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(std::max(e.values(i), 0.0));
  return e.vectors * fv.asDiagonal() * e.vectors.transpose();
}

inline Matrix sym_power(const Matrix& m, double p) {
  return spectral_apply(m, [p](double x) { return x == 0.0 ? 0.0 : std::pow(x, p); });
}

inline bool is_symmetric(const Matrix& m, double rel = 1e-12) {
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel * scale;
}

}  // namespace tgprior
