#pragma once

// Finite discrete-time Markov chain algebra: validated stochastic matrices,
// communicating classes, stationary vectors and detailed balance.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace renvnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kValidationTol = 1e-12;
inline constexpr double kNumericTol = 1e-10;

/// Division with the convention 0/0 := 0. Any other zero denominator is
/// still an error (returns +/-inf like plain division).
inline double guarded_div(double num, double den) {
  if (num == 0.0 && den == 0.0) return 0.0;
  return num / den;
}

/// Square row-stochastic matrix. Construction rejects negative entries,
/// entries above one and rows whose sum is off by more than `tol`; rows are
/// never renormalized.
class RoutingMatrix {
 public:
  explicit RoutingMatrix(Matrix entries, double tol = kValidationTol);

  static RoutingMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

/// Nonnegative vector summing to one.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(Vector entries, double tol = kValidationTol);

  Eigen::Index size() const { return p_.size(); }
  double operator[](Eigen::Index i) const { return p_(i); }
  const Vector& vector() const { return p_; }

 private:
  Vector p_;
};

struct ClassDecomposition {
  std::vector<std::vector<std::size_t>> classes;  // each sorted ascending
  std::vector<bool> closed;                       // one flag per class
  std::vector<std::size_t> class_of;              // state -> class index

  bool irreducible() const { return classes.size() == 1; }
  std::size_t closed_count() const;
  std::vector<std::size_t> closed_classes() const;
};

/// Strongly connected components of the graph {(i,j) : i != j, w(i,j) > 0}.
/// Works for stochastic matrices and for CTMC generators alike.
ClassDecomposition communicating_classes(const Matrix& weights);

ClassDecomposition check_irreducible(const RoutingMatrix& p);

/// Unique stationary vector. Requires exactly one closed class (inessential
/// states are allowed and receive zero mass).
ProbabilityVector stationary_distribution(const RoutingMatrix& p);

/// Unique stochastic solution of x * q = 0 for a CTMC generator `q`.
ProbabilityVector generator_stationary(const Matrix& q);

bool check_reversible(const RoutingMatrix& p, const ProbabilityVector& pi,
                      double tol = kNumericTol);

/// ||x P - x||_inf
double invariant_residual(const Vector& x, const RoutingMatrix& p);

}  // namespace renvnet
