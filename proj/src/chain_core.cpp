#include "renvnet/chain_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "renvnet/errors.hpp"

namespace renvnet {

namespace {

std::string describe_classes(const ClassDecomposition& dec) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t c : dec.closed_classes()) {
    if (!first) os << ", ";
    first = false;
    os << '{';
    for (std::size_t k = 0; k < dec.classes[c].size(); ++k)
      os << (k ? "," : "") << dec.classes[c][k];
    os << '}';
  }
  return os.str();
}

// Solves x * a = 0, sum(x) = 1 by replacing the last balance equation with
// the normalization row. `a` has zero row sums, so one equation is redundant.
Vector solve_normalized_left_null(const Matrix& a) {
  const Eigen::Index n = a.rows();
  Matrix m = a.transpose();
  m.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;

  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible())
    throw Error(ErrorCode::SingularSystem,
                "balance system with normalization row is singular");
  Vector x = lu.solve(b);
  // one round of iterative refinement
  x += lu.solve(b - m * x);

  for (Eigen::Index i = 0; i < n; ++i) {
    if (x(i) < 0.0 && x(i) > -1e-12) x(i) = 0.0;
  }
  return x / x.sum();
}

}  // namespace

RoutingMatrix::RoutingMatrix(Matrix entries, double tol) : m_(std::move(entries)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    std::ostringstream os;
    os << "routing matrix must be square and non-empty, got " << m_.rows() << "x"
       << m_.cols();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  for (Eigen::Index i = 0; i < m_.rows(); ++i) {
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
      const double v = m_(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + tol) {
        std::ostringstream os;
        os << "entry (" << i << "," << j << ") = " << v << " is not a probability";
        throw Error(ErrorCode::InvalidArgument, os.str());
      }
    }
    const double s = m_.row(i).sum();
    if (std::abs(s - 1.0) > tol) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << i << " sums to " << s << ", expected 1";
      throw Error(ErrorCode::RowSumError, os.str());
    }
  }
}

RoutingMatrix RoutingMatrix::identity(Eigen::Index dim) {
  return RoutingMatrix(Matrix::Identity(dim, dim));
}

ProbabilityVector::ProbabilityVector(Vector entries, double tol) : p_(std::move(entries)) {
  if (p_.size() == 0)
    throw Error(ErrorCode::DimensionMismatch, "probability vector is empty");
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    if (!std::isfinite(p_(i)) || p_(i) < 0.0) {
      std::ostringstream os;
      os << "entry " << i << " = " << p_(i) << " is negative or not finite";
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
  }
  if (std::abs(p_.sum() - 1.0) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "probability vector sums to " << p_.sum();
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

std::size_t ClassDecomposition::closed_count() const {
  return static_cast<std::size_t>(std::count(closed.begin(), closed.end(), true));
}

std::vector<std::size_t> ClassDecomposition::closed_classes() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < closed.size(); ++c)
    if (closed[c]) out.push_back(c);
  return out;
}

ClassDecomposition communicating_classes(const Matrix& weights) {
  const auto n = static_cast<std::size_t>(weights.rows());
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);

  // Tarjan
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  ClassDecomposition dec;
  dec.class_of.assign(n, 0);

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w = 0; w < n; ++w) {
      if (w == v || !(weights(v, w) > 0.0)) continue;
      if (index[w] == kUnvisited) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> cls;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        cls.push_back(w);
      } while (w != v);
      std::sort(cls.begin(), cls.end());
      for (std::size_t s : cls) dec.class_of[s] = dec.classes.size();
      dec.classes.push_back(std::move(cls));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] == kUnvisited) visit(v);

  // Present classes ordered by their smallest member.
  std::vector<std::size_t> order(dec.classes.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dec.classes[a].front() < dec.classes[b].front();
  });
  ClassDecomposition sorted;
  sorted.class_of.assign(n, 0);
  for (std::size_t c : order) {
    for (std::size_t s : dec.classes[c]) sorted.class_of[s] = sorted.classes.size();
    sorted.classes.push_back(dec.classes[c]);
  }

  sorted.closed.assign(sorted.classes.size(), true);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w = 0; w < n; ++w)
      if (w != v && weights(v, w) > 0.0 && sorted.class_of[v] != sorted.class_of[w])
        sorted.closed[sorted.class_of[v]] = false;
  return sorted;
}

ClassDecomposition check_irreducible(const RoutingMatrix& p) {
  return communicating_classes(p.matrix());
}

ProbabilityVector stationary_distribution(const RoutingMatrix& p) {
  const ClassDecomposition dec = check_irreducible(p);
  if (dec.closed_count() != 1)
    throw Error(ErrorCode::NotIrreducible,
                "chain has " + std::to_string(dec.closed_count()) +
                    " closed classes: " + describe_classes(dec));
  const Eigen::Index n = p.dim();
  return ProbabilityVector(
      solve_normalized_left_null(p.matrix() - Matrix::Identity(n, n)));
}

ProbabilityVector generator_stationary(const Matrix& q) {
  if (q.rows() == 0 || q.rows() != q.cols())
    throw Error(ErrorCode::DimensionMismatch, "generator must be square");
  const ClassDecomposition dec = communicating_classes(q);
  if (dec.closed_count() != 1)
    throw Error(ErrorCode::NotIrreducible,
                "generator has " + std::to_string(dec.closed_count()) +
                    " closed classes: " + describe_classes(dec));
  return ProbabilityVector(solve_normalized_left_null(q));
}

bool check_reversible(const RoutingMatrix& p, const ProbabilityVector& pi, double tol) {
  if (p.dim() != pi.size())
    throw Error(ErrorCode::DimensionMismatch, "matrix and vector dimensions differ");
  const Eigen::Index n = p.dim();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(pi[i] * p(i, j) - pi[j] * p(j, i)) > tol) return false;
  return true;
}

double invariant_residual(const Vector& x, const RoutingMatrix& p) {
  if (x.size() != p.dim())
    throw Error(ErrorCode::DimensionMismatch, "vector and matrix dimensions differ");
  const Vector y = p.matrix().transpose() * x;
  return (y - x).cwiseAbs().maxCoeff();
}

}  // namespace renvnet
