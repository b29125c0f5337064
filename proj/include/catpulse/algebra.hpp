#pragma once

#include <string>
#include <vector>

#include "catpulse/common.hpp"

namespace catpulse {

struct Factor {
  std::string label;
  int dim = 0;
};

// Ordered tensor-product structure. Kronecker order follows the factor order.
class SpaceLayout {
 public:
  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<Factor> factors);

  int total_dim() const { return total_dim_; }
  const std::vector<Factor>& factors() const { return factors_; }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  int index_of(const std::string& label) const;  // throws LayoutError
  bool has(const std::string& label) const;
  int dim_of(const std::string& label) const;

  SpaceLayout with_factor(const Factor& f) const;  // appended at the end

  bool operator==(const SpaceLayout& other) const;
  bool operator!=(const SpaceLayout& other) const { return !(*this == other); }

 private:
  std::vector<Factor> factors_;
  int total_dim_ = 1;
};

struct Operator {
  SpaceLayout layout;
  Matrix matrix;

  Operator() = default;
  Operator(SpaceLayout l, Matrix m);

  bool is_hermitian(double tol) const;
  Operator dag() const;
};

Operator operator*(const Operator& a, const Operator& b);
Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(cplx s, const Operator& a);

enum class StateKind { Pure, Density };

// Pure vectors may be unnormalized (no-jump states), never with norm > 1 + tol.
struct QuantumState {
  SpaceLayout layout;
  StateKind kind = StateKind::Pure;
  Matrix data;  // d x 1 for pure, d x d for density

  static QuantumState pure(SpaceLayout l, Vector v);
  static QuantumState density(SpaceLayout l, Matrix rho);

  Vector vector() const;       // pure only
  Matrix density_matrix() const;  // works for both
  double norm() const;         // vector norm or trace
  void validate() const;       // full invariant check (incl. eigenvalues)
};

// Truncated annihilation operator on a single factor labeled "mode".
Operator destroy(int dim);
Operator identity(const SpaceLayout& layout);
Operator number_op(int dim);

// Promote a single-factor operator to the full space, identity elsewhere.
Operator embed(const Operator& op, const SpaceLayout& target,
               const std::string& site);

cplx expectation(const Operator& op, const QuantumState& state);

Matrix kron(const Matrix& a, const Matrix& b);

// Partial trace down to the listed factors (order taken from the layout).
QuantumState partial_trace(const QuantumState& state,
                           const std::vector<std::string>& keep);

// Population of the highest level of one factor; truncation diagnostic.
double tail_population(const QuantumState& state, const std::string& label);

Vector basis_vector(int dim, int n);

}  // namespace catpulse
