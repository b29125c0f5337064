#include "catpulse/algebra.hpp"

#include <algorithm>
#include <set>

namespace catpulse {

NumericPolicy& numeric_policy() {
  static NumericPolicy policy;
  return policy;
}

SpaceLayout::SpaceLayout(std::vector<Factor> factors)
    : factors_(std::move(factors)) {
  std::set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.dim < 1) throw DimensionError("factor '" + f.label + "' has dim < 1");
    if (!seen.insert(f.label).second)
      throw LayoutError("duplicate factor label '" + f.label + "'");
    total_dim_ *= f.dim;
  }
}

int SpaceLayout::index_of(const std::string& label) const {
  for (int i = 0; i < num_factors(); ++i)
    if (factors_[i].label == label) return i;
  throw LayoutError("unknown factor label '" + label + "'");
}

bool SpaceLayout::has(const std::string& label) const {
  return std::any_of(factors_.begin(), factors_.end(),
                     [&](const Factor& f) { return f.label == label; });
}

int SpaceLayout::dim_of(const std::string& label) const {
  return factors_[index_of(label)].dim;
}

SpaceLayout SpaceLayout::with_factor(const Factor& f) const {
  auto fs = factors_;
  fs.push_back(f);
  return SpaceLayout(fs);
}

bool SpaceLayout::operator==(const SpaceLayout& other) const {
  if (factors_.size() != other.factors_.size()) return false;
  for (size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].label != other.factors_[i].label ||
        factors_[i].dim != other.factors_[i].dim)
      return false;
  return true;
}

Operator::Operator(SpaceLayout l, Matrix m)
    : layout(std::move(l)), matrix(std::move(m)) {
  if (matrix.rows() != layout.total_dim() || matrix.cols() != layout.total_dim())
    throw DimensionError("operator matrix does not match layout dimension");
}

bool Operator::is_hermitian(double tol) const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Operator Operator::dag() const { return Operator(layout, matrix.adjoint()); }

Operator operator*(const Operator& a, const Operator& b) {
  if (a.layout != b.layout) throw LayoutError("operator layout mismatch");
  return Operator(a.layout, a.matrix * b.matrix);
}
Operator operator+(const Operator& a, const Operator& b) {
  if (a.layout != b.layout) throw LayoutError("operator layout mismatch");
  return Operator(a.layout, a.matrix + b.matrix);
}
Operator operator-(const Operator& a, const Operator& b) {
  if (a.layout != b.layout) throw LayoutError("operator layout mismatch");
  return Operator(a.layout, a.matrix - b.matrix);
}
Operator operator*(cplx s, const Operator& a) {
  return Operator(a.layout, s * a.matrix);
}

QuantumState QuantumState::pure(SpaceLayout l, Vector v) {
  if (v.size() != l.total_dim())
    throw DimensionError("state vector does not match layout dimension");
  QuantumState s;
  s.layout = std::move(l);
  s.kind = StateKind::Pure;
  s.data = v;
  return s;
}

QuantumState QuantumState::density(SpaceLayout l, Matrix rho) {
  if (rho.rows() != l.total_dim() || rho.cols() != l.total_dim())
    throw DimensionError("density matrix does not match layout dimension");
  QuantumState s;
  s.layout = std::move(l);
  s.kind = StateKind::Density;
  s.data = std::move(rho);
  return s;
}

Vector QuantumState::vector() const {
  if (kind != StateKind::Pure) throw ValidationError("state is not pure");
  return data.col(0);
}

Matrix QuantumState::density_matrix() const {
  if (kind == StateKind::Density) return data;
  return data * data.adjoint();
}

double QuantumState::norm() const {
  if (kind == StateKind::Pure) return data.col(0).norm();
  return data.trace().real();
}

void QuantumState::validate() const {
  const auto& tol = numeric_policy();
  if (kind == StateKind::Pure) {
    if (norm() > 1.0 + tol.norm_tol)
      throw ValidationError("pure state norm exceeds 1");
  } else {
    if ((data - data.adjoint()).cwiseAbs().maxCoeff() > tol.hermiticity_tol)
      throw ValidationError("density matrix is not Hermitian");
    if (data.trace().real() > 1.0 + tol.norm_tol)
      throw ValidationError("density matrix trace exceeds 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(data, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol.psd_tol)
      throw ValidationError("density matrix has a negative eigenvalue");
  }
}

Operator destroy(int dim) {
  if (dim < 2) throw DimensionError("destroy requires dim >= 2");
  Matrix m = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(double(n));
  return Operator(SpaceLayout({{"mode", dim}}), m);
}

Operator identity(const SpaceLayout& layout) {
  return Operator(layout, Matrix::Identity(layout.total_dim(), layout.total_dim()));
}

Operator number_op(int dim) {
  Matrix m = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) m(n, n) = double(n);
  return Operator(SpaceLayout({{"mode", dim}}), m);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Operator embed(const Operator& op, const SpaceLayout& target,
               const std::string& site) {
  if (op.layout.num_factors() != 1)
    throw LayoutError("embed expects a single-factor operator");
  const int pos = target.index_of(site);
  if (op.layout.factors()[0].dim != target.factors()[pos].dim)
    throw DimensionError("embed: operator dim does not match factor '" + site +
                         "'");
  Matrix acc = Matrix::Identity(1, 1);
  for (int i = 0; i < target.num_factors(); ++i) {
    const int d = target.factors()[i].dim;
    if (i == pos)
      acc = kron(acc, op.matrix);
    else
      acc = kron(acc, Matrix::Identity(d, d));
  }
  return Operator(target, std::move(acc));
}

cplx expectation(const Operator& op, const QuantumState& state) {
  if (op.layout != state.layout) throw LayoutError("expectation: layout mismatch");
  if (state.kind == StateKind::Pure) {
    const Vector v = state.data.col(0);
    return (v.adjoint() * op.matrix * v)(0, 0);
  }
  return (op.matrix * state.data).trace();
}

QuantumState partial_trace(const QuantumState& state,
                           const std::vector<std::string>& keep) {
  const auto& layout = state.layout;
  const int nf = layout.num_factors();
  std::vector<bool> keep_mask(nf, false);
  std::vector<Factor> kept;
  for (int i = 0; i < nf; ++i) {
    const auto& f = layout.factors()[i];
    if (std::find(keep.begin(), keep.end(), f.label) != keep.end()) {
      keep_mask[i] = true;
      kept.push_back(f);
    }
  }
  if (kept.size() != keep.size())
    throw LayoutError("partial_trace: unknown label in keep list");

  // Strides of each factor in the flattened index (row-major Kronecker order).
  std::vector<int> stride(nf, 1);
  for (int i = nf - 2; i >= 0; --i)
    stride[i] = stride[i + 1] * layout.factors()[i + 1].dim;

  SpaceLayout out_layout(kept);
  const int dk = out_layout.total_dim();
  int dt = layout.total_dim() / dk;

  // Enumerate kept and traced multi-indices as flat offsets.
  std::vector<int> keep_offsets(dk, 0), trace_offsets(dt, 0);
  {
    std::vector<int> kf, tf;
    for (int i = 0; i < nf; ++i) (keep_mask[i] ? kf : tf).push_back(i);
    auto fill = [&](const std::vector<int>& fs, std::vector<int>& offs) {
      offs.assign(offs.size(), 0);
      const int count = static_cast<int>(offs.size());
      for (int idx = 0; idx < count; ++idx) {
        int rem = idx, off = 0;
        for (int k = static_cast<int>(fs.size()) - 1; k >= 0; --k) {
          const int d = layout.factors()[fs[k]].dim;
          off += (rem % d) * stride[fs[k]];
          rem /= d;
        }
        offs[idx] = off;
      }
    };
    fill(kf, keep_offsets);
    fill(tf, trace_offsets);
  }

  const Matrix rho = state.density_matrix();
  Matrix out = Matrix::Zero(dk, dk);
  for (int a = 0; a < dk; ++a)
    for (int b = 0; b < dk; ++b) {
      cplx s = 0.0;
      for (int t = 0; t < dt; ++t)
        s += rho(keep_offsets[a] + trace_offsets[t],
                 keep_offsets[b] + trace_offsets[t]);
      out(a, b) = s;
    }
  return QuantumState::density(out_layout, std::move(out));
}

double tail_population(const QuantumState& state, const std::string& label) {
  const int d = state.layout.dim_of(label);
  auto reduced = partial_trace(state, {label});
  return reduced.data(d - 1, d - 1).real();
}

Vector basis_vector(int dim, int n) {
  if (n < 0 || n >= dim) throw DimensionError("basis_vector: index out of range");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return v;
}

}  // namespace catpulse
