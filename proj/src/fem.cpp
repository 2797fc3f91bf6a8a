#include "axitherm/fem.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <string>
#include <thread>

#include "axitherm/error.hpp"
#include "axitherm/format.hpp"

namespace axitherm {

const QuadratureRule& triangle_rule_degree3() {
  static const QuadratureRule rule{
      {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, {0.6, 0.2, 0.2}, {0.2, 0.6, 0.2}, {0.2, 0.2, 0.6}},
      {-27.0 / 96.0, 25.0 / 96.0, 25.0 / 96.0, 25.0 / 96.0},
      3};
  return rule;
}

const QuadratureRule& triangle_rule_degree5() {
  static const QuadratureRule rule = [] {
    const double s = std::sqrt(15.0);
    const double a1 = (9.0 - 2.0 * s) / 21.0, b1 = (6.0 + s) / 21.0;
    const double a2 = (9.0 + 2.0 * s) / 21.0, b2 = (6.0 - s) / 21.0;
    const double w1 = (155.0 + s) / 2400.0, w2 = (155.0 - s) / 2400.0;
    return QuadratureRule{{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                           {a1, b1, b1},
                           {b1, a1, b1},
                           {b1, b1, a1},
                           {a2, b2, b2},
                           {b2, a2, b2},
                           {b2, b2, a2}},
                          {9.0 / 80.0, w1, w1, w1, w2, w2, w2},
                          5};
  }();
  return rule;
}

const LineRule& line_rule_gauss2() {
  static const LineRule rule{{0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)}, {0.5, 0.5}};
  return rule;
}

ShapeValues shape_functions(const std::array<double, 3>& barycentric) {
  return {barycentric, {{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}}};
}

TriangleGeometry::TriangleGeometry(const std::array<Point2, 3>& v) : vertices(v) {
  area = signed_area(v[0], v[1], v[2]);
  const double inv = 1.0 / (2.0 * area);
  for (int i = 0; i < 3; ++i) {
    const Point2& pj = v[(i + 1) % 3];
    const Point2& pk = v[(i + 2) % 3];
    gradients[i] = {(pj.y - pk.y) * inv, (pk.r - pj.r) * inv};
  }
}

Point2 TriangleGeometry::map(const std::array<double, 3>& b) const {
  return {b[0] * vertices[0].r + b[1] * vertices[1].r + b[2] * vertices[2].r,
          b[0] * vertices[0].y + b[1] * vertices[1].y + b[2] * vertices[2].y};
}

double integrate_weighted(const std::array<Point2, 3>& triangle, const std::function<double(double, double)>& f,
                          const QuadratureRule& rule) {
  const TriangleGeometry geo(triangle);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Point2 p = geo.map(rule.points[q]);
    sum += rule.weights[q] * 2.0 * std::abs(geo.area) * f(p.r, p.y) * p.r;
  }
  return sum;
}

// ---------------------------------------------------------------------------

SparseMatrix::SparseMatrix(std::size_t n, const std::vector<std::vector<std::size_t>>& columns) : n_(n) {
  if (columns.size() != n) throw Error("sparsity pattern row count mismatch");
  row_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> row = columns[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (std::size_t j : row)
      if (j >= n) throw Error("sparsity pattern column out of range");
    columns_.insert(columns_.end(), row.begin(), row.end());
    row_offsets_[i + 1] = columns_.size();
  }
  values_.assign(columns_.size(), 0.0);
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::vector<std::size_t>> cols(n);
  for (std::size_t i = 0; i < n; ++i) cols[i] = {i};
  SparseMatrix m(n, cols);
  std::fill(m.values_.begin(), m.values_.end(), 1.0);
  return m;
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
  const std::size_t n = dense.size();
  std::vector<std::vector<std::size_t>> cols(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dense[i][j] != 0.0) cols[i].push_back(j);
  SparseMatrix m(n, cols);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dense[i][j] != 0.0) m.add(i, j, dense[i][j]);
  return m;
}

double* SparseMatrix::find(std::size_t i, std::size_t j) {
  const auto begin = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto end = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return nullptr;
  return &values_[static_cast<std::size_t>(it - columns_.begin())];
}

void SparseMatrix::add(std::size_t i, std::size_t j, double v) {
  double* slot = find(i, j);
  if (slot == nullptr)
    throw Error("entry (" + std::to_string(i) + "," + std::to_string(j) + ") is outside the sparsity pattern");
  *slot += v;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const double* slot = const_cast<SparseMatrix*>(this)->find(i, j);
  return slot == nullptr ? 0.0 : *slot;
}

void SparseMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw Error("matrix-vector size mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
    y[i] = s;
  }
  return y;
}

double SparseMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      worst = std::max(worst, std::abs(values_[k] - at(columns_[k], i)));
  return worst;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
  return d;
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> d(n_, std::vector<double>(n_, 0.0));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) d[i][columns_[k]] = values_[k];
  return d;
}

void SparseMatrix::write_matrix_market(std::ostream& out) const {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << n_ << ' ' << n_ << ' ' << values_.size() << '\n';
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      out << i + 1 << ' ' << columns_[k] + 1 << ' ' << format_double(values_[k]) << '\n';
}

SparseMatrix make_pattern(const Mesh& mesh, std::size_t components) {
  const std::size_t n = mesh.nodes.size() * components;
  std::vector<std::vector<std::size_t>> cols(n);
  for (const auto& t : mesh.triangles)
    for (std::size_t a : t.nodes)
      for (std::size_t ca = 0; ca < components; ++ca)
        for (std::size_t b : t.nodes)
          for (std::size_t cb = 0; cb < components; ++cb) cols[a * components + ca].push_back(b * components + cb);
  return SparseMatrix(n, cols);
}

// ---------------------------------------------------------------------------

void DofMap::constrain(std::size_t dof, double value) {
  if (dof >= size()) throw Error("constraint on nonexistent dof " + std::to_string(dof));
  constrained_[dof] = value;
}

NodalField interpolate(const Mesh& mesh, const std::function<double(double, double)>& f) {
  NodalField field{1, std::vector<double>(mesh.nodes.size())};
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) field.values[i] = f(mesh.nodes[i].r, mesh.nodes[i].y);
  return field;
}

LinearSystem apply_constraints(SparseMatrix A, std::vector<double> b, const DofMap& dofs) {
  const std::size_t n = A.size();
  if (b.size() != n || dofs.size() != n) throw Error("apply_constraints: size mismatch");
  std::vector<char> fixed(n, 0);
  std::vector<double> value(n, 0.0);
  for (const auto& [dof, v] : dofs.constrained()) {
    if (dof >= n) throw Error("constraint on nonexistent dof " + std::to_string(dof));
    fixed[dof] = 1;
    value[dof] = v;
  }
  const auto offsets = A.row_offsets();
  const auto cols = A.column_indices();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      const std::size_t j = cols[k];
      double* slot = A.find(i, j);
      if (fixed[i]) {
        *slot = (i == j) ? 1.0 : 0.0;
      } else if (fixed[j]) {
        b[i] -= *slot * value[j];
        *slot = 0.0;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!fixed[i]) continue;
    if (A.find(i, i) == nullptr) throw Error("constrained dof " + std::to_string(i) + " has no diagonal entry");
    b[i] = value[i];
  }
  return {std::move(A), std::move(b)};
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double norm_max(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

namespace {

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& A) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(A.nonzeros());
  const auto offsets = A.row_offsets();
  const auto cols = A.column_indices();
  const auto vals = A.values();
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k)
      if (vals[k] != 0.0)
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(cols[k]), vals[k]);
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(A.size()), static_cast<Eigen::Index>(A.size()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

std::vector<double> residual(const SparseMatrix& A, std::span<const double> x, std::span<const double> b) {
  std::vector<double> r = A.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

}  // namespace

std::vector<double> solve_lu(const SparseMatrix& A, std::span<const double> b) {
  const std::size_t n = A.size();
  if (b.size() != n) throw Error("solve_lu: size mismatch");
  if (n == 0) return {};
  for (std::size_t i = 0; i < n; ++i) {
    const auto offsets = A.row_offsets();
    const auto vals = A.values();
    if (std::all_of(vals.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                    vals.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]), [](double v) { return v == 0.0; }))
      throw Error("LU: matrix is structurally singular, row " + std::to_string(i) + " is empty");
  }
  const auto m = to_eigen(A);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) throw Error("LU factorization failed: " + lu.lastErrorMessage());

  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd x = lu.solve(rhs);
  std::vector<double> sol(x.data(), x.data() + n);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return sol;
  // One step of iterative refinement keeps the residual contract on badly
  // scaled systems.
  auto r = residual(A, sol, b);
  if (norm2(r) > 1e-13 * bnorm) {
    Eigen::Map<const Eigen::VectorXd> rr(r.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd dx = lu.solve(rr);
    for (std::size_t i = 0; i < n; ++i) sol[i] += dx[static_cast<Eigen::Index>(i)];
    r = residual(A, sol, b);
  }
  const double rel = norm2(r) / bnorm;
  if (!std::isfinite(rel) || rel > 1e-10)
    throw Error("LU: matrix is numerically singular (relative residual " + format_double(rel) + ")");
  return sol;
}

CgResult solve_cg(const SparseMatrix& A, std::span<const double> b, double tol, std::size_t max_iter) {
  const std::size_t n = A.size();
  if (b.size() != n) throw Error("solve_cg: size mismatch");
  CgResult out;
  out.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return out;

  std::vector<double> inv_diag = A.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw Error("CG: matrix has a non-positive diagonal entry");
    d = 1.0 / d;
  }
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n), p(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

  for (std::size_t it = 1; it <= max_iter; ++it) {
    const auto Ap = A.multiply(p);
    double pAp = 0.0;
    for (std::size_t i = 0; i < n; ++i) pAp += p[i] * Ap[i];
    if (!(pAp > 0.0)) throw Error("CG: matrix is not positive definite");
    const double step = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] += step * p[i];
      r[i] -= step * Ap[i];
    }
    out.iterations = it;
    out.relative_residual = norm2(r) / bnorm;
    if (out.relative_residual <= tol) return out;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    double rz_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz_next += r[i] * z[i];
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw Error("CG did not converge in " + std::to_string(max_iter) + " iterations (relative residual " +
              format_double(out.relative_residual) + ")");
}

std::vector<double> solve_linear(const SparseMatrix& A, std::span<const double> b, LinearSolver solver) {
  if (solver == LinearSolver::CG) return solve_cg(A, b, 1e-12, 20 * A.size() + 100).x;
  return solve_lu(A, b);
}

std::size_t assembly_threads() {
  const char* env = std::getenv("AXITHERM_THREADS");
  if (env == nullptr) return 1;
  const long v = std::strtol(env, nullptr, 10);
  return v > 0 ? static_cast<std::size_t>(v) : 1;
}

void for_each_element(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t threads = std::min(assembly_threads(), std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    for (std::size_t e = 0; e < count; ++e) body(e);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, &failures, t, begin, end] {
      try {
        for (std::size_t e = begin; e < end; ++e) body(e);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
}

}  // namespace axitherm
