#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "axitherm/mesh.hpp"

namespace axitherm {

// ---------------------------------------------------------------------------
// Quadrature and P1 shape functions

struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  ///< barycentric coordinates
  std::vector<double> weights;                ///< reference-triangle weights, sum 1/2
  int degree = 0;
};

/// 4-point rule exact for degree 3 (one negative centroid weight).
const QuadratureRule& triangle_rule_degree3();
/// 7-point rule exact for degree 5, used for error norms.
const QuadratureRule& triangle_rule_degree5();

/// Gauss-Legendre points on [0, 1] with weights summing to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const LineRule& line_rule_gauss2();

struct ShapeValues {
  std::array<double, 3> values;
  std::array<std::array<double, 2>, 3> reference_gradients;  ///< d/dxi, d/deta
};

ShapeValues shape_functions(const std::array<double, 3>& barycentric);

/// Geometry of one straight triangle: physical P1 gradients and area.
struct TriangleGeometry {
  std::array<Point2, 3> vertices;
  double area = 0.0;
  std::array<std::array<double, 2>, 3> gradients{};  ///< (d/dr, d/dy) of each hat function

  explicit TriangleGeometry(const std::array<Point2, 3>& v);
  [[nodiscard]] Point2 map(const std::array<double, 3>& barycentric) const;
};

/// sum_q w_q |2A| f(r_q, y_q) r_q over the mapped quadrature points.
double integrate_weighted(const std::array<Point2, 3>& triangle, const std::function<double(double, double)>& f,
                          const QuadratureRule& rule);

// ---------------------------------------------------------------------------
// Sparse storage

/// Square matrix in compressed row form with a fixed sparsity pattern.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Pattern from per-row column lists (duplicates removed, sorted).
  SparseMatrix(std::size_t n, const std::vector<std::vector<std::size_t>>& columns);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(const std::vector<std::vector<double>>& dense);

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::size_t nonzeros() const { return values_.size(); }
  [[nodiscard]] std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  [[nodiscard]] std::span<const std::size_t> column_indices() const { return columns_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }

  /// Adds v to entry (i, j); the entry must exist in the pattern.
  void add(std::size_t i, std::size_t j, double v);
  [[nodiscard]] double at(std::size_t i, std::size_t j) const;
  /// Pointer into values for (i, j), or nullptr if not in the pattern.
  double* find(std::size_t i, std::size_t j);
  void set_zero();

  [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
  [[nodiscard]] double max_asymmetry() const;
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] std::vector<double> diagonal() const;
  [[nodiscard]] std::vector<std::vector<double>> to_dense() const;

  void write_matrix_market(std::ostream& out) const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
};

/// Node-coupling pattern of a P1 field with the given number of components
/// per node (dofs interleaved: node * components + component).
SparseMatrix make_pattern(const Mesh& mesh, std::size_t components);

// ---------------------------------------------------------------------------
// Degrees of freedom and fields

class DofMap {
 public:
  DofMap(std::size_t nodes, std::size_t components) : nodes_(nodes), components_(components) {}

  [[nodiscard]] std::size_t size() const { return nodes_ * components_; }
  [[nodiscard]] std::size_t components() const { return components_; }
  [[nodiscard]] std::size_t index(std::size_t node, std::size_t component) const { return node * components_ + component; }

  /// Marks a dof as constrained to value; re-constraining overwrites.
  void constrain(std::size_t dof, double value);
  [[nodiscard]] bool is_constrained(std::size_t dof) const { return constrained_.count(dof) != 0; }
  [[nodiscard]] const std::map<std::size_t, double>& constrained() const { return constrained_; }

 private:
  std::size_t nodes_;
  std::size_t components_;
  std::map<std::size_t, double> constrained_;
};

/// Nodal values of a P1 field: one value (temperature) or two (u_r, u_y) per node.
struct NodalField {
  std::size_t components = 1;
  std::vector<double> values;

  static NodalField constant(std::size_t nodes, double value) { return {1, std::vector<double>(nodes, value)}; }
  [[nodiscard]] std::size_t nodes() const { return components == 0 ? 0 : values.size() / components; }
  [[nodiscard]] double operator()(std::size_t node, std::size_t component = 0) const {
    return values[node * components + component];
  }
  friend bool operator==(const NodalField&, const NodalField&) = default;
};

NodalField interpolate(const Mesh& mesh, const std::function<double(double, double)>& f);

// ---------------------------------------------------------------------------
// Constraints and linear solvers

struct LinearSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
};

/// Symmetric elimination: constrained rows and columns are zeroed with a
/// unit diagonal and the right-hand side carries the prescribed values.
LinearSystem apply_constraints(SparseMatrix A, std::vector<double> b, const DofMap& dofs);

/// Sparse LU factorization and solve; throws on singular systems.
std::vector<double> solve_lu(const SparseMatrix& A, std::span<const double> b);

struct CgResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems.
CgResult solve_cg(const SparseMatrix& A, std::span<const double> b, double tol, std::size_t max_iter);

enum class LinearSolver { LU, CG };

std::vector<double> solve_linear(const SparseMatrix& A, std::span<const double> b, LinearSolver solver);

double norm2(std::span<const double> v);
double norm_max(std::span<const double> v);

/// Worker count for element loops, from AXITHERM_THREADS (default 1).
std::size_t assembly_threads();

/// Runs body(e) for every element index, spreading work over threads.
/// The body must only write to per-element storage.
void for_each_element(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace axitherm
