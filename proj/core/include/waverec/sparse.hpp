#pragma once

#include <functional>
#include <span>
#include <vector>

namespace waverec::sparse {

/// Square matrix in compressed row storage. Column indices are sorted and unique
/// within each row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Takes ownership of prepared CSR arrays; validates structure.
  CsrMatrix(int dim, std::vector<int> row_ptr, std::vector<int> cols, std::vector<double> values);

  static CsrMatrix identity(int dim);

  int dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }
  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> cols() const { return cols_; }
  std::span<const double> values() const { return values_; }

  /// Entry (r, c), zero when not stored.
  double at(int r, int c) const;
  std::vector<double> diagonal() const;

 private:
  int dim_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

/// Accumulates (row, col, value) triplets; duplicates are summed on build.
class TripletBuilder {
 public:
  explicit TripletBuilder(int dim) : dim_(dim) {}

  void add(int row, int col, double value);
  int dim() const { return dim_; }
  CsrMatrix build() const;

 private:
  struct Entry {
    int row;
    int col;
    double value;
  };
  int dim_;
  std::vector<Entry> entries_;
};

/// y = A x. Throws DimMismatch.
std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x);
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

struct SolveOptions {
  double tol = 1e-10;  // relative residual ||b - Ax|| / ||b||
  int max_iter = 1000;
  /// Called once per iteration with (iteration, current residual 2-norm, iterate).
  std::function<void(int, double, std::span<const double>)> on_iteration;
};

struct SolveResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite A.
/// Throws SolverDivergedError when the tolerance is not met within max_iter.
SolveResult solve_cg(const CsrMatrix& a, std::span<const double> b, const SolveOptions& opts = {},
                     std::span<const double> x0 = {});

/// Jacobi-preconditioned BiCGStab for general nonsingular A.
SolveResult solve_bicgstab(const CsrMatrix& a, std::span<const double> b, const SolveOptions& opts = {},
                           std::span<const double> x0 = {});

/// Imposes x[dofs[k]] = values[k]. Rows of constrained dofs become identity rows.
/// With `symmetric`, the constrained columns are also eliminated and moved to the
/// right-hand side so a symmetric matrix stays symmetric.
CsrMatrix apply_dirichlet(const CsrMatrix& a, std::vector<double>& rhs, std::span<const int> dofs,
                          std::span<const double> values, bool symmetric);

double norm2(std::span<const double> v);

}  // namespace waverec::sparse
