#include "waverec/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "waverec/error.hpp"

namespace waverec::sparse {

namespace {

double dotp(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> jacobi_inverse(const CsrMatrix& a) {
  std::vector<double> d = a.diagonal();
  for (double& v : d) v = (v != 0.0) ? 1.0 / v : 1.0;
  return d;
}

void check_dims(const CsrMatrix& a, std::span<const double> b, std::span<const double> x0) {
  if (b.size() != static_cast<std::size_t>(a.dim()) || (!x0.empty() && x0.size() != b.size()))
    throw Error(ErrorCode::DimMismatch, "right-hand side size does not match matrix dimension");
}

[[noreturn]] void diverged(const char* name, double residual, int iterations) {
  std::ostringstream os;
  os << name << " did not reach tolerance: relative residual " << residual << " after " << iterations
     << " iterations";
  throw SolverDivergedError(os.str(), residual, iterations);
}

}  // namespace

CsrMatrix::CsrMatrix(int dim, std::vector<int> row_ptr, std::vector<int> cols, std::vector<double> values)
    : dim_(dim), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
  if (dim_ < 0 || row_ptr_.size() != static_cast<std::size_t>(dim_) + 1 || row_ptr_.front() != 0 ||
      static_cast<std::size_t>(row_ptr_.back()) != cols_.size() || cols_.size() != values_.size())
    throw Error(ErrorCode::DimMismatch, "inconsistent CSR arrays");
  for (int r = 0; r < dim_; ++r) {
    for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
      const int c = cols_[static_cast<std::size_t>(k)];
      if (c < 0 || c >= dim_) throw Error(ErrorCode::DimMismatch, "column index out of range");
      if (k > row_ptr_[static_cast<std::size_t>(r)] && cols_[static_cast<std::size_t>(k) - 1] >= c)
        throw Error(ErrorCode::DimMismatch, "column indices must be sorted and unique");
    }
  }
}

CsrMatrix CsrMatrix::identity(int dim) {
  std::vector<int> rp(static_cast<std::size_t>(dim) + 1);
  std::iota(rp.begin(), rp.end(), 0);
  std::vector<int> cols(static_cast<std::size_t>(dim));
  std::iota(cols.begin(), cols.end(), 0);
  return CsrMatrix(dim, std::move(rp), std::move(cols), std::vector<double>(static_cast<std::size_t>(dim), 1.0));
}

double CsrMatrix::at(int r, int c) const {
  const auto begin = cols_.begin() + row_ptr_[static_cast<std::size_t>(r)];
  const auto end = cols_.begin() + row_ptr_[static_cast<std::size_t>(r) + 1];
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(dim_), 0.0);
  for (int r = 0; r < dim_; ++r) d[static_cast<std::size_t>(r)] = at(r, r);
  return d;
}

void TripletBuilder::add(int row, int col, double value) {
  if (row < 0 || row >= dim_ || col < 0 || col >= dim_)
    throw Error(ErrorCode::DimMismatch, "triplet index out of range");
  entries_.push_back({row, col, value});
}

CsrMatrix TripletBuilder::build() const {
  std::vector<Entry> sorted = entries_;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Entry& a, const Entry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  std::vector<int> rp(static_cast<std::size_t>(dim_) + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  cols.reserve(sorted.size());
  vals.reserve(sorted.size());
  for (std::size_t k = 0; k < sorted.size();) {
    const int r = sorted[k].row;
    const int c = sorted[k].col;
    double sum = 0.0;
    while (k < sorted.size() && sorted[k].row == r && sorted[k].col == c) sum += sorted[k++].value;
    cols.push_back(c);
    vals.push_back(sum);
    ++rp[static_cast<std::size_t>(r) + 1];
  }
  std::partial_sum(rp.begin(), rp.end(), rp.begin());
  return CsrMatrix(dim_, std::move(rp), std::move(cols), std::move(vals));
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != static_cast<std::size_t>(a.dim()) || y.size() != x.size())
    throw Error(ErrorCode::DimMismatch, "vector size does not match matrix dimension");
  const auto rp = a.row_ptr();
  const auto cols = a.cols();
  const auto vals = a.values();
  for (int r = 0; r < a.dim(); ++r) {
    double s = 0.0;
    for (int k = rp[static_cast<std::size_t>(r)]; k < rp[static_cast<std::size_t>(r) + 1]; ++k)
      s += vals[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])];
    y[static_cast<std::size_t>(r)] = s;
  }
}

std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x) {
  std::vector<double> y(x.size());
  spmv(a, x, y);
  return y;
}

double norm2(std::span<const double> v) { return std::sqrt(dotp(v, v)); }

SolveResult solve_cg(const CsrMatrix& a, std::span<const double> b, const SolveOptions& opts,
                     std::span<const double> x0) {
  check_dims(a, b, x0);
  const std::size_t n = b.size();
  SolveResult res;
  res.x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(res.x.begin(), res.x.end(), 0.0);
    return res;
  }
  const std::vector<double> dinv = jacobi_inverse(a);
  std::vector<double> r(n), z(n), p(n), ap(n);
  spmv(a, res.x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  double rel = norm2(r) / bnorm;
  if (rel <= opts.tol) {
    res.relative_residual = rel;
    return res;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
  p = z;
  double rz = dotp(r, z);
  for (int it = 1; it <= opts.max_iter; ++it) {
    spmv(a, p, ap);
    const double pap = dotp(p, ap);
    if (!(pap > 0.0)) diverged("CG (matrix not positive definite)", rel, it);
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rnorm = norm2(r);
    rel = rnorm / bnorm;
    if (opts.on_iteration) opts.on_iteration(it, rnorm, res.x);
    res.iterations = it;
    if (rel <= opts.tol) {
      res.relative_residual = rel;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    const double rz_new = dotp(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  diverged("CG", rel, opts.max_iter);
}

SolveResult solve_bicgstab(const CsrMatrix& a, std::span<const double> b, const SolveOptions& opts,
                           std::span<const double> x0) {
  check_dims(a, b, x0);
  const std::size_t n = b.size();
  SolveResult res;
  res.x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(res.x.begin(), res.x.end(), 0.0);
    return res;
  }
  const std::vector<double> dinv = jacobi_inverse(a);
  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
  spmv(a, res.x, v);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - v[i];
  std::fill(v.begin(), v.end(), 0.0);
  rhat = r;
  double rel = norm2(r) / bnorm;
  if (rel <= opts.tol) {
    res.relative_residual = rel;
    return res;
  }
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  // Restart with a fresh shadow residual when the biorthogonality products vanish.
  auto restart = [&] {
    rhat = r;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    rho = alpha = omega = 1.0;
  };
  auto true_residual = [&] {
    std::vector<double> ax = spmv(a, res.x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    return norm2(r) / bnorm;
  };
  constexpr double kBreakdown = 1e-30;
  int restarts = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    res.iterations = it;
    double rho_new = dotp(rhat, r);
    if (std::abs(rho_new) <= kBreakdown * norm2(rhat) * norm2(r)) {
      if (++restarts > opts.max_iter) diverged("BiCGStab (breakdown)", rel, it);
      restart();
      rho_new = dotp(rhat, r);
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < n; ++i) phat[i] = dinv[i] * p[i];
    spmv(a, phat, v);
    const double rv = dotp(rhat, v);
    if (std::abs(rv) <= kBreakdown * norm2(rhat) * norm2(v)) {
      if (++restarts > opts.max_iter) diverged("BiCGStab (breakdown)", rel, it);
      restart();
      continue;
    }
    alpha = rho / rv;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    const double snorm = norm2(s);
    if (snorm / bnorm <= opts.tol) {
      for (std::size_t i = 0; i < n; ++i) res.x[i] += alpha * phat[i];
      if (opts.on_iteration) opts.on_iteration(it, snorm, res.x);
      rel = true_residual();
      if (rel <= opts.tol) {
        res.relative_residual = rel;
        return res;
      }
      restart();
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) shat[i] = dinv[i] * s[i];
    spmv(a, shat, t);
    const double tt = dotp(t, t);
    omega = (tt > 0.0) ? dotp(t, s) / tt : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    rel = norm2(r) / bnorm;
    if (opts.on_iteration) opts.on_iteration(it, norm2(r), res.x);
    if (rel <= opts.tol) {
      rel = true_residual();
      if (rel <= opts.tol) {
        res.relative_residual = rel;
        return res;
      }
      restart();
      continue;
    }
    if (omega == 0.0) {
      if (++restarts > opts.max_iter) diverged("BiCGStab (stagnation)", rel, it);
      restart();
    }
  }
  diverged("BiCGStab", rel, opts.max_iter);
}

CsrMatrix apply_dirichlet(const CsrMatrix& a, std::vector<double>& rhs, std::span<const int> dofs,
                          std::span<const double> values, bool symmetric) {
  if (dofs.size() != values.size() || rhs.size() != static_cast<std::size_t>(a.dim()))
    throw Error(ErrorCode::DimMismatch, "Dirichlet data size mismatch");
  const auto n = static_cast<std::size_t>(a.dim());
  std::vector<char> fixed(n, 0);
  std::vector<double> fixed_value(n, 0.0);
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    const auto d = static_cast<std::size_t>(dofs[k]);
    if (d >= n) throw Error(ErrorCode::DimMismatch, "Dirichlet dof out of range");
    fixed[d] = 1;
    fixed_value[d] = values[k];
  }
  const auto rp = a.row_ptr();
  const auto cols = a.cols();
  const auto vals = a.values();
  std::vector<int> nrp(n + 1, 0);
  std::vector<int> ncols;
  std::vector<double> nvals;
  ncols.reserve(a.nnz());
  nvals.reserve(a.nnz());
  for (std::size_t r = 0; r < n; ++r) {
    if (fixed[r]) {
      ncols.push_back(static_cast<int>(r));
      nvals.push_back(1.0);
      rhs[r] = fixed_value[r];
    } else {
      for (int k = rp[r]; k < rp[r + 1]; ++k) {
        const auto c = static_cast<std::size_t>(cols[static_cast<std::size_t>(k)]);
        const double v = vals[static_cast<std::size_t>(k)];
        if (symmetric && fixed[c]) {
          rhs[r] -= v * fixed_value[c];
          continue;
        }
        ncols.push_back(static_cast<int>(c));
        nvals.push_back(v);
      }
    }
    nrp[r + 1] = static_cast<int>(ncols.size());
  }
  return CsrMatrix(a.dim(), std::move(nrp), std::move(ncols), std::move(nvals));
}

}  // namespace waverec::sparse
