#include "waverec/layer_stripping.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "waverec/error.hpp"
#include "waverec/field.hpp"
#include "waverec/p1.hpp"
#include "waverec/recovery.hpp"

namespace waverec::gcm {

namespace {

template <typename F>
double integrate(F f, double lo, double hi) {
  return boost::math::quadrature::gauss<double, 30>::integrate(f, lo, hi);
}

double relative_change(std::span<const double> now, std::span<const double> before) {
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t k = 0; k < now.size(); ++k) {
    diff += (now[k] - before[k]) * (now[k] - before[k]);
    ref += now[k] * now[k];
  }
  if (diff == 0.0) return 0.0;
  if (ref == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(diff / ref);
}

void check_history(const mesh::TriMesh& mesh, std::span<const std::vector<double>> history) {
  if (history.empty()) throw Error(ErrorCode::StateCorrupt, "q history must contain q_0");
  for (const auto& q : history)
    if (q.size() != mesh.num_nodes()) throw Error(ErrorCode::StateCorrupt, "q history entry has the wrong size");
  for (double x : history.front())
    if (x != 0.0) throw Error(ErrorCode::StateCorrupt, "q_0 is not identically zero");
}

}  // namespace

CarlemanCoeffs carleman_coeffs(double s_lo, double s_hi, double lambda) {
  if (!(s_hi > s_lo)) throw Error(ErrorCode::InvalidConfig, "empty pseudo-frequency interval");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda must be positive");
  const double h = s_hi - s_lo;
  auto cwf = [=](double s) { return std::exp(lambda * (s - s_hi)); };
  // The weight is below e^-40 outside the last 40/lambda of the interval.
  const double lo = std::max(s_lo, s_hi - 40.0 / lambda);
  CarlemanCoeffs c;
  c.I0 = -std::expm1(-lambda * h) / lambda;
  c.I1 = integrate([&](double s) { return (s_hi - s) * (s * s - s * (s_hi - s)) * cwf(s); }, lo, s_hi);
  c.A1 = 2.0 / c.I0 * integrate([&](double s) { return (s * s - 2.0 * s * (s_hi - s)) * cwf(s); }, lo, s_hi);
  c.A2 = 2.0 / c.I0 * integrate([&](double s) { return s * cwf(s); }, lo, s_hi);
  return c;
}

CarlemanCoeffs carleman_coeffs(int n, const laplace::PseudoFreqGrid& grid) {
  if (n < 1 || n > grid.num_intervals()) throw Error(ErrorCode::InvalidConfig, "interval index out of range");
  return carleman_coeffs(grid.s(n), grid.s(n - 1), grid.lambda);
}

LinearSystem assemble_qn(const mesh::TriMesh& mesh, const QnInputs& in, std::span<const double> q_lag) {
  check_history(mesh, in.history);
  const std::size_t nn = mesh.num_nodes();
  if (in.V.size() != nn || q_lag.size() != nn)
    throw Error(ErrorCode::DimMismatch, "tail or lagged field size does not match mesh");
  if (in.dirichlet_nodes.size() != in.dirichlet_values.size())
    throw Error(ErrorCode::DimMismatch, "Dirichlet nodes and values differ in length");

  std::vector<double> sum(nn, 0.0);
  for (const auto& q : in.history)
    for (std::size_t k = 0; k < nn; ++k) sum[k] += q[k];

  const CarlemanCoeffs& c = in.coeffs;
  const double nonlinear = 2.0 * c.I1 / c.I0;
  sparse::TripletBuilder tb(static_cast<int>(nn));
  std::vector<double> rhs(nn, 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = p1::element_geometry(mesh, static_cast<int>(t));
    const auto& tri = mesh.triangle(static_cast<int>(t));
    Point2 grad_sum{}, grad_v{}, grad_lag{};
    for (int a = 0; a < 3; ++a) {
      const auto k = static_cast<std::size_t>(tri[static_cast<std::size_t>(a)]);
      const Point2 ga = g.grad[static_cast<std::size_t>(a)];
      grad_sum = grad_sum + sum[k] * ga;
      grad_v = grad_v + in.V[k] * ga;
      grad_lag = grad_lag + q_lag[k] * ga;
    }
    const Point2 known = in.h * grad_sum - grad_v;
    const Point2 b = -c.A1 * known;
    const double r = nonlinear * dot(grad_lag, grad_lag) - c.A2 * dot(known, known);
    const double third = g.area / 3.0;
    for (int i = 0; i < 3; ++i) {
      const int row = tri[static_cast<std::size_t>(i)];
      for (int j = 0; j < 3; ++j) {
        const Point2 gj = g.grad[static_cast<std::size_t>(j)];
        double value = g.area * dot(g.grad[static_cast<std::size_t>(i)], gj) - dot(b, gj) * third;
        if (i == j) value += in.epsilon * third;
        tb.add(row, tri[static_cast<std::size_t>(j)], value);
      }
      rhs[static_cast<std::size_t>(row)] -= r * third;
    }
  }
  LinearSystem sys;
  sys.A = sparse::apply_dirichlet(tb.build(), rhs, in.dirichlet_nodes, in.dirichlet_values, false);
  sys.rhs = std::move(rhs);
  return sys;
}

QnResult solve_qn(const mesh::TriMesh& mesh, const QnInputs& in, std::span<const double> q_init, int max_iter,
                  double tol, const sparse::SolveOptions& linear) {
  if (max_iter < 1) throw Error(ErrorCode::InvalidConfig, "at least one lag iteration is required");
  QnResult res;
  std::vector<double> lag(q_init.begin(), q_init.end());
  for (int it = 1; it <= max_iter; ++it) {
    const LinearSystem sys = assemble_qn(mesh, in, lag);
    sparse::SolveResult sol = sparse::solve_bicgstab(sys.A, sys.rhs, linear, lag);
    res.relative_change = relative_change(sol.x, lag);
    res.iterations = it;
    lag = std::move(sol.x);
    if (res.relative_change <= tol) {
      res.converged = true;
      break;
    }
  }
  res.q = std::move(lag);
  return res;
}

std::vector<double> accumulate_v(std::span<const std::vector<double>> history, std::span<const double> q,
                                 std::span<const double> V, double h) {
  if (q.size() != V.size()) throw Error(ErrorCode::DimMismatch, "q and V sizes differ");
  std::vector<double> sum(q.begin(), q.end());
  for (const auto& qj : history) {
    if (qj.size() != q.size()) throw Error(ErrorCode::DimMismatch, "q history entry size differs");
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += qj[k];
  }
  std::vector<double> v(q.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = V[k] - h * sum[k];
  return v;
}

std::vector<double> tail_from_transform(std::span<const double> w, double s) {
  std::vector<double> V(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!(w[k] > 0.0)) {
      std::ostringstream os;
      os << "transformed field w = " << w[k] << " at node " << k << " is not positive at s = " << s;
      throw Error(ErrorCode::NonpositiveTransform, os.str());
    }
    V[k] = std::log(w[k]) / (s * s);
  }
  return V;
}

std::vector<double> update_tail(const mesh::HybridDomain& domain, std::span<const double> a_fem, double s,
                                const forward::SimConfig& cfg) {
  const NodalField a{FieldRole::Coefficient_a, std::vector<double>(a_fem.begin(), a_fem.end())};
  const double s_values[] = {s};
  const auto w = forward::forward_laplace(domain, a, cfg, s_values);
  return tail_from_transform(w.front(), s);
}

std::vector<IntervalResult> run_gcm(const mesh::HybridDomain& domain, const mesh::SubMesh& recon,
                                    const laplace::PseudoFreqData& data, const GcmConfig& cfg,
                                    const IntervalCallback& on_interval) {
  const laplace::PseudoFreqGrid& grid = cfg.grid;
  grid.validate();
  if (data.grid.s_min != grid.s_min || data.grid.s_max != grid.s_max || data.grid.h != grid.h)
    throw Error(ErrorCode::InvalidConfig, "pseudo-frequency data grid does not match the configuration");
  if (cfg.m_inner_max < 1) throw Error(ErrorCode::InvalidConfig, "m_inner_max must be at least 1");
  if (!(cfg.d > 1.0)) throw Error(ErrorCode::InvalidConfig, "upper coefficient bound d must exceed 1");

  const mesh::TriMesh& m = recon.mesh;
  const std::size_t nn = m.num_nodes();
  const int N = grid.num_intervals();

  // Data row of every reconstruction node, -1 when not recorded.
  std::vector<int> row_of_parent(domain.fem.num_nodes(), -1);
  for (std::size_t r = 0; r < data.node_ids.size(); ++r) {
    const int id = data.node_ids[r];
    if (id < 0 || static_cast<std::size_t>(id) >= row_of_parent.size())
      throw Error(ErrorCode::DimMismatch, "data node id outside the FEM mesh");
    if (data.psi_n[r].size() != static_cast<std::size_t>(N))
      throw Error(ErrorCode::DimMismatch, "data interval count does not match the grid");
    row_of_parent[static_cast<std::size_t>(id)] = static_cast<int>(r);
  }
  const std::vector<bool> boundary = recovery::boundary_nodes(m);
  std::vector<int> dirichlet;
  std::vector<int> dirichlet_rows;
  for (std::size_t k = 0; k < nn; ++k) {
    const int row = row_of_parent[static_cast<std::size_t>(recon.to_parent[k])];
    const bool wanted = boundary[k] || cfg.constraint == DataConstraint::Interior;
    if (!wanted) continue;
    if (row < 0) {
      std::ostringstream os;
      os << "no data recorded at reconstruction node " << recon.to_parent[k];
      throw Error(ErrorCode::DimMismatch, os.str());
    }
    dirichlet.push_back(static_cast<int>(k));
    dirichlet_rows.push_back(row);
  }

  auto restrict = [&](std::span<const double> fem_values) {
    std::vector<double> out(nn);
    for (std::size_t k = 0; k < nn; ++k) out[k] = fem_values[static_cast<std::size_t>(recon.to_parent[k])];
    return out;
  };

  const double s_bar = grid.s(0);
  std::vector<double> a_fem(domain.fem.num_nodes(), 1.0);
  GcmState state;
  state.q_history.push_back(std::vector<double>(nn, 0.0));
  state.a.assign(nn, 1.0);
  if (cfg.tail_init == TailInit::Background)
    state.V = restrict(update_tail(domain, a_fem, s_bar, cfg.sim));
  else
    state.V.assign(nn, 0.0);

  std::vector<IntervalResult> results;
  for (int n = 1; n <= N; ++n) {
    state.n = n;
    IntervalResult res;
    res.n = n;
    res.s_lo = grid.s(n);
    res.s_hi = grid.s(n - 1);
    const double s_n = res.s_lo;

    std::vector<double> psi_n(dirichlet.size());
    for (std::size_t k = 0; k < dirichlet.size(); ++k)
      psi_n[k] = data.psi_n[static_cast<std::size_t>(dirichlet_rows[k])][static_cast<std::size_t>(n - 1)];

    QnInputs in;
    in.coeffs = carleman_coeffs(n, grid);
    in.h = grid.h;
    in.epsilon = grid.epsilon;
    in.history = state.q_history;
    in.dirichlet_nodes = dirichlet;
    in.dirichlet_values = psi_n;

    std::vector<double> q = state.q_history.back();
    std::vector<double> a = state.a;
    for (int i = 1; i <= cfg.m_inner_max; ++i) {
      in.V = state.V;
      QnResult qr = solve_qn(m, in, q, cfg.lag_max, cfg.inner_tol, cfg.linear);
      const std::vector<double> v = accumulate_v(state.q_history, qr.q, state.V, grid.h);
      std::vector<double> a_new = recovery::recover_a(m, v, s_n, cfg.d);
      if (cfg.smooth) {
        a_new = recovery::smooth_once(m, a_new);
        clamp_values(a_new, 1.0, cfg.d);
      }
      check_role_invariant(NodalField{FieldRole::Coefficient_a, a_new}, cfg.d);

      InnerRecord rec;
      rec.n = n;
      rec.i = i;
      rec.s_n = s_n;
      rec.lag_iterations = qr.iterations;
      rec.lag_converged = qr.converged;
      rec.q_change = relative_change(qr.q, q);
      rec.a_change = relative_change(a_new, a);
      rec.max_a = *std::max_element(a_new.begin(), a_new.end());
      res.inner.push_back(rec);

      q = std::move(qr.q);
      a = std::move(a_new);
      for (std::size_t k = 0; k < nn; ++k) a_fem[static_cast<std::size_t>(recon.to_parent[k])] = a[k];
      state.V = restrict(update_tail(domain, a_fem, s_bar, cfg.sim));
      res.inner_iterations = i;
      if (std::max(rec.q_change, rec.a_change) <= cfg.inner_tol) {
        res.converged = true;
        break;
      }
    }
    state.q_history.push_back(std::move(q));
    state.a = a;
    in.history = {};
    res.a = std::move(a);
    results.push_back(res);
    if (on_interval) on_interval(results.back(), state);
  }
  return results;
}

}  // namespace waverec::gcm
