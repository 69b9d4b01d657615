#include "waverec/forward.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "waverec/error.hpp"
#include "waverec/p1.hpp"

namespace waverec::forward {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

long SimConfig::num_samples() const { return static_cast<long>(std::floor(T / tau + 1e-9)) + 1; }

double plane_wave(double t, double omega, double t1) {
  if (t > 0.0 && t <= t1) return std::sin(omega * t);
  return 0.0;
}

double stable_time_step(double spacing, double min_a) {
  return 0.9 * spacing * std::sqrt(min_a) / std::sqrt(2.0);
}

void validate(const SimConfig& cfg, double spacing, double min_a) {
  if (!(cfg.tau > 0.0) || !(cfg.omega > 0.0) || !(cfg.T > cfg.t1()))
    throw Error(ErrorCode::InvalidConfig, "simulation needs tau > 0, omega > 0 and T > t1 = 2 pi / omega");
  if (!(min_a > 0.0)) throw Error(ErrorCode::UnstableConfig, "coefficient must be positive");
  const double bound = stable_time_step(spacing, min_a);
  if (cfg.tau > bound) {
    std::ostringstream os;
    os << "time step " << cfg.tau << " exceeds the stability bound " << bound;
    throw Error(ErrorCode::UnstableConfig, os.str());
  }
}

WaveOperators::WaveOperators(const mesh::HybridDomain& domain, std::span<const double> a_fem, const SimConfig& cfg)
    : domain_(&domain), cfg_(cfg) {
  const auto& grid = domain.grid;
  if (a_fem.size() != domain.fem.num_nodes())
    throw Error(ErrorCode::DimMismatch, "coefficient size does not match the FEM mesh");
  const double h = grid.spacing;
  const int nx = grid.nx;
  const int ny = grid.ny;
  auto cell_exists = [&](int ci, int cj) { return ci >= 0 && cj >= 0 && ci < nx - 1 && cj < ny - 1; };
  auto cells = [&](int ci0, int cj0, int ci1, int cj1) {
    return 0.5 * (static_cast<int>(cell_exists(ci0, cj0)) + static_cast<int>(cell_exists(ci1, cj1)));
  };

  stencil_.assign(grid.num_nodes(), {});
  m_grid_.assign(grid.num_nodes(), 0.0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = grid.index(i, j);
      auto& st = stencil_[static_cast<std::size_t>(k)];
      if (i + 1 < nx) st.nb[0] = grid.index(i + 1, j), st.w[0] = cells(i, j - 1, i, j);
      if (i > 0) st.nb[1] = grid.index(i - 1, j), st.w[1] = cells(i - 1, j - 1, i - 1, j);
      if (j + 1 < ny) st.nb[2] = grid.index(i, j + 1), st.w[2] = cells(i - 1, j, i, j);
      if (j > 0) st.nb[3] = grid.index(i, j - 1), st.w[3] = cells(i - 1, j - 1, i, j - 1);
      int ncell = 0;
      for (int cj = j - 1; cj <= j; ++cj)
        for (int ci = i - 1; ci <= i; ++ci) ncell += cell_exists(ci, cj) ? 1 : 0;
      m_grid_[static_cast<std::size_t>(k)] = 0.25 * h * h * ncell;
      const auto role = domain.grid_role[static_cast<std::size_t>(k)];
      if (role == mesh::GridRole::Fdm || role == mesh::GridRole::OmegaBoundary) grid_updated_.push_back(k);
    }
  }
  for (const auto& e : domain.outer_edges) {
    for (int k : e.grid_nodes) {
      auto& st = stencil_[static_cast<std::size_t>(k)];
      if (e.side == mesh::OuterSide::Top) st.top_len += 0.5 * h;
      if (e.side == mesh::OuterSide::Bottom) st.bottom_len += 0.5 * h;
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const std::array<int, 4> corners{grid.index(i, j), grid.index(i + 1, j), grid.index(i + 1, j + 1),
                                       grid.index(i, j + 1)};
      const bool outside = std::any_of(corners.begin(), corners.end(), [&](int c) {
        return domain.grid_role[static_cast<std::size_t>(c)] == mesh::GridRole::Fdm;
      });
      if (outside) fdm_cells_.push_back(grid.index(i, j));
    }
  }

  k_fem_ = p1::stiffness(domain.fem);
  m_fem_ = p1::lumped_mass(domain.fem);
  for (std::size_t k = 0; k < m_fem_.size(); ++k) {
    m_fem_[k] *= a_fem[k];
    if (!domain.fem.has_flag(static_cast<int>(k), mesh::kOnOuterOmega)) fem_updated_.push_back(static_cast<int>(k));
  }
}

WaveField WaveOperators::zero_field() const {
  return {std::vector<double>(domain_->grid.num_nodes(), 0.0), std::vector<double>(domain_->fem.num_nodes(), 0.0)};
}

double WaveOperators::forcing(double t) const {
  return cfg_.drive_enabled ? plane_wave(t, cfg_.omega, cfg_.t1()) : 0.0;
}

void WaveOperators::exchange(WaveField& u) const {
  for (const auto& p : domain_->boundary_overlap)
    u.fem[static_cast<std::size_t>(p.fem_node)] = u.grid[static_cast<std::size_t>(p.grid_node)];
  for (const auto& p : domain_->band_overlap)
    u.grid[static_cast<std::size_t>(p.grid_node)] = u.fem[static_cast<std::size_t>(p.fem_node)];
}

void WaveOperators::step(const WaveField& prev, const WaveField& cur, double t, WaveField& next) const {
  const double tau = cfg_.tau;
  const double inv_tau2 = 1.0 / (tau * tau);
  const double f = forcing(t);
  const bool top_absorbs = t > cfg_.t1();

  for (int k : grid_updated_) {
    const auto uk = static_cast<std::size_t>(k);
    const GridStencil& st = stencil_[uk];
    const double u = cur.grid[uk];
    double lap = 0.0;
    for (int d = 0; d < 4; ++d)
      if (st.nb[static_cast<std::size_t>(d)] >= 0)
        lap += st.w[static_cast<std::size_t>(d)] * (cur.grid[static_cast<std::size_t>(st.nb[static_cast<std::size_t>(d)])] - u);
    double b = 0.0;
    if (!cfg_.reflecting) b = st.bottom_len + (top_absorbs ? st.top_len : 0.0);
    const double c = -cfg_.abc_sign * b / (2.0 * tau);
    const double m = m_grid_[uk];
    const double rhs = m * inv_tau2 * (2.0 * u - prev.grid[uk]) + lap + st.top_len * f + c * prev.grid[uk];
    next.grid[uk] = rhs / (m * inv_tau2 + c);
  }

  const auto rp = k_fem_.row_ptr();
  const auto cols = k_fem_.cols();
  const auto vals = k_fem_.values();
  const double tau2 = tau * tau;
  for (int k : fem_updated_) {
    const auto uk = static_cast<std::size_t>(k);
    double ku = 0.0;
    for (int p = rp[uk]; p < rp[uk + 1]; ++p)
      ku += vals[static_cast<std::size_t>(p)] * cur.fem[static_cast<std::size_t>(cols[static_cast<std::size_t>(p)])];
    next.fem[uk] = 2.0 * cur.fem[uk] - prev.fem[uk] - tau2 * ku / m_fem_[uk];
  }
  exchange(next);
}

void WaveOperators::first_step(const WaveField& u0, WaveField& u1) const {
  const double half_tau2 = 0.5 * cfg_.tau * cfg_.tau;
  const double f = forcing(0.0);
  for (int k : grid_updated_) {
    const auto uk = static_cast<std::size_t>(k);
    const GridStencil& st = stencil_[uk];
    double lap = 0.0;
    for (int d = 0; d < 4; ++d)
      if (st.nb[static_cast<std::size_t>(d)] >= 0)
        lap += st.w[static_cast<std::size_t>(d)] * (u0.grid[static_cast<std::size_t>(st.nb[static_cast<std::size_t>(d)])] - u0.grid[uk]);
    u1.grid[uk] = u0.grid[uk] + half_tau2 * (lap + st.top_len * f) / m_grid_[uk];
  }
  const std::vector<double> ku = sparse::spmv(k_fem_, u0.fem);
  for (int k : fem_updated_) {
    const auto uk = static_cast<std::size_t>(k);
    u1.fem[uk] = u0.fem[uk] - half_tau2 * ku[uk] / m_fem_[uk];
  }
  exchange(u1);
}

double WaveOperators::energy(const WaveField& u0, const WaveField& u1) const {
  const double tau = cfg_.tau;
  double kinetic = 0.0;
  for (int k : grid_updated_) {
    const auto uk = static_cast<std::size_t>(k);
    const double v = (u1.grid[uk] - u0.grid[uk]) / tau;
    kinetic += m_grid_[uk] * v * v;
  }
  for (int k : fem_updated_) {
    const auto uk = static_cast<std::size_t>(k);
    const double v = (u1.fem[uk] - u0.fem[uk]) / tau;
    kinetic += m_fem_[uk] * v * v;
  }
  const auto& grid = domain_->grid;
  double potential = 0.0;
  for (int c : fdm_cells_) {
    const std::array<int, 4> q{c, c + 1, c + 1 + grid.nx, c + grid.nx};
    for (int e = 0; e < 4; ++e) {
      const auto a = static_cast<std::size_t>(q[static_cast<std::size_t>(e)]);
      const auto b = static_cast<std::size_t>(q[static_cast<std::size_t>((e + 1) % 4)]);
      potential += 0.5 * (u0.grid[a] - u0.grid[b]) * (u1.grid[a] - u1.grid[b]);
    }
  }
  const std::vector<double> ku1 = sparse::spmv(k_fem_, u1.fem);
  for (std::size_t k = 0; k < ku1.size(); ++k) potential += u0.fem[k] * ku1[k];
  return 0.5 * kinetic + 0.5 * potential;
}

void simulate(const mesh::HybridDomain& domain, const NodalField& a, const SimConfig& cfg,
              const StepObserver& observer) {
  if (a.values.size() != domain.fem.num_nodes())
    throw Error(ErrorCode::DimMismatch, "coefficient size does not match the FEM mesh");
  const double min_a = std::min(1.0, *std::min_element(a.values.begin(), a.values.end()));
  validate(cfg, domain.spacing, min_a);
  const WaveOperators ops(domain, a.values, cfg);

  const long n = cfg.num_samples();
  WaveField prev = ops.zero_field();
  WaveField cur = ops.zero_field();
  WaveField next = ops.zero_field();
  observer(0, 0.0, prev);
  if (n < 2) return;
  ops.first_step(prev, cur);
  observer(1, cfg.tau, cur);
  for (long j = 1; j + 1 < n; ++j) {
    ops.step(prev, cur, static_cast<double>(j) * cfg.tau, next);
    if ((j + 1) % 16 == 0 || j + 2 == n) {
      if (!all_finite(next.fem) || !all_finite(next.grid)) {
        std::ostringstream os;
        os << "non-finite wave field at step " << j + 1;
        throw NumericalBlowupError(os.str(), j + 1);
      }
    }
    observer(j + 1, static_cast<double>(j + 1) * cfg.tau, next);
    std::swap(prev, cur);
    std::swap(cur, next);
  }
}

TimeTraces run_forward(const mesh::HybridDomain& domain, const NodalField& a, const SimConfig& cfg,
                       std::span<const int> record) {
  for (int id : record)
    if (id < 0 || static_cast<std::size_t>(id) >= domain.fem.num_nodes())
      throw Error(ErrorCode::DimMismatch, "recording node outside the FEM mesh");
  TimeTraces tr;
  tr.node_ids.assign(record.begin(), record.end());
  tr.tau = cfg.tau;
  tr.T = cfg.T;
  tr.num_samples = cfg.num_samples();
  tr.samples.assign(record.size() * static_cast<std::size_t>(tr.num_samples), 0.0);
  const auto m = static_cast<std::size_t>(tr.num_samples);
  simulate(domain, a, cfg, [&](long j, double, const WaveField& u) {
    for (std::size_t i = 0; i < record.size(); ++i)
      tr.samples[i * m + static_cast<std::size_t>(j)] = u.fem[static_cast<std::size_t>(record[i])];
  });
  return tr;
}

std::vector<double> laplace_weights(double s, double tau, long num_samples) {
  std::vector<double> w(static_cast<std::size_t>(std::max(0L, num_samples)));
  for (long j = 0; j < num_samples; ++j) {
    const double end = (j == 0 || j == num_samples - 1) ? 0.5 : 1.0;
    w[static_cast<std::size_t>(j)] = tau * end * std::exp(-s * static_cast<double>(j) * tau);
  }
  return w;
}

std::vector<std::vector<double>> forward_laplace(const mesh::HybridDomain& domain, const NodalField& a,
                                                 const SimConfig& cfg, std::span<const double> s_values) {
  const long n = cfg.num_samples();
  std::vector<std::vector<double>> weights;
  for (double s : s_values) weights.push_back(laplace_weights(s, cfg.tau, n));
  std::vector<std::vector<double>> acc(s_values.size(), std::vector<double>(domain.fem.num_nodes(), 0.0));
  simulate(domain, a, cfg, [&](long j, double, const WaveField& u) {
    for (std::size_t q = 0; q < weights.size(); ++q) {
      const double wj = weights[q][static_cast<std::size_t>(j)];
      auto& out = acc[q];
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += wj * u.fem[k];
    }
  });
  return acc;
}

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw Error(ErrorCode::IoError, "truncated trace file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_traces(const std::string& path, const TimeTraces& traces) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  os.write("WTRC", 4);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(traces.node_ids.size()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(traces.num_samples));
  put_le<double>(os, traces.tau);
  put_le<double>(os, traces.T);
  for (int id : traces.node_ids) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(id));
  for (double v : traces.samples) put_le<double>(os, v);
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path);
}

TimeTraces read_traces(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "WTRC", 4) != 0)
    throw Error(ErrorCode::IoError, path + " is not a WTRC trace file");
  TimeTraces tr;
  const auto nodes = get_le<std::uint32_t>(is);
  tr.num_samples = get_le<std::uint32_t>(is);
  tr.tau = get_le<double>(is);
  tr.T = get_le<double>(is);
  tr.node_ids.resize(nodes);
  for (auto& id : tr.node_ids) id = static_cast<int>(get_le<std::uint32_t>(is));
  tr.samples.resize(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(tr.num_samples));
  for (auto& v : tr.samples) v = get_le<double>(is);
  return tr;
}

void write_traces_csv(const std::string& path, const TimeTraces& traces) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  os << "node_id,step,t,u\n" << std::setprecision(17);
  for (std::size_t i = 0; i < traces.node_ids.size(); ++i) {
    const auto r = traces.row(i);
    for (std::size_t j = 0; j < r.size(); ++j)
      os << traces.node_ids[i] << ',' << j << ',' << static_cast<double>(j) * traces.tau << ',' << r[j] << '\n';
  }
}

}  // namespace waverec::forward
