#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "waverec/field.hpp"
#include "waverec/mesh.hpp"
#include "waverec/sparse.hpp"

namespace waverec::forward {

struct SimConfig {
  double omega = 20.0;  // angular frequency of the plane-wave drive
  double T = 2.0;       // final time
  double tau = 0.001;   // time step
  double sigma = 0.0;   // noise level applied to recorded data
  std::uint64_t seed = 0;
  /// The outer boundary condition on absorbing parts reads du/dn = abc_sign * du/dt
  /// with outward normal; -1 absorbs outgoing waves.
  double abc_sign = -1.0;
  bool drive_enabled = true;
  /// Test switch: every outer boundary is homogeneous Neumann.
  bool reflecting = false;

  double t1() const { return 2.0 * std::numbers::pi / omega; }
  /// floor(T / tau) + 1
  long num_samples() const;
};

/// f(t) = sin(omega t) on (0, t1], zero afterwards.
double plane_wave(double t, double omega, double t1);

/// Largest stable step for the explicit scheme: 0.9 * h * sqrt(min a) / sqrt(2).
double stable_time_step(double spacing, double min_a);

/// Throws UnstableConfig for an invalid or unstable configuration.
void validate(const SimConfig& cfg, double spacing, double min_a);

/// Displacement on both discretizations. Band grid nodes mirror FEM values and FEM
/// nodes on the outer FEM boundary mirror grid values after every step.
struct WaveField {
  std::vector<double> grid;
  std::vector<double> fem;
};

/// Operators for a fixed coefficient: 5-point stencil with lumped boundary lengths
/// on the grid, stiffness and a-weighted lumped mass on the FEM mesh.
class WaveOperators {
 public:
  WaveOperators(const mesh::HybridDomain& domain, std::span<const double> a_fem, const SimConfig& cfg);

  const mesh::HybridDomain& domain() const { return *domain_; }
  const SimConfig& config() const { return cfg_; }

  WaveField zero_field() const;

  /// u^{n+1} from u^{n-1}, u^n at time t = t_n.
  void step(const WaveField& prev, const WaveField& cur, double t, WaveField& next) const;
  /// u^1 from u^0 with zero initial velocity.
  void first_step(const WaveField& u0, WaveField& u1) const;

  /// Discrete energy 1/2 |(u1-u0)/tau|^2_M + 1/2 <K u0, u1> over the union of
  /// grid-updated and FEM-updated nodes.
  double energy(const WaveField& u0, const WaveField& u1) const;

  /// Copies values across the overlap band.
  void exchange(WaveField& u) const;

  const sparse::CsrMatrix& fem_stiffness() const { return k_fem_; }
  std::span<const double> fem_mass() const { return m_fem_; }
  std::span<const int> fem_updated() const { return fem_updated_; }
  std::span<const int> grid_updated() const { return grid_updated_; }
  std::span<const double> grid_mass() const { return m_grid_; }

 private:
  struct GridStencil {
    std::array<int, 4> nb{-1, -1, -1, -1};  // E, W, N, S
    std::array<double, 4> w{};
    double top_len = 0.0;
    double bottom_len = 0.0;
  };

  double forcing(double t) const;

  const mesh::HybridDomain* domain_;
  SimConfig cfg_;
  std::vector<GridStencil> stencil_;
  std::vector<double> m_grid_;
  std::vector<int> grid_updated_;
  sparse::CsrMatrix k_fem_;
  std::vector<double> m_fem_;  // lumped mass times a
  std::vector<int> fem_updated_;
  std::vector<int> fdm_cells_;  // lower-left grid node of cells outside Omega
};

/// Sampled wave field u(x_i, t_j) at recording nodes, row-major by node.
struct TimeTraces {
  std::vector<int> node_ids;
  double tau = 0.0;
  double T = 0.0;
  long num_samples = 0;
  std::vector<double> samples;

  std::span<const double> row(std::size_t i) const {
    return {samples.data() + i * static_cast<std::size_t>(num_samples), static_cast<std::size_t>(num_samples)};
  }
  std::span<double> row(std::size_t i) {
    return {samples.data() + i * static_cast<std::size_t>(num_samples), static_cast<std::size_t>(num_samples)};
  }
};

/// Called with (sample index j, time t_j, field) for j = 0..num_samples-1.
using StepObserver = std::function<void(long, double, const WaveField&)>;

/// Time-steps the hybrid scheme from rest; throws UnstableConfig / NumericalBlowupError.
void simulate(const mesh::HybridDomain& domain, const NodalField& a, const SimConfig& cfg,
              const StepObserver& observer);

/// Traces at the requested FEM nodes.
TimeTraces run_forward(const mesh::HybridDomain& domain, const NodalField& a, const SimConfig& cfg,
                       std::span<const int> record);

/// Trapezoid weights tau * c_j * exp(-s t_j) of the truncated Laplace transform.
std::vector<double> laplace_weights(double s, double tau, long num_samples);

/// Truncated Laplace transform of the FEM-region field, one vector per s value,
/// accumulated during the time stepping.
std::vector<std::vector<double>> forward_laplace(const mesh::HybridDomain& domain, const NodalField& a,
                                                 const SimConfig& cfg, std::span<const double> s_values);

/// WTRC binary: "WTRC", u32 node count, u32 sample count, f64 tau, f64 T,
/// u32 node ids, row-major f64 samples; all little-endian.
void write_traces(const std::string& path, const TimeTraces& traces);
TimeTraces read_traces(const std::string& path);
void write_traces_csv(const std::string& path, const TimeTraces& traces);

}  // namespace waverec::forward
