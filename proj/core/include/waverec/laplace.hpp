#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "waverec/forward.hpp"

namespace waverec::laplace {

/// Descending pseudo-frequency grid s_0 = s_max > s_1 > ... > s_N = s_min with
/// uniform step h, plus the Carleman parameter lambda and the regularization
/// weight epsilon.
struct PseudoFreqGrid {
  double s_min = 1.0;
  double s_max = 19.0;
  double h = 1.0;
  double lambda = 20.0;
  double epsilon = 0.01;

  /// Number of intervals N.
  int num_intervals() const;
  /// s_i for i = 0..N.
  double s(int i) const { return s_max - i * h; }
  std::vector<double> values() const;
  /// Throws InvalidConfig unless h > 0, s_min >= 1, (s_max - s_min) / h is a
  /// positive integer, lambda > 0 and epsilon >= 0.
  void validate() const;
};

/// u(x_i, t_j) (1 + alpha_j (max_i - min_i) sigma), with alpha_j uniform on [-1, 1]
/// drawn from a seeded generator and shared by all nodes at time t_j.
forward::TimeTraces add_noise(const forward::TimeTraces& traces, double sigma, std::uint64_t seed);
/// Same with caller-supplied alpha_j (one per time sample).
forward::TimeTraces add_noise(const forward::TimeTraces& traces, double sigma, std::span<const double> alpha);

/// Composite trapezoid approximation of the integral of u(t) exp(-s t) over (0, T)
/// from samples at t_j = j tau. Sample count must be floor(T / tau) + 1.
double laplace(std::span<const double> trace, double s, double tau, double T);

/// psi(s) = d/ds ln(phi) / s^2 - 2 ln(phi) / s^3 on a uniform grid (ascending or
/// descending) with second-order differences. Throws NonpositiveTransform.
std::vector<double> compute_psi(std::span<const double> phi, std::span<const double> s);

/// psi_n = (psi(s_n) + psi(s_{n-1})) / 2 for n = 1..N; element n-1 holds psi_n.
std::vector<double> discretize_psi(std::span<const double> psi);

/// Transformed data at a set of nodes. Per-node vectors are indexed by grid index
/// i (phi, psi) or by interval n - 1 (psi_n).
struct PseudoFreqData {
  PseudoFreqGrid grid;
  std::vector<int> node_ids;
  std::vector<std::vector<double>> phi;
  std::vector<std::vector<double>> psi;
  std::vector<std::vector<double>> psi_n;
};

PseudoFreqData transform(const forward::TimeTraces& traces, const PseudoFreqGrid& grid);

/// CSV `node_id,s,phi,psi`.
void write_pseudo_csv(const std::string& path, const PseudoFreqData& data);
/// CSV `node_id,n,psi_n`.
void write_interval_csv(const std::string& path, const PseudoFreqData& data);

}  // namespace waverec::laplace
