#include "waverec/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "waverec/error.hpp"

namespace waverec::laplace {

int PseudoFreqGrid::num_intervals() const { return static_cast<int>(std::lround((s_max - s_min) / h)); }

std::vector<double> PseudoFreqGrid::values() const {
  std::vector<double> out;
  for (int i = 0; i <= num_intervals(); ++i) out.push_back(s(i));
  return out;
}

void PseudoFreqGrid::validate() const {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidConfig, "pseudo-frequency step must be positive");
  if (!(s_min >= 1.0)) throw Error(ErrorCode::InvalidConfig, "lowest pseudo frequency must be at least 1");
  const double n = (s_max - s_min) / h;
  if (!(n >= 1.0 - 1e-9) || std::abs(n - std::round(n)) > 1e-9)
    throw Error(ErrorCode::InvalidConfig, "pseudo-frequency range must be a positive multiple of the step");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda must be positive");
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be nonnegative");
}

forward::TimeTraces add_noise(const forward::TimeTraces& traces, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> alpha(static_cast<std::size_t>(traces.num_samples));
  for (double& a : alpha) a = dist(rng);
  return add_noise(traces, sigma, alpha);
}

forward::TimeTraces add_noise(const forward::TimeTraces& traces, double sigma, std::span<const double> alpha) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise level must be nonnegative");
  if (alpha.size() != static_cast<std::size_t>(traces.num_samples))
    throw Error(ErrorCode::DimMismatch, "one noise factor per time sample is required");
  forward::TimeTraces out = traces;
  if (sigma == 0.0) return out;
  for (std::size_t i = 0; i < traces.node_ids.size(); ++i) {
    const auto in = traces.row(i);
    const auto [lo, hi] = std::minmax_element(in.begin(), in.end());
    const double range = *hi - *lo;
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = in[j] * (1.0 + alpha[j] * range * sigma);
  }
  return out;
}

double laplace(std::span<const double> trace, double s, double tau, double T) {
  const long n = static_cast<long>(std::floor(T / tau + 1e-9)) + 1;
  if (static_cast<long>(trace.size()) != n)
    throw Error(ErrorCode::DimMismatch, "trace length does not match T and tau");
  const std::vector<double> w = forward::laplace_weights(s, tau, n);
  double acc = 0.0;
  for (std::size_t j = 0; j < trace.size(); ++j) acc += w[j] * trace[j];
  return acc;
}

std::vector<double> compute_psi(std::span<const double> phi, std::span<const double> s) {
  const std::size_t n = phi.size();
  if (s.size() != n) throw Error(ErrorCode::DimMismatch, "phi and s sizes differ");
  if (n < 2) throw Error(ErrorCode::DimMismatch, "at least two pseudo frequencies are required");
  std::vector<double> ln(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(phi[i] > 0.0)) {
      std::ostringstream os;
      os << "Laplace transform " << phi[i] << " is not positive at s = " << s[i];
      throw Error(ErrorCode::NonpositiveTransform, os.str());
    }
    ln[i] = std::log(phi[i]);
  }
  // Signed step: negative for a descending grid.
  const double d = (s[n - 1] - s[0]) / static_cast<double>(n - 1);
  std::vector<double> deriv(n);
  if (n == 2) {
    deriv[0] = deriv[1] = (ln[1] - ln[0]) / d;
  } else {
    deriv[0] = (-3.0 * ln[0] + 4.0 * ln[1] - ln[2]) / (2.0 * d);
    for (std::size_t i = 1; i + 1 < n; ++i) deriv[i] = (ln[i + 1] - ln[i - 1]) / (2.0 * d);
    deriv[n - 1] = (3.0 * ln[n - 1] - 4.0 * ln[n - 2] + ln[n - 3]) / (2.0 * d);
  }
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < n; ++i) psi[i] = deriv[i] / (s[i] * s[i]) - 2.0 * ln[i] / (s[i] * s[i] * s[i]);
  return psi;
}

std::vector<double> discretize_psi(std::span<const double> psi) {
  std::vector<double> out;
  for (std::size_t n = 1; n < psi.size(); ++n) out.push_back(0.5 * (psi[n] + psi[n - 1]));
  return out;
}

PseudoFreqData transform(const forward::TimeTraces& traces, const PseudoFreqGrid& grid) {
  grid.validate();
  PseudoFreqData data;
  data.grid = grid;
  data.node_ids = traces.node_ids;
  const std::vector<double> s = grid.values();
  std::vector<std::vector<double>> weights;
  for (double sv : s) weights.push_back(forward::laplace_weights(sv, traces.tau, traces.num_samples));
  for (std::size_t i = 0; i < traces.node_ids.size(); ++i) {
    const auto row = traces.row(i);
    std::vector<double> phi(s.size());
    for (std::size_t q = 0; q < s.size(); ++q) {
      double acc = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) acc += weights[q][j] * row[j];
      phi[q] = acc;
    }
    std::vector<double> psi = compute_psi(phi, s);
    data.psi_n.push_back(discretize_psi(psi));
    data.phi.push_back(std::move(phi));
    data.psi.push_back(std::move(psi));
  }
  return data;
}

void write_pseudo_csv(const std::string& path, const PseudoFreqData& data) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  os << "node_id,s,phi,psi\n" << std::setprecision(17);
  const std::vector<double> s = data.grid.values();
  for (std::size_t i = 0; i < data.node_ids.size(); ++i)
    for (std::size_t q = 0; q < s.size(); ++q)
      os << data.node_ids[i] << ',' << s[q] << ',' << data.phi[i][q] << ',' << data.psi[i][q] << '\n';
}

void write_interval_csv(const std::string& path, const PseudoFreqData& data) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  os << "node_id,n,psi_n\n" << std::setprecision(17);
  for (std::size_t i = 0; i < data.node_ids.size(); ++i)
    for (std::size_t n = 0; n < data.psi_n[i].size(); ++n)
      os << data.node_ids[i] << ',' << n + 1 << ',' << data.psi_n[i][n] << '\n';
}

}  // namespace waverec::laplace
