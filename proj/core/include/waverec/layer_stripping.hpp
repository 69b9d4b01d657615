#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "waverec/forward.hpp"
#include "waverec/laplace.hpp"
#include "waverec/mesh.hpp"
#include "waverec/sparse.hpp"

namespace waverec::gcm {

/// Carleman-weighted averages over one pseudo-frequency interval (s_n, s_{n-1}].
struct CarlemanCoeffs {
  double I0 = 0.0;
  double I1 = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;
};

/// Weight exp(lambda (s - s_hi)) on (s_lo, s_hi].
CarlemanCoeffs carleman_coeffs(double s_lo, double s_hi, double lambda);
/// Interval n = 1..N of the grid. Throws InvalidConfig for n out of range.
CarlemanCoeffs carleman_coeffs(int n, const laplace::PseudoFreqGrid& grid);

/// Known fields entering the elliptic problem for q_n on the reconstruction mesh.
struct QnInputs {
  CarlemanCoeffs coeffs;
  double h = 1.0;
  double epsilon = 0.01;
  /// q_0 .. q_{n-1}; q_0 must be identically zero.
  std::span<const std::vector<double>> history;
  std::span<const double> V;
  /// Dirichlet nodes and values (psi_n).
  std::span<const int> dirichlet_nodes;
  std::span<const double> dirichlet_values;
};

struct LinearSystem {
  sparse::CsrMatrix A;
  std::vector<double> rhs;
};

/// Weak form of
///   lap q - A1 (h sum grad q_j - grad V) . grad q - eps q
///     = 2 (I1 / I0) |grad q_lag|^2 - A2 |h sum grad q_j - grad V|^2
/// with Dirichlet rows. Throws StateCorrupt for an invalid history.
LinearSystem assemble_qn(const mesh::TriMesh& mesh, const QnInputs& in, std::span<const double> q_lag);

struct QnResult {
  std::vector<double> q;
  int iterations = 0;
  bool converged = false;
  double relative_change = 0.0;
};

/// Fixed-point loop on the lagged |grad q|^2 term starting from q_init.
QnResult solve_qn(const mesh::TriMesh& mesh, const QnInputs& in, std::span<const double> q_init, int max_iter,
                  double tol, const sparse::SolveOptions& linear = {});

/// v = -h q - h sum_j q_j + V.
std::vector<double> accumulate_v(std::span<const std::vector<double>> history, std::span<const double> q,
                                 std::span<const double> V, double h);

/// V = ln(w) / s^2. Throws NonpositiveTransform when some w <= 0.
std::vector<double> tail_from_transform(std::span<const double> w, double s);

/// Forward solve with `a_fem` and truncated Laplace transform at s; V on all FEM nodes.
std::vector<double> update_tail(const mesh::HybridDomain& domain, std::span<const double> a_fem, double s,
                                const forward::SimConfig& cfg);

enum class TailInit { Background, Zero };
enum class DataConstraint { Boundary, Interior };

struct GcmConfig {
  laplace::PseudoFreqGrid grid;
  forward::SimConfig sim;
  int m_inner_max = 5;
  double inner_tol = 1e-3;
  /// Iteration cap of the lagged |grad q|^2 loop inside each inner iteration.
  int lag_max = 10;
  double d = 10.0;
  TailInit tail_init = TailInit::Background;
  DataConstraint constraint = DataConstraint::Boundary;
  bool smooth = false;
  sparse::SolveOptions linear{1e-10, 2000, {}};
};

struct InnerRecord {
  int n = 0;
  int i = 0;
  double s_n = 0.0;
  int lag_iterations = 0;
  bool lag_converged = false;
  double q_change = 0.0;  // relative change of q_{n,i} against q_{n,i-1}
  double a_change = 0.0;  // relative change of a_{n,i} against a_{n,i-1}
  double max_a = 0.0;
};

struct IntervalResult {
  int n = 0;
  double s_lo = 0.0;  // s_n
  double s_hi = 0.0;  // s_{n-1}
  int inner_iterations = 0;
  bool converged = false;
  /// Coefficient on the reconstruction mesh nodes.
  std::vector<double> a;
  std::vector<InnerRecord> inner;
};

/// State carried between intervals.
struct GcmState {
  int n = 0;
  std::vector<std::vector<double>> q_history;  // q_0 .. q_{n}
  std::vector<double> V;                       // tail on the reconstruction mesh
  std::vector<double> a;                       // coefficient on the reconstruction mesh
};

using IntervalCallback = std::function<void(const IntervalResult&, const GcmState&)>;

/// Layer stripping over all intervals. `recon` is the reconstruction submesh of
/// domain.fem, and `data.node_ids` are FEM node ids (all nodes of `recon`, or at
/// least its boundary nodes for the boundary constraint).
std::vector<IntervalResult> run_gcm(const mesh::HybridDomain& domain, const mesh::SubMesh& recon,
                                    const laplace::PseudoFreqData& data, const GcmConfig& cfg,
                                    const IntervalCallback& on_interval = {});

}  // namespace waverec::gcm
