#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>

#include "waverec/forward.hpp"
#include "waverec/laplace.hpp"
#include "waverec/layer_stripping.hpp"
#include "waverec/recovery.hpp"
#include "waverec/sparse.hpp"

using namespace waverec;

namespace {

const mesh::HybridDomain& domain() {
  static const mesh::HybridDomain d =
      mesh::build_hybrid({-0.7, 0.7, -0.7, 0.7}, {-0.52, 0.52, -0.52, 0.52}, Circle{{0.0, 0.0}, 0.4}, 0.02);
  return d;
}

const mesh::SubMesh& submesh() {
  static const mesh::SubMesh s = mesh::circle_submesh(domain().fem);
  return s;
}

void BM_BuildHybrid(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mesh::build_hybrid({-0.7, 0.7, -0.7, 0.7}, {-0.52, 0.52, -0.52, 0.52}, Circle{{0.0, 0.0}, 0.4}, h));
}
BENCHMARK(BM_BuildHybrid)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_LeapfrogStep(benchmark::State& state) {
  const forward::SimConfig cfg;
  const std::vector<double> a(domain().fem.num_nodes(), 1.0);
  const forward::WaveOperators ops(domain(), a, cfg);
  forward::WaveField prev = ops.zero_field(), cur = ops.zero_field(), next = ops.zero_field();
  ops.first_step(prev, cur);
  double t = cfg.tau;
  for (auto _ : state) {
    ops.step(prev, cur, t, next);
    std::swap(prev, cur);
    std::swap(cur, next);
    t += cfg.tau;
  }
}
BENCHMARK(BM_LeapfrogStep)->Unit(benchmark::kMicrosecond);

void BM_RunForward(benchmark::State& state) {
  const forward::SimConfig cfg;
  const NodalField a{FieldRole::Coefficient_a, std::vector<double>(domain().fem.num_nodes(), 1.0)};
  for (auto _ : state) benchmark::DoNotOptimize(forward::run_forward(domain(), a, cfg, submesh().to_parent));
}
BENCHMARK(BM_RunForward)->Unit(benchmark::kMillisecond);

void BM_Transform(benchmark::State& state) {
  const forward::SimConfig cfg;
  const NodalField a{FieldRole::Coefficient_a, std::vector<double>(domain().fem.num_nodes(), 1.0)};
  const auto traces = forward::run_forward(domain(), a, cfg, submesh().to_parent);
  const laplace::PseudoFreqGrid grid;
  for (auto _ : state) benchmark::DoNotOptimize(laplace::transform(traces, grid));
}
BENCHMARK(BM_Transform)->Unit(benchmark::kMillisecond);

void BM_CarlemanCoeffs(benchmark::State& state) {
  const double lambda = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gcm::carleman_coeffs(18.0, 19.0, lambda));
}
BENCHMARK(BM_CarlemanCoeffs)->Arg(1)->Arg(20)->Arg(2000);

void BM_SolveQn(benchmark::State& state) {
  const mesh::TriMesh& m = submesh().mesh;
  const std::size_t n = m.num_nodes();
  std::vector<std::vector<double>> history{std::vector<double>(n, 0.0)};
  std::vector<double> V(n), values;
  std::vector<int> dirichlet;
  for (std::size_t k = 0; k < n; ++k) V[k] = -0.01 * m.node(static_cast<int>(k)).x;
  for (const auto& e : m.boundary_edges())
    for (int k : e.nodes) dirichlet.push_back(k);
  std::sort(dirichlet.begin(), dirichlet.end());
  dirichlet.erase(std::unique(dirichlet.begin(), dirichlet.end()), dirichlet.end());
  for (int k : dirichlet) values.push_back(1e-3 * m.node(k).y);
  gcm::QnInputs in;
  in.coeffs = gcm::carleman_coeffs(18.0, 19.0, 20.0);
  in.history = history;
  in.V = V;
  in.dirichlet_nodes = dirichlet;
  in.dirichlet_values = values;
  const std::vector<double> lag(n, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(gcm::solve_qn(m, in, lag, 10, 1e-3));
}
BENCHMARK(BM_SolveQn)->Unit(benchmark::kMillisecond);

void BM_RecoverA(benchmark::State& state) {
  const mesh::TriMesh& m = submesh().mesh;
  std::vector<double> v(m.num_nodes());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Point2 p = m.node(static_cast<int>(k));
    v[k] = (p.x * p.x + p.y * p.y) / 4.0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(recovery::recover_a(m, v, 1.0, 10.0));
}
BENCHMARK(BM_RecoverA)->Unit(benchmark::kMillisecond);

void BM_CgPoisson(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int n = side * side;
  sparse::TripletBuilder tb(n);
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const int k = j * side + i;
      tb.add(k, k, 4.0);
      if (i > 0) tb.add(k, k - 1, -1.0);
      if (i + 1 < side) tb.add(k, k + 1, -1.0);
      if (j > 0) tb.add(k, k - side, -1.0);
      if (j + 1 < side) tb.add(k, k + side, -1.0);
    }
  const sparse::CsrMatrix a = tb.build();
  const std::vector<double> b(static_cast<std::size_t>(n), 1.0);
  const sparse::SolveOptions opts{1e-10, 10000, {}};
  for (auto _ : state) benchmark::DoNotOptimize(sparse::solve_cg(a, b, opts));
}
BENCHMARK(BM_CgPoisson)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
