#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "test_support.hpp"
#include "waverec/error.hpp"
#include "waverec/forward.hpp"
#include "waverec/laplace.hpp"
#include "waverec/p1.hpp"

using namespace waverec;
using namespace waverec::forward;

namespace {

const mesh::HybridDomain& reference_domain() {
  static const mesh::HybridDomain d = test::reference_domain();
  return d;
}

NodalField ones(const mesh::HybridDomain& d) {
  return {FieldRole::Coefficient_a, std::vector<double>(d.fem.num_nodes(), 1.0)};
}

std::vector<int> all_fem_nodes(const mesh::HybridDomain& d) {
  std::vector<int> ids(d.fem.num_nodes());
  for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = static_cast<int>(k);
  return ids;
}

/// Gaussian bump centred at c on both discretizations.
WaveField bump(const WaveOperators& ops, Point2 c, double width) {
  const auto& d = ops.domain();
  WaveField u = ops.zero_field();
  auto f = [&](Point2 x) { return std::exp(-std::pow(norm(x - c) / width, 2)); };
  for (int j = 0; j < d.grid.ny; ++j)
    for (int i = 0; i < d.grid.nx; ++i) u.grid[static_cast<std::size_t>(d.grid.index(i, j))] = f(d.grid.node(i, j));
  for (std::size_t k = 0; k < d.fem.num_nodes(); ++k) u.fem[k] = f(d.fem.node(static_cast<int>(k)));
  return u;
}

}  // namespace

TEST(PlaneWave, PeakAtQuarterPeriod) {
  const double omega = 20.0;
  EXPECT_NEAR(plane_wave(std::numbers::pi / (2.0 * omega), omega, 2.0 * std::numbers::pi / omega), 1.0, 1e-15);
}

TEST(PlaneWave, ZeroAfterFirstPeriodAndAtStart) {
  const double omega = 20.0, t1 = 2.0 * std::numbers::pi / omega;
  EXPECT_EQ(plane_wave(t1 + 0.01, omega, t1), 0.0);
  EXPECT_EQ(plane_wave(0.0, omega, t1), 0.0);
}

TEST(SimConfig, ReferenceSampleCount) {
  SimConfig cfg;
  EXPECT_EQ(cfg.num_samples(), 2001);
}

TEST(Validate, UnstableStepIsRejected) {
  SimConfig cfg;
  cfg.tau = 0.02;
  try {
    validate(cfg, 0.02, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnstableConfig);
  }
  EXPECT_NO_THROW(validate(SimConfig{}, 0.02, 1.0));
  EXPECT_DOUBLE_EQ(stable_time_step(0.02, 1.0), 0.9 * 0.02 / std::sqrt(2.0));
}

TEST(Validate, FinalTimeBeforeDriveEndsIsRejected) {
  SimConfig cfg;
  cfg.T = 0.2;
  try {
    validate(cfg, 0.02, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}

TEST(RunForward, DisabledDriveGivesZeroTraces) {
  const auto& d = reference_domain();
  SimConfig cfg;
  cfg.drive_enabled = false;
  cfg.T = 0.5;
  const auto ids = all_fem_nodes(d);
  const TimeTraces tr = run_forward(d, ones(d), cfg, ids);
  for (double v : tr.samples) ASSERT_EQ(v, 0.0);
}

TEST(RunForward, RecordingOutsideMeshThrows) {
  const auto& d = reference_domain();
  const std::vector<int> ids{static_cast<int>(d.fem.num_nodes())};
  try {
    run_forward(d, ones(d), SimConfig{}, ids);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimMismatch);
  }
}

TEST(RunForward, Deterministic) {
  const auto& d = reference_domain();
  SimConfig cfg;
  cfg.T = 0.6;
  const auto ids = all_fem_nodes(d);
  const TimeTraces a = run_forward(d, ones(d), cfg, ids);
  const TimeTraces b = run_forward(d, ones(d), cfg, ids);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.num_samples, cfg.num_samples());
}

TEST(Step, ZeroStateZeroForcingStaysZero) {
  const auto& d = reference_domain();
  SimConfig cfg;
  cfg.drive_enabled = false;
  const WaveOperators ops(d, ones(d).values, cfg);
  const WaveField z = ops.zero_field();
  WaveField next = ops.zero_field();
  ops.step(z, z, 0.5, next);
  for (double v : next.grid) ASSERT_EQ(v, 0.0);
  for (double v : next.fem) ASSERT_EQ(v, 0.0);
}

TEST(Step, FdmInteriorNodeMatchesFivePointLeapfrog) {
  const auto& d = reference_domain();
  SimConfig cfg;
  cfg.drive_enabled = false;
  const WaveOperators ops(d, ones(d).values, cfg);
  const WaveField cur = bump(ops, {-0.6, 0.1}, 0.15);
  WaveField prev = ops.zero_field();
  for (std::size_t k = 0; k < prev.grid.size(); ++k) prev.grid[k] = 0.9 * cur.grid[k];
  WaveField next = ops.zero_field();
  ops.step(prev, cur, 0.5, next);
  const double h = d.spacing, tau = cfg.tau;
  const int i = 5, j = 40;
  ASSERT_EQ(d.grid_role[static_cast<std::size_t>(d.grid.index(i, j))], mesh::GridRole::Fdm);
  auto u = [&](int a, int b) { return cur.grid[static_cast<std::size_t>(d.grid.index(a, b))]; };
  const double expected = 2.0 * u(i, j) - prev.grid[static_cast<std::size_t>(d.grid.index(i, j))] +
                          tau * tau / (h * h) * (u(i + 1, j) + u(i - 1, j) + u(i, j + 1) + u(i, j - 1) - 4.0 * u(i, j));
  EXPECT_NEAR(next.grid[static_cast<std::size_t>(d.grid.index(i, j))], expected, 1e-14);
}

TEST(Step, FemNodeMatchesDenseOperator) {
  const mesh::HybridDomain d = test::reference_domain();
  SimConfig cfg;
  cfg.drive_enabled = false;
  std::vector<double> a(d.fem.num_nodes());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = 1.0 + 0.5 * std::abs(d.fem.node(static_cast<int>(k)).x);
  const WaveOperators ops(d, a, cfg);
  int target = -1;
  for (std::size_t k = 0; k < d.fem.num_nodes() && target < 0; ++k)
    if (norm(d.fem.node(static_cast<int>(k)) - Point2{0.1, 0.1}) < 1e-9) target = static_cast<int>(k);
  ASSERT_GE(target, 0);
  WaveField cur = ops.zero_field();
  cur.fem[static_cast<std::size_t>(target)] = 1.0;
  const WaveField prev = ops.zero_field();
  WaveField next = ops.zero_field();
  ops.step(prev, cur, 0.5, next);

  std::vector<double> col(d.fem.num_nodes(), 0.0), mass(d.fem.num_nodes(), 0.0);
  for (std::size_t t = 0; t < d.fem.num_triangles(); ++t) {
    const auto& tri = d.fem.triangle(static_cast<int>(t));
    const Point2 p0 = d.fem.node(tri[0]), p1 = d.fem.node(tri[1]), p2 = d.fem.node(tri[2]);
    const double area = 0.5 * std::abs(cross(p1 - p0, p2 - p0));
    const std::array<Point2, 3> e{p2 - p1, p0 - p2, p1 - p0};
    for (int r = 0; r < 3; ++r) {
      mass[static_cast<std::size_t>(tri[static_cast<std::size_t>(r)])] += area / 3.0;
      for (int c = 0; c < 3; ++c)
        if (tri[static_cast<std::size_t>(c)] == target)
          col[static_cast<std::size_t>(tri[static_cast<std::size_t>(r)])] +=
              dot(e[static_cast<std::size_t>(r)], e[static_cast<std::size_t>(c)]) / (4.0 * area);
    }
  }
  const double tau2 = cfg.tau * cfg.tau;
  for (int k : ops.fem_updated()) {
    const auto uk = static_cast<std::size_t>(k);
    const double expected = 2.0 * cur.fem[uk] - tau2 * col[uk] / (a[uk] * mass[uk]);
    ASSERT_NEAR(next.fem[uk], expected, 1e-14) << "node " << k;
  }
}

TEST(Energy, ConservedWithReflectingBoundaries) {
  const auto& d = reference_domain();
  SimConfig cfg;
  cfg.drive_enabled = false;
  cfg.reflecting = true;
  std::vector<double> a(d.fem.num_nodes(), 1.0);
  for (std::size_t k = 0; k < a.size(); ++k)
    if (norm(d.fem.node(static_cast<int>(k))) < 0.1) a[k] = 3.0;
  const WaveOperators ops(d, a, cfg);
  WaveField prev = bump(ops, {0.45, 0.0}, 0.08);
  ops.exchange(prev);
  WaveField cur = ops.zero_field(), next = ops.zero_field();
  ops.first_step(prev, cur);
  const double e0 = ops.energy(prev, cur);
  ASSERT_GT(e0, 0.0);
  double worst = 0.0;
  for (int n = 1; n <= 1000; ++n) {
    ops.step(prev, cur, n * cfg.tau, next);
    std::swap(prev, cur);
    std::swap(cur, next);
    worst = std::max(worst, std::abs(ops.energy(prev, cur) - e0) / e0);
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Energy, NonIncreasingAfterDriveWithAbsorbingBoundaries) {
  const auto& d = reference_domain();
  const SimConfig cfg;
  const WaveOperators ops(d, ones(d).values, cfg);
  WaveField prev = ops.zero_field(), cur = ops.zero_field(), next = ops.zero_field();
  ops.first_step(prev, cur);
  const long n = cfg.num_samples();
  double last = -1.0;
  int violations = 0;
  for (long j = 1; j + 1 < n; ++j) {
    const double t = static_cast<double>(j) * cfg.tau;
    ops.step(prev, cur, t, next);
    std::swap(prev, cur);
    std::swap(cur, next);
    if (t <= cfg.t1() + cfg.tau) continue;
    const double e = ops.energy(prev, cur);
    if (last > 0.0 && e > last * 1.01) ++violations;
    last = e;
  }
  EXPECT_EQ(violations, 0);
  EXPECT_GT(last, 0.0);
}

TEST(Hybrid, MatchesPureFiniteDifferences) {
  const mesh::HybridDomain d =
      mesh::build_hybrid({-0.7, 0.7, -0.7, 0.7}, {-0.52, 0.52, -0.52, 0.52}, std::nullopt, 0.02);
  SimConfig cfg;
  cfg.T = 0.8;
  const auto ids = all_fem_nodes(d);
  const TimeTraces tr = run_forward(d, ones(d), cfg, ids);

  const auto& g = d.grid;
  const double h = g.spacing, tau = cfg.tau;
  const int nx = g.nx, ny = g.ny;
  std::vector<double> um(g.num_nodes(), 0.0), u0(g.num_nodes(), 0.0), up(g.num_nodes(), 0.0);
  auto cells = [&](int i, int j) {
    int c = 0;
    for (int cj = j - 1; cj <= j; ++cj)
      for (int ci = i - 1; ci <= i; ++ci) c += (ci >= 0 && cj >= 0 && ci < nx - 1 && cj < ny - 1);
    return c;
  };
  // Half the number of grid cells sharing the edge.
  auto edge_weight = [&](int i, int j, int di) {
    const int c = di != 0 ? (j - 1 >= 0) + (j < ny - 1) : (i - 1 >= 0) + (i < nx - 1);
    return 0.5 * c;
  };
  auto advance = [&](double t, bool first) {
    const double f = plane_wave(t, cfg.omega, cfg.t1());
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const auto k = static_cast<std::size_t>(g.index(i, j));
        double lap = 0.0;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int q = 0; q < 4; ++q) {
          const int a = i + di[q], b = j + dj[q];
          if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
          lap += edge_weight(i, j, di[q]) * (u0[static_cast<std::size_t>(g.index(a, b))] - u0[k]);
        }
        const double m = 0.25 * h * h * cells(i, j);
        const double side = ((i == 0 || i == nx - 1) ? 0.5 : 1.0) * h;
        const double top = (j == ny - 1) ? side : 0.0;
        const double bottom = (j == 0) ? side : 0.0;
        if (first) {
          up[k] = u0[k] + 0.5 * tau * tau * (lap + top * f) / m;
          continue;
        }
        const double absorbing = bottom + (t > cfg.t1() ? top : 0.0);
        const double c = absorbing / (2.0 * tau);
        up[k] = (m / (tau * tau) * (2.0 * u0[k] - um[k]) + lap + top * f + c * um[k]) / (m / (tau * tau) + c);
      }
    }
    um = u0;
    u0 = up;
  };
  std::vector<int> grid_of_fem(d.fem.num_nodes(), -1);
  for (std::size_t k = 0; k < d.fem.num_nodes(); ++k) {
    const Point2 x = d.fem.node(static_cast<int>(k));
    const int i = static_cast<int>(std::lround((x.x - g.origin.x) / h));
    const int j = static_cast<int>(std::lround((x.y - g.origin.y) / h));
    grid_of_fem[k] = g.index(i, j);
  }
  const auto m = static_cast<std::size_t>(tr.num_samples);
  double worst = 0.0;
  for (long step = 1; step < tr.num_samples; ++step) {
    advance(static_cast<double>(step - 1) * tau, step == 1);
    for (std::size_t r = 0; r < ids.size(); ++r)
      worst = std::max(worst, std::abs(tr.samples[r * m + static_cast<std::size_t>(step)] -
                                       u0[static_cast<std::size_t>(grid_of_fem[r])]));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Manufactured, StandingWaveConvergesAtSecondOrder) {
  const double e1 = test::standing_wave_error(16, 0.5);
  const double e2 = test::standing_wave_error(32, 0.5);
  const double e3 = test::standing_wave_error(64, 0.5);
  EXPECT_GE(e1 / e2, 3.2);
  EXPECT_LE(e1 / e2, 4.8);
  EXPECT_GE(e2 / e3, 3.2);
  EXPECT_LE(e2 / e3, 4.8);
}

TEST(ForwardLaplace, MatchesTransformOfTraces) {
  const auto& d = reference_domain();
  SimConfig cfg;
  cfg.T = 0.8;
  const std::vector<int> ids{0, 17, static_cast<int>(d.fem.num_nodes()) / 2};
  const TimeTraces tr = run_forward(d, ones(d), cfg, ids);
  const std::vector<double> s{3.0, 11.0};
  const auto acc = forward_laplace(d, ones(d), cfg, s);
  for (std::size_t q = 0; q < s.size(); ++q)
    for (std::size_t r = 0; r < ids.size(); ++r)
      EXPECT_EQ(acc[q][static_cast<std::size_t>(ids[r])], laplace::laplace(tr.row(r), s[q], cfg.tau, cfg.T));
}

TEST(Wtrc, RoundTripIsBitExact) {
  TimeTraces tr;
  tr.node_ids = {3, 1, 4};
  tr.tau = 0.001;
  tr.T = 0.003;
  tr.num_samples = 4;
  tr.samples = {0.1, -2.5e-300, 1.0 / 3.0, std::numbers::pi, 0, 1, 2, 3, 4e10, -0.0, 5, 6};
  const auto dir = test::scratch_dir("wtrc");
  const std::string path = (dir / "t.bin").string();
  write_traces(path, tr);
  const TimeTraces back = read_traces(path);
  EXPECT_EQ(back.node_ids, tr.node_ids);
  EXPECT_EQ(back.tau, tr.tau);
  EXPECT_EQ(back.T, tr.T);
  EXPECT_EQ(back.num_samples, tr.num_samples);
  EXPECT_EQ(back.samples, tr.samples);
  EXPECT_EQ(std::filesystem::file_size(path), 4u + 4u + 4u + 8u + 8u + 3u * 4u + 12u * 8u);
}

TEST(Wtrc, BadMagicAndTruncationThrow) {
  const auto dir = test::scratch_dir("wtrc_bad");
  const std::string path = (dir / "bad.bin").string();
  std::ofstream(path) << "NOPE1234";
  EXPECT_THROW(read_traces(path), Error);
  std::ofstream(path, std::ios::binary) << "WTRC";
  try {
    read_traces(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}
