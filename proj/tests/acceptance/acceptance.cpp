// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: acceptance <config dir> [work dir]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "test_support.hpp"
#include "waverec/app.hpp"
#include "waverec/config.hpp"
#include "waverec/io.hpp"
#include "waverec/laplace.hpp"
#include "waverec/layer_stripping.hpp"
#include "waverec/recovery.hpp"

using namespace waverec;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Experiment {
  ExperimentConfig cfg;
  fs::path data;
  fs::path rec;
  json metrics;
  double seconds = 0.0;
};

Experiment run_experiment(const fs::path& config, const fs::path& work) {
  Experiment e;
  e.cfg = load_config(config.string());
  e.data = work / "data";
  e.rec = work / "rec";
  const auto start = std::chrono::steady_clock::now();
  app::cmd_simulate(config.string(), e.data.string());
  app::cmd_reconstruct(config.string(), e.data.string(), e.rec.string());
  e.seconds = seconds_since(start);
  e.metrics = json::parse(io::read_text((e.rec / "metrics.json").string()));
  return e;
}

const json& interval_at(const Experiment& e, double s) {
  for (const json& it : e.metrics.at("intervals"))
    if (it.at("s").get<double>() == s) return it;
  throw std::runtime_error("no interval labelled s = " + fmt(s));
}

Outcome forward_order() {
  const auto start = std::chrono::steady_clock::now();
  const double e16 = test::standing_wave_error(16, 0.5);
  const double e32 = test::standing_wave_error(32, 0.5);
  const double e64 = test::standing_wave_error(64, 0.5);
  const double r1 = e16 / e32, r2 = e32 / e64;
  const double t = seconds_since(start);
  const bool ok = r1 >= 3.2 && r1 <= 4.8 && r2 >= 3.2 && r2 <= 4.8 && t < 60.0;
  return {ok, "error ratios " + fmt(r1) + ", " + fmt(r2) + " in " + fmt(t) + " s"};
}

Outcome laplace_fidelity() {
  const double tau = 0.001, T = 2.0, s = 5.0;
  const long n = std::lround(T / tau) + 1;
  std::vector<double> u(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * tau;
    u[static_cast<std::size_t>(j)] = t * std::exp(-t);
  }
  const double exact = 1.0 / ((s + 1.0) * (s + 1.0));
  const double rel = std::abs(laplace::laplace(u, s, tau, T) - exact) / exact;
  return {rel <= 1e-4, "relative error " + fmt(rel)};
}

Outcome carleman_bound() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double s_bar = 2.0 + 28.0 * u01(rng);
    const double h = 0.05 + 1.95 * u01(rng);
    const double lambda = (1.0 + 100.0 * u01(rng)) / h;
    const int max_n = std::max(1, static_cast<int>((s_bar - 1.0) / h));
    const int n = 1 + static_cast<int>(u01(rng) * max_n) % max_n;
    const double s_hi = s_bar - (n - 1) * h;
    const gcm::CarlemanCoeffs c = gcm::carleman_coeffs(s_hi - h, s_hi, lambda);
    const double ratio = std::abs(c.I1) / c.I0 / (4.0 * s_bar * s_bar / lambda);
    worst = std::max(worst, ratio);
    if (ratio > 1.0) ++violations;
  }
  const double t = seconds_since(start);
  return {violations == 0 && t < 10.0, std::to_string(violations) + " violations in 1000 trials, largest |I1|/I0 "
                                           "relative to the bound " + fmt(worst) + ", " + fmt(t) + " s"};
}

Outcome recovery_cross_check() {
  auto gap = [](double h) {
    const auto m = mesh::build_rect_mesh({-0.52, 0.52, -0.52, 0.52}, h, std::nullopt);
    std::vector<double> v(m.num_nodes());
    for (std::size_t k = 0; k < v.size(); ++k) {
      const Point2 p = m.node(static_cast<int>(k));
      v[k] = (p.x * p.x + p.y * p.y) / 4.0;
    }
    const auto a = recovery::recover_a_unclamped(m, v, 1.0);
    const auto b = recovery::recover_a_direct_unclamped(m, v, 1.0);
    const auto boundary = recovery::boundary_nodes(m);
    double worst = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
      if (!boundary[k]) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
  };
  const double coarse = gap(0.02), fine = gap(0.01);
  return {coarse <= 5e-2 && fine <= 0.6 * coarse,
          "max discrepancy " + fmt(coarse) + " at h 0.02, " + fmt(fine) + " at h 0.01"};
}

Outcome null_test(const Experiment& e) {
  double lo = 1e9, hi = -1e9;
  int intervals = 0;
  for (const json& it : e.metrics.at("intervals")) {
    const double s = it.at("s").get<double>();
    if (s < 8.0 || s > 19.0) continue;
    ++intervals;
    const auto field = io::read_field((e.rec / ("a_s" + std::to_string(it.at("n").get<int>()) + ".csv")).string());
    for (double a : field.values) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  const bool ok = intervals == 12 && lo >= 0.9 && hi <= 1.1 && e.seconds < 600.0;
  return {ok, "a in [" + fmt(lo) + ", " + fmt(hi) + "] over " + std::to_string(intervals) + " intervals, " +
                  fmt(e.seconds) + " s"};
}

Outcome single_inclusion(const Experiment& e) {
  const json& it = interval_at(e, 19.0);
  const double max_a = it.at("max_a").get<double>();
  const double bg = it.at("background_far_mean").get<double>();
  const bool ok = max_a >= 4.1 && max_a <= 6.2 && bg >= 0.85 && bg <= 1.15 && e.seconds < 1800.0;
  return {ok, "max a " + fmt(max_a) + ", far background mean " + fmt(bg) + ", " + fmt(e.seconds) + " s"};
}

Outcome three_points(const Experiment& e) {
  const json& it = interval_at(e, 19.0);
  const double max_a = it.at("max_a").get<double>();
  const double radius = 2.0 * e.cfg.geometry.h_tilde;
  const auto& found = it.at("inclusions");
  int matched = 0;
  double worst = 0.0;
  for (const Inclusion& inc : e.cfg.phantom) {
    double best = 1e9;
    for (const json& f : found) {
      const Point2 c{f.at("centroid")[0].get<double>(), f.at("centroid")[1].get<double>()};
      best = std::min(best, norm(c - inc.center));
    }
    worst = std::max(worst, best);
    if (best <= radius) ++matched;
  }
  const bool ok = max_a >= 4.0 && max_a <= 6.2 && found.size() == 3 && matched == 3 && e.seconds < 1800.0;
  return {ok, "max a " + fmt(max_a) + ", " + std::to_string(found.size()) + " detected, " + std::to_string(matched) +
                  " centers matched (largest offset " + fmt(worst) + "), " + fmt(e.seconds) + " s"};
}

Outcome deterioration(const std::map<std::string, Experiment>& runs) {
  bool ok = true;
  std::string detail;
  for (const char* name : {"test1", "test2", "test3"}) {
    const Experiment& e = runs.at(name);
    const double lo = interval_at(e, 5.0).at("relative_l2").get<double>();
    const double hi = interval_at(e, 19.0).at("relative_l2").get<double>();
    ok = ok && lo > hi;
    detail += std::string(detail.empty() ? "" : "; ") + name + " L2 " + fmt(lo) + " at s 5 vs " + fmt(hi) + " at s 19";
  }
  return {ok, detail};
}

Outcome determinism(const std::map<std::string, Experiment>& runs, const fs::path& work) {
  bool ok = true;
  std::string detail;
  for (const char* name : {"null", "test2", "test1"}) {
    const Experiment& first = runs.at(name);
    const Experiment again = run_experiment(first.data / "config_echo.json", work / (std::string(name) + "_rerun"));
    const bool same = io::read_text((first.rec / "metrics.json").string()) ==
                      io::read_text((again.rec / "metrics.json").string());
    ok = ok && same;
    detail += std::string(detail.empty() ? "" : ", ") + name + (same ? " identical" : " differs");
  }
  return {ok, detail};
}

bool report(int id, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& ex) {
    o = {false, std::string("error: ") + ex.what()};
  }
  std::printf("criterion %d: %s - %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <config dir> [work dir]\n");
    return 2;
  }
  const fs::path configs = argv[1];
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "waverec_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  bool all = true;
  all &= report(1, forward_order);
  all &= report(2, laplace_fidelity);
  all &= report(3, carleman_bound);
  all &= report(4, recovery_cross_check);

  std::map<std::string, Experiment> runs;
  std::string failure;
  for (const char* name : {"null", "test1", "test2", "test3"}) {
    try {
      runs.emplace(name, run_experiment(configs / (std::string(name) + ".json"), work / name));
    } catch (const std::exception& ex) {
      failure += std::string(name) + ": " + ex.what() + " ";
    }
  }
  auto need = [&](std::initializer_list<const char*> names) {
    for (const char* n : names)
      if (!runs.count(n)) throw std::runtime_error("pipeline run failed: " + failure);
  };
  all &= report(5, [&] { need({"null"}); return null_test(runs.at("null")); });
  all &= report(6, [&] { need({"test2"}); return single_inclusion(runs.at("test2")); });
  all &= report(7, [&] { need({"test1"}); return three_points(runs.at("test1")); });
  all &= report(8, [&] { need({"test1", "test2", "test3"}); return deterioration(runs); });
  all &= report(9, [&] { need({"null", "test1", "test2"}); return determinism(runs, work); });
  return all ? 0 : 1;
}
