#include "waverec/app.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "waverec/forward.hpp"
#include "waverec/io.hpp"
#include "waverec/laplace.hpp"
#include "waverec/layer_stripping.hpp"
#include "waverec/mesh.hpp"
#include "waverec/metrics.hpp"
#include "waverec/phantom.hpp"

namespace waverec::app {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.code(), e.what());
  } catch (const std::exception& e) {
    throw StageError(name, ErrorCode::IoError, e.what());
  }
}

struct Experiment {
  ExperimentConfig cfg;
  mesh::HybridDomain domain;
  mesh::SubMesh recon;
  std::vector<int> recording;  // FEM node ids
};

Experiment setup(const std::string& config_path) {
  Experiment ex;
  ex.cfg = stage("config", [&] {
    ExperimentConfig c = load_config(config_path);
    c.validate();
    return c;
  });
  for (const auto& w : ex.cfg.warnings()) std::cerr << "warning: " << w << '\n';
  const auto& g = ex.cfg.geometry;
  ex.domain = stage("mesh", [&] { return mesh::build_hybrid(g.g_bounds, g.omega_bounds, g.circle, g.h_tilde); });
  ex.recon = stage("mesh", [&] { return mesh::circle_submesh(ex.domain.fem); });
  if (ex.cfg.recording == RecordingSet::Interior) {
    ex.recording = ex.recon.to_parent;
  } else {
    const auto& flags = ex.recon.mesh.node_flags();
    for (std::size_t k = 0; k < flags.size(); ++k)
      if (flags[k] & mesh::kOnCircle) ex.recording.push_back(ex.recon.to_parent[k]);
  }
  return ex;
}

void ensure_dir(const std::string& dir) {
  stage("io", [&] {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create directory " + dir);
  });
}

std::vector<double> restrict_to(const mesh::SubMesh& sub, std::span<const double> parent) {
  std::vector<double> out(sub.to_parent.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = parent[static_cast<std::size_t>(sub.to_parent[k])];
  return out;
}

bool same_point(Point2 a, Point2 b) { return std::abs(a.x - b.x) <= 1e-12 && std::abs(a.y - b.y) <= 1e-12; }

json metrics_json(const metrics::Metrics& m) {
  json j = {{"max_a", m.max_a},
            {"background_mean", m.background_mean},
            {"background_std", m.background_std},
            {"background_far_mean", m.background_far_mean},
            {"threshold", m.threshold}};
  j["relative_l2"] = m.relative_l2 ? json(*m.relative_l2) : json(nullptr);
  json inc = json::array();
  for (const auto& d : m.inclusions)
    inc.push_back({{"centroid", {d.centroid.x, d.centroid.y}}, {"nodes", d.nodes}, {"peak", d.peak}});
  j["inclusions"] = inc;
  return j;
}

}  // namespace

std::string error_json(const std::string& stage, const std::string& error, const std::string& detail) {
  return json{{"stage", stage}, {"error", error}, {"detail", detail}}.dump();
}

void cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const Experiment ex = setup(config_path);
  const NodalField truth = stage("phantom", [&] {
    return build_phantom(ex.domain.fem, ex.cfg.geometry.circle, ex.cfg.phantom);
  });
  const auto traces = stage("forward", [&] {
    return forward::run_forward(ex.domain, truth, ex.cfg.simulation, ex.recording);
  });
  const auto noisy = stage("noise", [&] {
    return laplace::add_noise(traces, ex.cfg.simulation.sigma, ex.cfg.simulation.seed);
  });
  ensure_dir(out_dir);
  stage("io", [&] {
    const fs::path out(out_dir);
    forward::write_traces((out / "traces.bin").string(), noisy);
    io::write_mesh_nodes_csv((out / "mesh_nodes.csv").string(), ex.domain.fem);
    const std::vector<double> t = restrict_to(ex.recon, truth.values);
    io::write_field_vtk((out / "truth.vtk").string(), ex.recon.mesh, t, "a");
    io::write_field_csv((out / "truth.csv").string(), ex.recon.mesh, t, "a", ex.recon.to_parent);
    io::write_text((out / "config_echo.json").string(), to_json(ex.cfg));
  });
}

void cmd_reconstruct(const std::string& config_path, const std::string& data_dir, const std::string& out_dir) {
  const Experiment ex = setup(config_path);
  const fs::path data(data_dir);
  const forward::TimeTraces traces = stage("io", [&] { return forward::read_traces((data / "traces.bin").string()); });
  stage("io", [&] {
    const auto& sim = ex.cfg.simulation;
    if (traces.tau != sim.tau || traces.num_samples != sim.num_samples())
      throw Error(ErrorCode::InvalidConfig, "trace sampling does not match the configured tau and T");
    const fs::path nodes_path = data / "mesh_nodes.csv";
    if (fs::exists(nodes_path)) {
      const auto nodes = io::read_mesh_nodes_csv(nodes_path.string());
      bool same = nodes.size() == ex.domain.fem.num_nodes();
      for (std::size_t k = 0; same && k < nodes.size(); ++k)
        same = nodes[k].id == static_cast<int>(k) && same_point(nodes[k].x, ex.domain.fem.node(static_cast<int>(k)));
      if (!same) throw Error(ErrorCode::MeshMismatch, "mesh_nodes.csv does not match the configured geometry");
    }
  });
  std::optional<std::vector<double>> truth;
  stage("io", [&] {
    const fs::path truth_path = data / "truth.csv";
    if (!fs::exists(truth_path)) return;
    const io::FieldFile f = io::read_field_csv(truth_path.string());
    bool same = f.values.size() == ex.recon.mesh.num_nodes();
    for (std::size_t k = 0; same && k < f.nodes.size(); ++k)
      same = same_point(f.nodes[k], ex.recon.mesh.node(static_cast<int>(k)));
    if (!same) throw Error(ErrorCode::MeshMismatch, "truth.csv does not match the reconstruction mesh");
    truth = f.values;
  });

  const laplace::PseudoFreqData pfd = stage("laplace", [&] {
    return laplace::transform(traces, ex.cfg.pseudo_frequency);
  });
  ensure_dir(out_dir);
  const fs::path out(out_dir);
  const metrics::Support support = metrics::support_from_mesh(ex.recon.mesh);
  const double far = 3.0 * ex.cfg.geometry.h_tilde;
  json intervals = json::array();
  auto on_interval = [&](const gcm::IntervalResult& r, const gcm::GcmState&) {
    stage("io", [&] {
      const std::string stem = "a_s" + std::to_string(r.n);
      io::write_field_vtk((out / (stem + ".vtk")).string(), ex.recon.mesh, r.a, "a");
      io::write_field_csv((out / (stem + ".csv")).string(), ex.recon.mesh, r.a, "a", ex.recon.to_parent);
    });
    const metrics::Metrics m = stage("metrics", [&] {
      std::optional<std::span<const double>> t;
      if (truth) t = std::span<const double>(*truth);
      return metrics::compute_metrics(support, r.a, t, far);
    });
    json j = {{"n", r.n},
              {"s", r.s_hi},
              {"s_lo", r.s_lo},
              {"s_hi", r.s_hi},
              {"inner_iterations", r.inner_iterations},
              {"converged", r.converged}};
    j.update(metrics_json(m));
    json inner = json::array();
    for (const auto& rec : r.inner)
      inner.push_back({{"i", rec.i},
                       {"lag_iterations", rec.lag_iterations},
                       {"lag_converged", rec.lag_converged},
                       {"q_change", std::isfinite(rec.q_change) ? json(rec.q_change) : json(nullptr)},
                       {"a_change", std::isfinite(rec.a_change) ? json(rec.a_change) : json(nullptr)},
                       {"max_a", rec.max_a}});
    j["inner"] = inner;
    intervals.push_back(j);
  };
  const gcm::GcmConfig gc = ex.cfg.gcm_config();
  stage("gcm", [&] { gcm::run_gcm(ex.domain, ex.recon, pfd, gc, on_interval); });
  stage("io", [&] {
    const json doc = {{"intervals", intervals}};
    io::write_text((out / "metrics.json").string(), doc.dump(2) + "\n");
  });
}

std::string cmd_evaluate(const std::string& truth_path, const std::string& recon_path) {
  const io::FieldFile truth = stage("io", [&] { return io::read_field(truth_path); });
  const io::FieldFile recon = stage("io", [&] { return io::read_field(recon_path); });
  return stage("evaluate", [&] {
    bool same = truth.nodes.size() == recon.nodes.size();
    for (std::size_t k = 0; same && k < truth.nodes.size(); ++k) same = same_point(truth.nodes[k], recon.nodes[k]);
    if (!same) throw Error(ErrorCode::MeshMismatch, "truth and reconstruction are on different meshes");
    const auto& tris = !recon.triangles.empty() ? recon.triangles : truth.triangles;
    metrics::Support support;
    if (!tris.empty()) {
      const mesh::TriMesh m(truth.nodes, tris, {}, std::vector<std::uint8_t>(truth.nodes.size(), 0), {});
      support = metrics::support_from_mesh(m);
    } else {
      support = metrics::support_from_points(truth.nodes);
    }
    const double spacing = [&] {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < support.nodes.size(); ++k)
        for (int j : support.neighbors[k]) best = std::min(best, norm(support.nodes[k] - support.nodes[static_cast<std::size_t>(j)]));
      return std::isfinite(best) ? best : 0.0;
    }();
    const metrics::Metrics m =
        metrics::compute_metrics(support, recon.values, std::span<const double>(truth.values), 3.0 * spacing);
    return metrics_json(m).dump(2);
  });
}

}  // namespace waverec::app
