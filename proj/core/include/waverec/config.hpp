#pragma once

#include <string>
#include <vector>

#include "waverec/geometry.hpp"
#include "waverec/layer_stripping.hpp"
#include "waverec/phantom.hpp"

namespace waverec {

enum class RecordingSet { Interior, Boundary };

struct GeometryConfig {
  Rect g_bounds{-0.7, 0.7, -0.7, 0.7};
  Rect omega_bounds{-0.52, 0.52, -0.52, 0.52};
  Circle circle{{0.0, 0.0}, 0.4};
  double h_tilde = 0.02;
};

struct AlgorithmConfig {
  int m_inner_max = 5;
  double inner_tol = 1e-3;
  int lag_max = 10;
  double d = 10.0;
  gcm::TailInit tail_init = gcm::TailInit::Background;
  gcm::DataConstraint data_constraint = gcm::DataConstraint::Interior;
  bool smooth = false;
};

/// One JSON document describing a full experiment. Missing keys take the defaults
/// above; unknown keys are rejected.
struct ExperimentConfig {
  GeometryConfig geometry;
  forward::SimConfig simulation;
  laplace::PseudoFreqGrid pseudo_frequency;
  AlgorithmConfig algorithm;
  RecordingSet recording = RecordingSet::Interior;
  std::vector<Inclusion> phantom;

  /// Throws InvalidConfig / InvalidPhantom for values violating type invariants.
  void validate() const;
  /// Non-fatal findings such as s_min * T < 2.
  std::vector<std::string> warnings() const;
  gcm::GcmConfig gcm_config() const;
};

/// Throws InvalidConfig for malformed JSON, wrong types or unknown keys.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Complete JSON with every key spelled out; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& cfg);

}  // namespace waverec
