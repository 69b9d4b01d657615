#pragma once

#include <string_view>
#include <vector>

namespace waverec {

enum class FieldRole { Coefficient_a, V_tail, v, q_n, w, psi };

std::string_view to_string(FieldRole role);

/// Scalar field with one value per mesh node, tagged by what it represents.
struct NodalField {
  FieldRole role = FieldRole::v;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// Throws StateCorrupt when the role invariant is violated: coefficients outside
/// [1, d], nonpositive w, or non-finite values.
void check_role_invariant(const NodalField& field, double d_max);

/// Clamp every value into [lo, hi].
void clamp_values(std::vector<double>& values, double lo, double hi);

}  // namespace waverec
