#include "waverec/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "waverec/error.hpp"

namespace waverec {

std::string_view to_string(FieldRole role) {
  switch (role) {
    case FieldRole::Coefficient_a: return "a";
    case FieldRole::V_tail: return "V";
    case FieldRole::v: return "v";
    case FieldRole::q_n: return "q";
    case FieldRole::w: return "w";
    case FieldRole::psi: return "psi";
  }
  return "?";
}

void check_role_invariant(const NodalField& field, double d_max) {
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    const double v = field.values[i];
    bool ok = std::isfinite(v);
    if (field.role == FieldRole::Coefficient_a) ok = ok && v >= 1.0 && v <= d_max;
    if (field.role == FieldRole::w) ok = ok && v > 0.0;
    if (!ok) {
      std::ostringstream os;
      os << "field '" << to_string(field.role) << "' violates its invariant at node " << i << " (value " << v << ")";
      throw Error(ErrorCode::StateCorrupt, os.str());
    }
  }
}

void clamp_values(std::vector<double>& values, double lo, double hi) {
  for (double& v : values) v = std::clamp(v, lo, hi);
}

}  // namespace waverec
