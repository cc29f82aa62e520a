#pragma once

#include <string_view>

namespace dasee::conic {

enum class SolveCode { optimal, infeasible, numerical_failure };

inline std::string_view to_string(SolveCode code) {
  switch (code) {
    case SolveCode::optimal: return "optimal";
    case SolveCode::infeasible: return "infeasible";
    case SolveCode::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

}  // namespace dasee::conic
