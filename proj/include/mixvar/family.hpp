#pragma once

#include <stdexcept>
#include <string>

namespace mixvar {

enum class Family { MMW, GMM, TMM };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::MMW: return "mmw";
    case Family::GMM: return "gmm";
    case Family::TMM: return "tmm";
  }
  return "unknown";
}

inline Family family_from_string(const std::string& s) {
  if (s == "mmw") return Family::MMW;
  if (s == "gmm") return Family::GMM;
  if (s == "tmm") return Family::TMM;
  throw std::invalid_argument("unknown model family '" + s + "'");
}

}  // namespace mixvar
