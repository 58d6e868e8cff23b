#include "mplab/error.hpp"

namespace mplab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Incompatible: return "incompatible";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Geometry: return "geometry";
  }
  return "unknown";
}

}  // namespace mplab
