#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gearnet/mechanism.hpp"

namespace gearnet {

// Mechanism description document (JSON):
//   {
//     "family":   optional builder tag,
//     "shafts":   [{"name": str, "inertia": num, "role": str}, ...],
//     "elements": [{"kind": str, "name": optional str,
//                   "ports": {<port>: <shaft name>, ...},
//                   "params": {...}}, ...],
//     "external": [<shaft name>, ...]
//   }
// Kinds and their ports / params:
//   differential    ports ring, side_a, side_b
//   worm_pair       ports worm, wheel          params k, self_locking (default true)
//   fixed_ratio     ports a, b                 params ratio
//   rigid_coupling  ports a, b                 params sign (default +1)
//   planetary       ports sun, ring, carrier   params rho

/// Thrown for malformed documents; path() is a JSON pointer to the offending field.
class DescriptionError : public ValidationError {
 public:
  DescriptionError(const std::string& path, const std::string& what)
      : ValidationError(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Parses and finalizes a graph. Parse errors report line and column.
MechanismGraph parse_description(std::string_view text);
MechanismGraph load_description(const std::filesystem::path& file);

std::string write_description(const MechanismGraph& graph);

}  // namespace gearnet
