#pragma once

#include <string>

#include "taco/network.hpp"
#include "taco/paramspace.hpp"

namespace taco {

struct Checkpoint {
  NetworkLayout layout;
  ParameterSet phi;
  CompositionalMatrix W;
};

// Self-describing binary format: magic, version, layout dimensions and
// hash, Phi entries (column-major doubles), then each task's (id, w).
// Round-trips bit-exactly in double precision.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace taco
