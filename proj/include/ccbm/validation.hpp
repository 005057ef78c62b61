#pragma once

#include <string>
#include <vector>

namespace ccbm {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // pass iff value <= threshold
};

/// Fast self-checks on small meshes: exact annulus solution, gradient
/// consistency against central differences, Sobolev gradient identity.
std::vector<ValidationCheck> run_validation();

}  // namespace ccbm
