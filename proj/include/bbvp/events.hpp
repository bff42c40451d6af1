#pragma once

#include <vector>

#include "bbvp/domain.hpp"

namespace bbvp {

/// One boundary hit. `axes` lists the coordinates sitting on a face at the
/// hit; velocity components on those axes flip, the rest pass through.
struct ImpactEvent {
  double time = 0.0;
  Vec point;
  std::vector<int> axes;
  Vec v_pre;
  Vec v_post;

  int multiplicity() const { return static_cast<int>(axes.size()); }
};

}  // namespace bbvp
