#ifndef REFPLAN_GRID_HPP
#define REFPLAN_GRID_HPP

#include <stdexcept>

namespace refplan {

// Uniform time grid over [0, horizon_T] with nodes_M nodes.
struct TimeGrid {
  double horizon_T = 50.0;
  int nodes_M = 60;

  double dt() const { return horizon_T / (nodes_M - 1); }
  double time(int i) const { return i * dt(); }

  void validate() const {
    if (!(horizon_T > 0.0)) throw std::invalid_argument("horizon_T must be > 0");
    if (nodes_M < 3) throw std::invalid_argument("grid needs at least 3 nodes");
  }
};

}  // namespace refplan

#endif  // REFPLAN_GRID_HPP
