#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "msgn/network.hpp"

namespace msgn {

struct PathEvent {
  double time = 0.0;  // the accepted point's time coordinate s
  int reaction = 0;   // index into ReactionNetwork::reactions()
  double u = 0.0;     // the accepted point's level coordinate
};

// A cadlag trajectory: exact accepted jump events plus dense samples on a
// uniform grid. For jump paths (scale_n >= 1) the state at any time is a
// pure function of the initial state and the events; for flow paths
// (scale_n == 0) the grid carries the integrated continuous component.
struct PathRecord {
  long long scale_n = 0;  // N for the scaled jump process, 0 for the flow process
  HybridState initial;
  std::vector<double> grid;
  std::vector<HybridState> states;            // state at each grid time (right limit)
  std::vector<PathEvent> events;              // strictly increasing times
  std::vector<long long> jumps_per_reaction;  // accepted counts per reaction index
  std::vector<long long> discrete_jumps;      // discrete-class jump count at grid times

  double horizon() const { return grid.empty() ? 0.0 : grid.back(); }

  // State just after time t. Jump paths replay events exactly; flow paths
  // interpolate x linearly between grid samples and replay y from events.
  HybridState state_at(const ReactionNetwork& net, double t) const;

  // Discrete-class events only, in order (used for path-equality checks).
  std::vector<PathEvent> discrete_events(const ReactionNetwork& net) const;
};

std::vector<double> uniform_grid(double T, int intervals);

// CSV emission. `header` lines are written first, each prefixed "# ".
void write_path_csv(std::ostream& os, const ReactionNetwork& net, const PathRecord& path,
                    const std::vector<std::string>& header);
void write_events_csv(std::ostream& os, const ReactionNetwork& net, const PathRecord& path,
                      const std::vector<std::string>& header);

}  // namespace msgn
