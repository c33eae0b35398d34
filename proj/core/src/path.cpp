#include "msgn/path.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace msgn {

std::vector<double> uniform_grid(double T, int intervals) {
  if (!(T > 0.0) || intervals < 1) throw std::invalid_argument("bad grid spec");
  std::vector<double> g(intervals + 1);
  for (int k = 0; k <= intervals; ++k) g[k] = T * static_cast<double>(k) / intervals;
  g.back() = T;
  return g;
}

HybridState PathRecord::state_at(const ReactionNetwork& net, double t) const {
  HybridState s = initial;
  if (scale_n >= 1) {
    const double inv_n = 1.0 / static_cast<double>(scale_n);
    for (const PathEvent& ev : events) {
      if (ev.time > t) break;
      const Reaction& r = net.reactions()[ev.reaction];
      for (int i = 0; i < net.n(); ++i) s.x[i] += static_cast<double>(r.h[i]) * inv_n;
      for (int j = 0; j < net.d(); ++j) s.y[j] += r.e[j];
    }
    return s;
  }
  // flow path: y replays from events, x interpolates between samples
  for (const PathEvent& ev : events) {
    if (ev.time > t) break;
    const Reaction& r = net.reactions()[ev.reaction];
    for (int j = 0; j < net.d(); ++j) s.y[j] += r.e[j];
  }
  if (grid.empty()) return s;
  auto it = std::lower_bound(grid.begin(), grid.end(), t);
  if (it == grid.end()) {
    s.x = states.back().x;
    return s;
  }
  size_t hi = static_cast<size_t>(it - grid.begin());
  if (grid[hi] == t || hi == 0) {
    s.x = states[hi].x;
    return s;
  }
  size_t lo = hi - 1;
  double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
  for (int i = 0; i < net.n(); ++i)
    s.x[i] = (1.0 - w) * states[lo].x[i] + w * states[hi].x[i];
  return s;
}

std::vector<PathEvent> PathRecord::discrete_events(const ReactionNetwork& net) const {
  std::vector<PathEvent> out;
  for (const PathEvent& ev : events)
    if (net.reactions()[ev.reaction].cls == ReactionClass::Discrete) out.push_back(ev);
  return out;
}

void write_path_csv(std::ostream& os, const ReactionNetwork& net, const PathRecord& path,
                    const std::vector<std::string>& header) {
  for (const auto& h : header) os << "# " << h << "\n";
  os << "t";
  for (const auto& s : net.continuous_species()) os << ",x_" << s;
  for (const auto& s : net.discrete_species()) os << ",y_" << s;
  os << ",J_t\n";
  for (size_t k = 0; k < path.grid.size(); ++k) {
    os << format_double(path.grid[k]);
    for (double v : path.states[k].x) os << ',' << format_double(v);
    for (long long v : path.states[k].y) os << ',' << v;
    os << ',' << path.discrete_jumps[k] << "\n";
  }
}

void write_events_csv(std::ostream& os, const ReactionNetwork& net, const PathRecord& path,
                      const std::vector<std::string>& header) {
  for (const auto& h : header) os << "# " << h << "\n";
  os << "s,reaction,u\n";
  for (const PathEvent& ev : path.events) {
    os << format_double(ev.time) << ',' << net.reactions()[ev.reaction].id << ','
       << format_double(ev.u) << "\n";
  }
}

}  // namespace msgn
