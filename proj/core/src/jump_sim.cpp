#include "msgn/jump_sim.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "msgn/errors.hpp"

namespace msgn {

namespace {

struct ReactionDriver {
  std::unique_ptr<PrmStream> stream;
  std::unique_ptr<PrmCursor> cursor;
  bool continuous = false;
  std::vector<double> jump_x;  // h_r / N
  const std::vector<long long>* jump_y = nullptr;
};

}  // namespace

PathRecord simulate_scaled(const ReactionNetwork& net, long long N, const HybridState& z0,
                           double T, uint64_t seed, uint32_t replica,
                           const JumpSimOptions& options) {
  if (N < 1) throw std::invalid_argument("N must be a positive integer");
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  check_state(net, z0);

  const int n = net.n();
  const int nr = static_cast<int>(net.reactions().size());
  const double scale = static_cast<double>(N);

  PathRecord path;
  path.scale_n = N;
  path.initial = z0;
  path.grid = uniform_grid(T, options.grid_intervals);
  path.states.reserve(path.grid.size());
  path.discrete_jumps.reserve(path.grid.size());
  path.jumps_per_reaction.assign(nr, 0);

  HybridState state = z0;
  RateEvaluator rates(net);

  // threshold(r) = N * lambda_r for the continuous class, mu_r otherwise
  auto threshold = [&](int r) {
    double rate = rates.rate(r, state);
    return net.reactions()[r].cls == ReactionClass::Continuous ? scale * rate : rate;
  };

  std::vector<ReactionDriver> drivers(nr);
  for (int r = 0; r < nr; ++r) {
    const Reaction& rx = net.reactions()[r];
    ReactionDriver& drv = drivers[r];
    drv.continuous = rx.cls == ReactionClass::Continuous;
    drv.jump_x.resize(n);
    for (int i = 0; i < n; ++i) drv.jump_x[i] = static_cast<double>(rx.h[i]) / scale;
    drv.jump_y = &rx.e;
    drv.stream = std::make_unique<PrmStream>(seed, replica, rx.id, options.lambda0);
    double level = 2.0 * threshold(r);
    if (net.rate_bound())
      level = std::max(level, drv.continuous ? scale * *net.rate_bound() : *net.rate_bound());
    drv.cursor = std::make_unique<PrmCursor>(*drv.stream, 0.0, level, T);
  }

  auto refresh_levels = [&](double now) {
    for (int r = 0; r < nr; ++r) {
      double thr = threshold(r);
      if (thr > 0.5 * drivers[r].cursor->level())
        drivers[r].cursor->raise_level(2.0 * thr, now);
    }
  };

  long long accepted = 0;
  long long candidates = 0;
  long long discrete_count = 0;
  size_t next_grid = 0;

  auto record_grid_until = [&](double t_exclusive) {
    while (next_grid < path.grid.size() && path.grid[next_grid] < t_exclusive) {
      path.states.push_back(state);
      path.discrete_jumps.push_back(discrete_count);
      ++next_grid;
    }
  };

  for (;;) {
    // earliest pending candidate across reactions; ties (probability
    // zero) go to the lowest lexicographic reaction id
    int best = -1;
    PrmPoint bp{};
    for (int r = 0; r < nr; ++r) {
      auto p = drivers[r].cursor->peek();
      if (!p) continue;
      if (best < 0 || p->s < bp.s ||
          (p->s == bp.s && net.reactions()[r].id < net.reactions()[best].id)) {
        best = r;
        bp = *p;
      }
    }
    if (best < 0 || bp.s > T) break;

    if (++candidates > options.candidate_cap)
      throw cap_error("candidate-point safety cap exceeded (suspected explosion)");

    record_grid_until(bp.s);

    if (bp.u <= threshold(best)) {
      ReactionDriver& drv = drivers[best];
      for (int i = 0; i < n; ++i) state.x[i] += drv.jump_x[i];
      for (int j = 0; j < net.d(); ++j) state.y[j] += (*drv.jump_y)[j];
      path.events.push_back({bp.s, best, bp.u});
      path.jumps_per_reaction[best]++;
      if (!drv.continuous) ++discrete_count;
      if (++accepted > options.event_cap)
        throw cap_error("accepted-event safety cap exceeded (suspected explosion)");
      drv.cursor->pop();
      refresh_levels(bp.s);
    } else {
      drivers[best].cursor->pop();
    }

    // a grid time equal to the event time takes the post-jump value
    while (next_grid < path.grid.size() && path.grid[next_grid] == bp.s) {
      path.states.push_back(state);
      path.discrete_jumps.push_back(discrete_count);
      ++next_grid;
    }
  }

  record_grid_until(std::numeric_limits<double>::infinity());
  return path;
}

}  // namespace msgn
