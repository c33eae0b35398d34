#include "msgn/pdmp_sim.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "msgn/errors.hpp"
#include "msgn/prm.hpp"

namespace msgn {

namespace {

// drift field reading the live discrete state; x passes through the same
// clamp as every rate evaluation
struct DriftField {
  const ReactionNetwork* net;
  const std::vector<long long>* y_live;
  RateEvaluator rates;
  HybridState scratch;

  DriftField(const ReactionNetwork& network, const HybridState& proto,
             const std::vector<long long>* y)
      : net(&network), y_live(y), rates(network), scratch(proto) {}

  void operator()(const std::vector<double>& x, std::vector<double>& dxdt) {
    scratch.x = x;
    scratch.y = *y_live;
    std::fill(dxdt.begin(), dxdt.end(), 0.0);
    for (int r : net->continuous_reactions()) {
      double lam = rates.rate(r, scratch);
      const auto& h = net->reactions()[r].h;
      for (size_t i = 0; i < h.size(); ++i) dxdt[i] += static_cast<double>(h[i]) * lam;
    }
  }
};

}  // namespace

HybridState integrate_flow(const ReactionNetwork& net, const HybridState& s0, double t0,
                           double t1, double rtol, double atol) {
  if (t1 < t0) throw std::invalid_argument("t1 must not precede t0");
  if (static_cast<int>(s0.x.size()) != net.n() || static_cast<int>(s0.y.size()) != net.d())
    throw std::invalid_argument("state dimensions do not match the network");
  HybridState out = s0;
  if (t1 == t0 || net.n() == 0) return out;
  OdeOptions opts;
  opts.rtol = rtol;
  opts.atol = atol;
  DormandPrince rk(net.n(), opts);
  DriftField field(net, s0, &out.y);
  rk.integrate([&](double, const std::vector<double>& x,
                   std::vector<double>& d) { field(x, d); },
               out.x, t0, t1);
  return out;
}

PathRecord simulate_pdmp(const ReactionNetwork& net, const HybridState& z0, double T,
                         uint64_t seed, uint32_t replica, const PdmpSimOptions& options) {
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  check_state(net, z0);

  const int nr = static_cast<int>(net.reactions().size());
  const auto& disc = net.discrete_reactions();

  PathRecord path;
  path.scale_n = 0;
  path.initial = z0;
  path.grid = uniform_grid(T, options.grid_intervals);
  path.states.reserve(path.grid.size());
  path.discrete_jumps.reserve(path.grid.size());
  path.jumps_per_reaction.assign(nr, 0);

  HybridState state = z0;
  RateEvaluator rates(net);

  struct Driver {
    int reaction;
    std::unique_ptr<PrmStream> stream;
    std::unique_ptr<PrmCursor> cursor;
  };
  std::vector<Driver> drivers;
  drivers.reserve(disc.size());
  for (int r : disc) {
    Driver d;
    d.reaction = r;
    d.stream = std::make_unique<PrmStream>(seed, replica, net.reactions()[r].id,
                                           options.lambda0);
    double level = 2.0 * rates.rate(r, state);
    if (net.rate_bound()) level = std::max(level, *net.rate_bound());
    d.cursor = std::make_unique<PrmCursor>(*d.stream, 0.0, level, T);
    drivers.push_back(std::move(d));
  }

  auto refresh_levels = [&](double now) {
    for (auto& d : drivers) {
      double mu = rates.rate(d.reaction, state);
      if (mu > 0.5 * d.cursor->level()) d.cursor->raise_level(2.0 * mu, now);
    }
  };

  OdeOptions ode_opts;
  ode_opts.rtol = options.ode_rtol;
  ode_opts.atol = options.ode_atol;
  ode_opts.max_step = options.max_step;
  DormandPrince rk(std::max(net.n(), 1), ode_opts);
  DriftField field(net, state, &state.y);
  auto f = [&](double, const std::vector<double>& x, std::vector<double>& d) { field(x, d); };

  const double inf = std::numeric_limits<double>::infinity();
  long long accepted = 0;
  long long candidates = 0;
  long long discrete_count = 0;
  size_t next_grid = 0;
  double t = 0.0;

  // Single loop over stop points: the earliest of (pending candidate,
  // next grid time, horizon). Flow advances one accepted RK step at a
  // time toward the current stop; endpoint level refreshes may expose a
  // nearer candidate, so the stop is re-derived after every step.
  for (;;) {
    int best = -1;
    PrmPoint bp{};
    for (size_t i = 0; i < drivers.size(); ++i) {
      auto p = drivers[i].cursor->peek();
      if (!p || p->s > T) continue;
      if (best < 0 || p->s < bp.s ||
          (p->s == bp.s && net.reactions()[drivers[i].reaction].id <
                               net.reactions()[drivers[best].reaction].id)) {
        best = static_cast<int>(i);
        bp = *p;
      }
    }
    const double s_cand = best >= 0 ? bp.s : inf;
    const double g = next_grid < path.grid.size() ? path.grid[next_grid] : inf;
    const double stop = std::min({s_cand, g, T});

    if (t < stop) {
      if (net.n() == 0) {
        t = stop;
      } else {
        t = rk.step(f, t, state.x, stop);
        refresh_levels(t);
      }
      continue;
    }

    if (best >= 0 && s_cand <= g) {
      if (++candidates > options.candidate_cap)
        throw cap_error("candidate-point safety cap exceeded (suspected explosion)");
      int r = drivers[best].reaction;
      double mu = rates.rate(r, state);  // left limit: x(s), y before the jump
      if (bp.u <= mu) {
        const Reaction& rx = net.reactions()[r];
        for (int j = 0; j < net.d(); ++j) state.y[j] += rx.e[j];
        path.events.push_back({bp.s, r, bp.u});
        path.jumps_per_reaction[r]++;
        ++discrete_count;
        if (++accepted > options.event_cap)
          throw cap_error("accepted-event safety cap exceeded (suspected explosion)");
        drivers[best].cursor->pop();
        refresh_levels(bp.s);
      } else {
        drivers[best].cursor->pop();
      }
      continue;
    }

    if (g <= T) {
      path.states.push_back(state);
      path.discrete_jumps.push_back(discrete_count);
      ++next_grid;
      continue;
    }
    break;
  }

  return path;
}

}  // namespace msgn
