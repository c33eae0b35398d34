#include "msgn/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msgn/errors.hpp"
#include "msgn/rng.hpp"

namespace msgn {

namespace {

// Exact per-grid-time accumulators over the jump path: accepted counts
// per reaction, the compensator integrals int N*lambda_r(Z^N(s)) ds
// (the integrand is piecewise constant between events, so the integral
// is a finite sum), and int F(Z^N(s)) ds.
struct JumpPathAccumulators {
  // indexed [grid][reaction]
  std::vector<std::vector<long long>> counts;
  std::vector<std::vector<double>> compensator;
  // indexed [grid][i]
  std::vector<std::vector<double>> int_drift;
};

JumpPathAccumulators accumulate_jump_path(const ReactionNetwork& net, const PathRecord& jp) {
  const int nr = static_cast<int>(net.reactions().size());
  const int n = net.n();
  const double scale = static_cast<double>(jp.scale_n);
  JumpPathAccumulators acc;
  acc.counts.assign(jp.grid.size(), std::vector<long long>(nr, 0));
  acc.compensator.assign(jp.grid.size(), std::vector<double>(nr, 0.0));
  acc.int_drift.assign(jp.grid.size(), std::vector<double>(n, 0.0));

  RateEvaluator rates(net);
  HybridState state = jp.initial;
  std::vector<long long> counts(nr, 0);
  std::vector<double> comp(nr, 0.0);
  std::vector<double> int_f(n, 0.0);
  std::vector<double> thresholds(nr, 0.0);
  std::vector<double> f(n, 0.0);

  auto recompute = [&] {
    for (int r = 0; r < nr; ++r) {
      double rate = rates.rate(r, state);
      thresholds[r] =
          net.reactions()[r].cls == ReactionClass::Continuous ? scale * rate : rate;
    }
    auto fd = drift(net, state);
    std::copy(fd.begin(), fd.end(), f.begin());
  };
  recompute();

  double t = 0.0;
  size_t next_event = 0;
  auto advance_to = [&](double target) {
    double dt = target - t;
    if (dt > 0.0) {
      for (int r = 0; r < nr; ++r) comp[r] += thresholds[r] * dt;
      for (int i = 0; i < n; ++i) int_f[i] += f[i] * dt;
      t = target;
    }
  };

  for (size_t g = 0; g < jp.grid.size(); ++g) {
    const double tg = jp.grid[g];
    while (next_event < jp.events.size() && jp.events[next_event].time <= tg) {
      const PathEvent& ev = jp.events[next_event];
      advance_to(ev.time);
      const Reaction& rx = net.reactions()[ev.reaction];
      for (int i = 0; i < n; ++i) state.x[i] += static_cast<double>(rx.h[i]) / scale;
      for (int j = 0; j < net.d(); ++j) state.y[j] += rx.e[j];
      counts[ev.reaction]++;
      recompute();
      ++next_event;
    }
    advance_to(tg);
    acc.counts[g] = counts;
    acc.compensator[g] = comp;
    acc.int_drift[g] = int_f;
  }
  return acc;
}

}  // namespace

FluctuationDecomposition coupled_fluctuation(const ReactionNetwork& net, long long N,
                                             const HybridState& z0n, const HybridState& z0,
                                             double T, uint64_t seed, uint32_t replica,
                                             int grid_intervals,
                                             const CoupledOptions& options) {
  const int n = net.n();
  const double sqrt_n = std::sqrt(static_cast<double>(N));

  JumpSimOptions jopts = options.jump;
  jopts.grid_intervals = grid_intervals;
  PdmpSimOptions popts = options.pdmp;
  popts.grid_intervals = grid_intervals;

  FluctuationDecomposition dec;
  dec.N = N;
  dec.jump_path = simulate_scaled(net, N, z0n, T, seed, replica, jopts);
  dec.pdmp_path = simulate_pdmp(net, z0, T, seed, replica, popts);
  dec.grid = dec.jump_path.grid;

  const size_t G = dec.grid.size();
  auto acc = accumulate_jump_path(net, dec.jump_path);

  dec.v.assign(G, std::vector<double>(n, 0.0));
  dec.u.assign(G, std::vector<double>(n, 0.0));
  dec.sqrtn_gamma.assign(G, std::vector<double>(n, 0.0));
  dec.drift_integral.assign(G, std::vector<double>(n, 0.0));
  dec.zeta.assign(G, std::vector<double>(n, 0.0));
  dec.xi.assign(G, std::vector<double>(n, 0.0));
  dec.exact_drift_total.assign(G, std::vector<double>(n, 0.0));
  dec.qv.assign(G, Mat(n, n));

  // per-time integrands for the three quadrature terms
  std::vector<double> drift_integrand(n), zeta_integrand(n), xi_integrand(n);
  std::vector<double> drift_prev(n, 0.0), zeta_prev(n, 0.0), xi_prev(n, 0.0);

  HybridState mixed;  // (X(s), Y^N(s))
  mixed.x.resize(n);
  mixed.y.resize(net.d());

  for (size_t g = 0; g < G; ++g) {
    const HybridState& zn = dec.jump_path.states[g];
    const HybridState& z = dec.pdmp_path.states[g];

    for (int i = 0; i < n; ++i) dec.v[g][i] = sqrt_n * (zn.x[i] - z.x[i]);

    // u = sqrt(N) * sum_{r in R_C} (h_r / N) (count_r - compensator_r)
    for (int r : net.continuous_reactions()) {
      const Reaction& rx = net.reactions()[r];
      double centered = static_cast<double>(acc.counts[g][r]) - acc.compensator[g][r];
      for (int i = 0; i < n; ++i)
        dec.u[g][i] += sqrt_n * static_cast<double>(rx.h[i]) / static_cast<double>(N) * centered;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          dec.qv[g](i, j) += static_cast<double>(rx.h[i]) * static_cast<double>(rx.h[j]) /
                             static_cast<double>(N) * static_cast<double>(acc.counts[g][r]);
    }

    // sqrt(N) * gamma = sqrt(N) * sum_{r in R_D} (h_r / N) count_r
    for (int r : net.discrete_reactions()) {
      const Reaction& rx = net.reactions()[r];
      for (int i = 0; i < n; ++i)
        dec.sqrtn_gamma[g][i] += sqrt_n * static_cast<double>(rx.h[i]) /
                                 static_cast<double>(N) *
                                 static_cast<double>(acc.counts[g][r]);
    }

    // integrands at this grid time
    mixed.x = z.x;
    mixed.y = zn.y;
    Mat jac = drift_jacobian(net, mixed);
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += jac(i, j) * dec.v[g][j];
      drift_integrand[i] = dot;
    }
    auto f_mixed = drift(net, mixed);
    auto f_jump = drift(net, zn);
    auto f_limit = drift(net, z);
    for (int i = 0; i < n; ++i) {
      zeta_integrand[i] = sqrt_n * (f_jump[i] - f_mixed[i]) - drift_integrand[i];
      xi_integrand[i] = sqrt_n * (f_mixed[i] - f_limit[i]);
    }

    if (g > 0) {
      double dt = dec.grid[g] - dec.grid[g - 1];
      for (int i = 0; i < n; ++i) {
        dec.drift_integral[g][i] = dec.drift_integral[g - 1][i] +
                                   0.5 * dt * (drift_prev[i] + drift_integrand[i]);
        dec.zeta[g][i] = dec.zeta[g - 1][i] + 0.5 * dt * (zeta_prev[i] + zeta_integrand[i]);
        dec.xi[g][i] = dec.xi[g - 1][i] + 0.5 * dt * (xi_prev[i] + xi_integrand[i]);
      }
    }
    drift_prev = drift_integrand;
    zeta_prev = zeta_integrand;
    xi_prev = xi_integrand;

    // exact value of (drift_integral + zeta + xi): sqrt(N) times the
    // difference between int F(Z^N) ds (exact) and X(t) - X(0) (flow)
    for (int i = 0; i < n; ++i)
      dec.exact_drift_total[g][i] =
          sqrt_n * (acc.int_drift[g][i] - (z.x[i] - dec.pdmp_path.initial.x[i]));
  }
  return dec;
}

double quadratic_variation(const FluctuationDecomposition& dec, int i, int j, double t) {
  const int n = dec.qv.empty() ? 0 : dec.qv.front().rows;
  if (i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("index out of range");
  auto it = std::lower_bound(dec.grid.begin(), dec.grid.end(), t);
  if (it == dec.grid.end() || *it != t)
    throw std::invalid_argument("t is not a grid time");
  return dec.qv[static_cast<size_t>(it - dec.grid.begin())](i, j);
}

SdePath simulate_limit_sde(const ReactionNetwork& net, const PathRecord& zpath,
                           const std::vector<double>& v0, const std::vector<double>& grid,
                           uint64_t seed) {
  const int n = net.n();
  if (static_cast<int>(v0.size()) != n) throw std::invalid_argument("v0 has wrong length");
  if (grid.size() < 2) throw std::invalid_argument("grid needs at least two times");
  if (zpath.horizon() < grid.back() - 1e-12)
    throw std::invalid_argument("limit path does not cover the grid");
  for (double v : v0)
    if (!std::isfinite(v)) throw std::invalid_argument("v0 must be finite");

  const auto& cont = net.continuous_reactions();
  const int rc = static_cast<int>(cont.size());

  SdePath out;
  out.grid = grid;
  out.v.assign(grid.size(), std::vector<double>(n, 0.0));
  out.brownian.assign(grid.size() - 1, std::vector<double>(rc, 0.0));
  out.clocks.assign(grid.size(), std::vector<double>(rc, 0.0));
  out.v[0] = v0;

  // one driver stream per continuous reaction
  std::vector<rng::KeyedStream> drivers;
  drivers.reserve(rc);
  for (int c = 0; c < rc; ++c)
    drivers.emplace_back(rng::combine(rng::combine(seed, 0x5de5deULL), static_cast<uint64_t>(c)));

  std::vector<double> lambda_prev(rc, 0.0), lambda_cur(rc, 0.0);
  RateEvaluator rates(net);
  DriftJacobianEvaluator jac_eval(net);
  Mat jac(n, n);

  // incremental read of the limit path (grid times are nondecreasing)
  HybridState z = zpath.initial;
  size_t z_grid = 0;
  size_t z_event = 0;
  auto read_path_at = [&](double t) {
    while (z_event < zpath.events.size() && zpath.events[z_event].time <= t) {
      const Reaction& rx = net.reactions()[zpath.events[z_event].reaction];
      for (int j = 0; j < net.d(); ++j) z.y[j] += rx.e[j];
      ++z_event;
    }
    while (z_grid + 1 < zpath.grid.size() && zpath.grid[z_grid + 1] <= t) ++z_grid;
    if (zpath.grid[z_grid] == t || z_grid + 1 >= zpath.grid.size()) {
      z.x = zpath.states[z_grid].x;
    } else {
      double w = (t - zpath.grid[z_grid]) / (zpath.grid[z_grid + 1] - zpath.grid[z_grid]);
      for (int i = 0; i < n; ++i)
        z.x[i] = (1.0 - w) * zpath.states[z_grid].x[i] + w * zpath.states[z_grid + 1].x[i];
    }
  };
  read_path_at(grid[0]);
  for (int c = 0; c < rc; ++c) lambda_prev[c] = rates.rate(cont[c], z);

  std::vector<double> vk = v0;
  std::vector<double> vnext(n, 0.0);
  for (size_t k = 0; k + 1 < grid.size(); ++k) {
    const double dt = grid[k + 1] - grid[k];
    const double root_dt = std::sqrt(dt);

    jac_eval.eval(z, jac);

    for (int c = 0; c < rc; ++c) out.brownian[k][c] = root_dt * drivers[c].next_normal();

    for (int i = 0; i < n; ++i) {
      double drift_part = 0.0;
      for (int j = 0; j < n; ++j) drift_part += jac(i, j) * vk[j];
      double noise_part = 0.0;
      for (int c = 0; c < rc; ++c) {
        // sigma(i, c) = h_c^i sqrt(lambda_c(Z(t_k)))
        double lam = lambda_prev[c];
        if (lam < 0.0) throw validation_error("negative rate along the limit path");
        noise_part += static_cast<double>(net.reactions()[cont[c]].h[i]) *
                      std::sqrt(lam) * out.brownian[k][c];
      }
      vnext[i] = vk[i] + drift_part * dt + noise_part;
      if (std::abs(vnext[i]) > 1e12)
        throw integrator_error("fluctuation SDE diverged (grid too coarse for the drift)");
    }
    vk = vnext;
    out.v[k + 1] = vk;

    read_path_at(grid[k + 1]);
    for (int c = 0; c < rc; ++c) lambda_cur[c] = rates.rate(cont[c], z);
    for (int c = 0; c < rc; ++c)
      out.clocks[k + 1][c] =
          out.clocks[k][c] + 0.5 * dt * (lambda_prev[c] + lambda_cur[c]);
    lambda_prev = lambda_cur;
  }
  return out;
}

}  // namespace msgn
