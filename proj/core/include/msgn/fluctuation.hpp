#pragma once

#include <cstdint>

#include "msgn/jump_sim.hpp"
#include "msgn/path.hpp"
#include "msgn/pdmp_sim.hpp"

namespace msgn {

// Pathwise decomposition of the rescaled coupled error
//   v(t) = sqrt(N) (X^N(t) - X(t))
// into a compensated-martingale part u, the discrete-reaction
// continuous-displacement part sqrt(N)*gamma, the linearized drift
// integral, and the two Taylor/discrete remainders zeta and xi. All
// per-time arrays are indexed like `grid`; vectors have length n.
//
// u and sqrtn_gamma are exact (event counts and piecewise-constant
// compensators integrate in closed form); drift_integral, zeta and xi
// are trapezoid quadratures of their defining integrands on the grid.
// exact_drift_total stores sqrt(N) * (int F(Z^N) ds - (X(t) - X(0))),
// the exact value the three quadratures must sum to; tests use it to
// bound quadrature error without re-deriving it.
struct FluctuationDecomposition {
  long long N = 0;
  std::vector<double> grid;
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> sqrtn_gamma;
  std::vector<std::vector<double>> drift_integral;
  std::vector<std::vector<double>> zeta;
  std::vector<std::vector<double>> xi;
  std::vector<std::vector<double>> exact_drift_total;
  std::vector<Mat> qv;  // per grid time, n x n joint quadratic variation of u
  PathRecord jump_path;
  PathRecord pdmp_path;
};

struct CoupledOptions {
  JumpSimOptions jump;
  PdmpSimOptions pdmp;
};

// Runs the scaled jump process and the limit process on the same
// (seed, replica) streams and assembles the decomposition on a shared
// uniform grid with `grid_intervals` intervals.
FluctuationDecomposition coupled_fluctuation(const ReactionNetwork& net, long long N,
                                             const HybridState& z0n, const HybridState& z0,
                                             double T, uint64_t seed, uint32_t replica,
                                             int grid_intervals = 256,
                                             const CoupledOptions& options = {});

// [u_i, u_j] at a grid time: accepted continuous-reaction points up to t,
// weighted by h_r^i h_r^j / N.
double quadratic_variation(const FluctuationDecomposition& dec, int i, int j, double t);

// Euler-Maruyama solution of the limiting linear SDE along a simulated
// limit path: v_{k+1} = v_k + J_F(Z(t_k)) v_k dt + sigma(Z(t_k)) dB_k,
// with one independent Brownian driver per continuous reaction.
struct SdePath {
  std::vector<double> grid;
  std::vector<std::vector<double>> v;           // per time, length n
  std::vector<std::vector<double>> brownian;    // per step, one increment per R_C reaction
  std::vector<std::vector<double>> clocks;      // per time, theta_r = int lambda_r(Z) ds
};

SdePath simulate_limit_sde(const ReactionNetwork& net, const PathRecord& zpath,
                           const std::vector<double>& v0, const std::vector<double>& grid,
                           uint64_t seed);

}  // namespace msgn
