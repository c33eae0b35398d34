#pragma once

#include <cstdint>

#include "msgn/ode.hpp"
#include "msgn/path.hpp"

namespace msgn {

struct PdmpSimOptions {
  double ode_rtol = 1e-8;
  double ode_atol = 1e-10;
  // Steps are capped so threshold levels are re-checked often enough that
  // a Lipschitz drift cannot outgrow a freshly doubled level in between.
  double max_step = 0.1;
  long long event_cap = 10'000'000;
  long long candidate_cap = 400'000'000;
  int grid_intervals = 256;
  double lambda0 = 1.0;
};

// Deterministic flow of the drift with y held fixed: returns the state at
// t1 with the x component integrated to the requested tolerance.
HybridState integrate_flow(const ReactionNetwork& net, const HybridState& s0, double t0,
                           double t1, double rtol = 1e-8, double atol = 1e-10);

// The limiting hybrid process: x follows the drift flow, y jumps when a
// point (s, u) of stream(seed, replica, r) — the identical streams the
// scaled jump simulation reads for discrete reactions — satisfies
// u <= mu_r(Z(s-)). Accepted jumps move y by e_r and leave x untouched.
PathRecord simulate_pdmp(const ReactionNetwork& net, const HybridState& z0, double T,
                         uint64_t seed, uint32_t replica, const PdmpSimOptions& options = {});

}  // namespace msgn
