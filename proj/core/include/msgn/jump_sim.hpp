#pragma once

#include <cstdint>

#include "msgn/path.hpp"
#include "msgn/prm.hpp"

namespace msgn {

struct JumpSimOptions {
  long long event_cap = 10'000'000;        // accepted jumps
  long long candidate_cap = 400'000'000;   // examined points (backstop)
  int grid_intervals = 256;
  double lambda0 = 1.0;
};

// Exact realization of the scaled jump process on [0, T]: every reaction
// r reads its own stream(seed, replica, id); a point (s, u) of that
// stream is accepted iff u <= N * lambda_r(Z(s-)) for the continuous
// class, or u <= mu_r(Z(s-)) for the discrete class. Accepted continuous
// points move x by h_r / N; accepted discrete points move (x, y) by
// (h_r / N, e_r). Between points the state is constant.
//
// Thinning levels: when the network declares a bound L the level starts
// at N*L (continuous) / L (discrete); otherwise at twice the current
// threshold. Either way the level doubles whenever a threshold crosses
// half of it, which keeps every threshold strictly below its level —
// strip consistency of the stream makes the raise lossless.
PathRecord simulate_scaled(const ReactionNetwork& net, long long N, const HybridState& z0,
                           double T, uint64_t seed, uint32_t replica,
                           const JumpSimOptions& options = {});

}  // namespace msgn
