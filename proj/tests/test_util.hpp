#pragma once

#include <random>
#include <string>

#include "msgn/network.hpp"

namespace testutil {

inline const char* telegraph_source() {
  return R"(
species continuous: P
species discrete: G

param k1 = 2.0
param k2 = 1.0
param a = 0.5
param b = 1.0

reaction prod class=C h=[+1] e=[0] rate = k1*G
reaction deg  class=C h=[-1] e=[0] rate = k2*P
reaction on   class=D h=[0] e=[+1] rate = a*(1-G)
reaction off  class=D h=[0] e=[-1] rate = b*G
)";
}

inline msgn::ReactionNetwork telegraph() { return msgn::parse_network(telegraph_source()); }

// Telegraph with activation feedback from the protein level.
inline msgn::ReactionNetwork telegraph_xdep() {
  return msgn::parse_network(R"(
species continuous: P
species discrete: G
param k1 = 2.0
param k2 = 1.0
param a = 0.5
param b = 1.0
reaction prod class=C h=[+1] e=[0] rate = k1*G
reaction deg  class=C h=[-1] e=[0] rate = k2*P
reaction on   class=D h=[0] e=[+1] rate = a*(1+0.1*P)*(1-G)
reaction off  class=D h=[0] e=[-1] rate = b*G
)");
}

// Single continuous species born at constant unit rate; empty discrete scale.
inline msgn::ReactionNetwork pure_birth() {
  return msgn::parse_network(R"(
species continuous: X
species discrete:
reaction birth class=C h=[+1] e=[] rate = 1.0
)");
}

// Discrete reaction that also displaces the continuous scale (h and e both
// nonzero), so the gamma term of the decomposition is exercised.
inline msgn::ReactionNetwork burst_network() {
  return msgn::parse_network(R"(
species continuous: P
species discrete: G
param k1 = 2.0
param k2 = 1.0
param a = 0.5
param b = 1.0
reaction prod  class=C h=[+1] e=[0] rate = k1*G
reaction deg   class=C h=[-1] e=[0] rate = k2*P
reaction bon   class=D h=[+2] e=[+1] rate = a*(1-G)
reaction boff  class=D h=[0]  e=[-1] rate = b*G
)");
}

// Two constant-rate continuous reactions: F = 1, grad F = 0,
// sigma = [sqrt(2), -1].
inline msgn::ReactionNetwork constant_rates() {
  return msgn::parse_network(R"(
species continuous: X
species discrete:
reaction up   class=C h=[+1] e=[] rate = 2.0
reaction down class=C h=[-1] e=[] rate = 1.0
)");
}

inline msgn::HybridState state(std::vector<double> x, std::vector<long long> y) {
  return msgn::HybridState{std::move(x), std::move(y)};
}

// random states in (0, 10]^n x {0..5}^d
inline msgn::HybridState random_state(const msgn::ReactionNetwork& net, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> ux(1e-6, 10.0);
  std::uniform_int_distribution<long long> uy(0, 5);
  msgn::HybridState s;
  s.x.resize(net.n());
  s.y.resize(net.d());
  for (auto& v : s.x) v = ux(gen);
  for (auto& v : s.y) v = uy(gen);
  return s;
}

}  // namespace testutil
