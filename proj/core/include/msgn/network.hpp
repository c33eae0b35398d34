#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msgn/expr.hpp"
#include "msgn/util.hpp"

namespace msgn {

// State of the hybrid system: concentrations x (continuous scale) and
// copy numbers y (discrete scale). Constructed states must be
// componentwise nonnegative (check_state); simulators may record raw
// states that dip below zero by a jump from the boundary, but every rate
// evaluation clamps x at zero first.
struct HybridState {
  std::vector<double> x;
  std::vector<long long> y;
};

// |z| = |x| + |y|, Euclidean norm on each block.
double state_norm(const HybridState& s);

enum class ReactionClass { Continuous, Discrete };

struct Reaction {
  std::string id;
  ReactionClass cls = ReactionClass::Continuous;
  std::vector<long long> h;  // continuous-stoichiometry, length n
  std::vector<long long> e;  // discrete-stoichiometry, length d (zero for class C)
  ExprPtr rate;
};

// Options for the randomized domain checks run at validation time:
// `samples` states drawn uniformly from [0, x_max]^n x {0..y_max}^d.
struct DomainBox {
  double x_max = 10.0;
  long long y_max = 1;
  int samples = 1000;
  uint64_t seed = 20240901;
};

class ReactionNetwork {
 public:
  ReactionNetwork(std::vector<std::string> continuous_species,
                  std::vector<std::string> discrete_species,
                  std::vector<std::string> param_names, std::vector<double> param_values,
                  std::vector<Reaction> reactions, std::optional<double> rate_bound);

  int n() const { return static_cast<int>(species_x_.size()); }
  int d() const { return static_cast<int>(species_y_.size()); }
  const std::vector<std::string>& continuous_species() const { return species_x_; }
  const std::vector<std::string>& discrete_species() const { return species_y_; }
  const std::vector<std::string>& param_names() const { return param_names_; }
  const std::vector<double>& param_values() const { return param_values_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  std::optional<double> rate_bound() const { return rate_bound_; }

  // Indices (into reactions()) of each class, in declaration order.
  const std::vector<int>& continuous_reactions() const { return continuous_idx_; }
  const std::vector<int>& discrete_reactions() const { return discrete_idx_; }

  int reaction_index(std::string_view id) const;  // throws std::invalid_argument

 private:
  std::vector<std::string> species_x_, species_y_, param_names_;
  std::vector<double> param_values_;
  std::vector<Reaction> reactions_;
  std::optional<double> rate_bound_;
  std::vector<int> continuous_idx_, discrete_idx_;
};

// Parses the line-oriented network description (see docs/formats.md) and
// validates the result: structural invariants always, plus randomized
// nonnegativity / declared-bound checks over `box`.
ReactionNetwork parse_network(std::string_view text, const DomainBox& box = {});

// Emits the same format parse_network reads; parse(serialize(net)) is
// semantically identical to net.
std::string serialize_network(const ReactionNetwork& net);

// Structural plus sampled-domain validation; throws validation_error.
void validate_network(const ReactionNetwork& net, const DomainBox& box = {});

// Throws std::invalid_argument unless s has matching dimensions and
// nonnegative components.
void check_state(const ReactionNetwork& net, const HybridState& s);

// Rate of reaction r at state s, with x clamped at zero before
// evaluation. Both index and id lookups are provided.
double eval_rate(const ReactionNetwork& net, int r, const HybridState& s);
double eval_rate(const ReactionNetwork& net, std::string_view id, const HybridState& s);

// F(s) = sum over continuous reactions of h_r * rate_r(s).
std::vector<double> drift(const ReactionNetwork& net, const HybridState& s);

// Symbolic partial derivatives d rate_r / d x_i, i = 0..n-1.
std::vector<ExprPtr> rate_gradient(const ReactionNetwork& net, int r);
std::vector<ExprPtr> rate_gradient(const ReactionNetwork& net, std::string_view id);

// Jacobian of the drift: entry (i,j) = sum_r h_r^i d rate_r / d x_j.
Mat drift_jacobian(const ReactionNetwork& net, const HybridState& s);

// n x |R_C| matrix with sigma(i,r) = h_r^i sqrt(rate_r(s)); columns follow
// continuous_reactions() order. Throws validation_error on a negative rate.
Mat diffusion_matrix(const ReactionNetwork& net, const HybridState& s);

// Multiplies every rate by the smooth cutoff theta(|z|/k) and declares a
// rate bound estimated by sampling over |z| <= 2k.
ReactionNetwork truncate_rates(const ReactionNetwork& net, double k);

// Allocation-free repeated rate evaluation for simulator inner loops.
// Semantics identical to eval_rate (x clamped at zero). Not thread-safe;
// one instance per simulation.
class RateEvaluator {
 public:
  explicit RateEvaluator(const ReactionNetwork& net)
      : net_(&net), xc_(net.n(), 0.0) {}

  double rate(int r, const HybridState& s) {
    for (int i = 0; i < net_->n(); ++i) xc_[i] = s.x[i] < 0.0 ? 0.0 : s.x[i];
    EvalContext ctx{xc_, s.y, net_->param_values()};
    return eval_expr(*net_->reactions()[r].rate, ctx);
  }

 private:
  const ReactionNetwork* net_;
  std::vector<double> xc_;
};

// Drift jacobian with the symbolic gradients built once up front, for
// per-step use inside the SDE integrator. Not thread-safe.
class DriftJacobianEvaluator {
 public:
  explicit DriftJacobianEvaluator(const ReactionNetwork& net);

  // out must be n x n; overwritten.
  void eval(const HybridState& s, Mat& out);

 private:
  const ReactionNetwork* net_;
  std::vector<double> xc_;
  // gradients indexed [continuous reaction][j]
  std::vector<std::vector<ExprPtr>> grads_;
};

}  // namespace msgn
