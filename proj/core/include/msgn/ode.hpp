#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace msgn {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step_factor = 1e-14;  // underflow threshold relative to |t|+1
};

// Explicit embedded Runge-Kutta 5(4) pair (Dormand-Prince) with standard
// proportional step control. The field is autonomous-in-y but may read t.
class DormandPrince {
 public:
  using Field = std::function<void(double t, const std::vector<double>& x,
                                   std::vector<double>& dxdt)>;

  DormandPrince(int dim, OdeOptions opts);

  // Advances (t, x) by one accepted adaptive step toward t_end (never
  // past it) and returns the new t. Throws integrator_error on step-size
  // underflow or non-finite state.
  double step(const Field& f, double t, std::vector<double>& x, double t_end);

  // Integrates from t0 to t1 exactly.
  void integrate(const Field& f, std::vector<double>& x, double t0, double t1);

 private:
  int dim_;
  OdeOptions opts_;
  double h_ = 0.0;  // persisted step-size guess
  std::vector<double> k_[7];
  std::vector<double> tmp_, x5_, x4_;
};

}  // namespace msgn
