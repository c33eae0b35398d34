#include "msgn/ode.hpp"

#include <algorithm>
#include <cmath>

#include "msgn/errors.hpp"

namespace msgn {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

DormandPrince::DormandPrince(int dim, OdeOptions opts) : dim_(dim), opts_(opts) {
  for (auto& k : k_) k.resize(dim);
  tmp_.resize(dim);
  x5_.resize(dim);
  x4_.resize(dim);
}

double DormandPrince::step(const Field& f, double t, std::vector<double>& x, double t_end) {
  if (t_end <= t) return t;
  if (h_ <= 0.0) h_ = std::min(opts_.max_step, (t_end - t) * 0.1 + 1e-10);

  const double min_step = opts_.min_step_factor * (std::abs(t) + 1.0);
  for (;;) {
    double h = std::min({h_, opts_.max_step, t_end - t});
    f(t, x, k_[0]);
    for (int i = 0; i < dim_; ++i) tmp_[i] = x[i] + h * a21 * k_[0][i];
    f(t + c2 * h, tmp_, k_[1]);
    for (int i = 0; i < dim_; ++i) tmp_[i] = x[i] + h * (a31 * k_[0][i] + a32 * k_[1][i]);
    f(t + c3 * h, tmp_, k_[2]);
    for (int i = 0; i < dim_; ++i)
      tmp_[i] = x[i] + h * (a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]);
    f(t + c4 * h, tmp_, k_[3]);
    for (int i = 0; i < dim_; ++i)
      tmp_[i] = x[i] + h * (a51 * k_[0][i] + a52 * k_[1][i] + a53 * k_[2][i] + a54 * k_[3][i]);
    f(t + c5 * h, tmp_, k_[4]);
    for (int i = 0; i < dim_; ++i)
      tmp_[i] = x[i] + h * (a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] +
                            a64 * k_[3][i] + a65 * k_[4][i]);
    f(t + h, tmp_, k_[5]);
    for (int i = 0; i < dim_; ++i)
      x5_[i] = x[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] +
                           b6 * k_[5][i]);
    f(t + h, x5_, k_[6]);
    for (int i = 0; i < dim_; ++i)
      x4_[i] = x[i] + h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                           e6 * k_[5][i] + e7 * k_[6][i]);

    if (!all_finite(x5_)) {
      h_ = h * 0.25;
      if (h_ < min_step) throw integrator_error("flow integration produced non-finite state");
      continue;
    }

    double err = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double scale = opts_.atol + opts_.rtol * std::max(std::abs(x[i]), std::abs(x5_[i]));
      double d = (x5_[i] - x4_[i]) / scale;
      err += d * d;
    }
    err = std::sqrt(err / std::max(dim_, 1));

    if (err <= 1.0) {
      x = x5_;
      double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h_ = std::min(h * grow, opts_.max_step);
      return t + h;
    }
    h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    if (h_ < min_step)
      throw integrator_error("flow integrator step-size underflow (stiff or singular field)");
  }
}

void DormandPrince::integrate(const Field& f, std::vector<double>& x, double t0, double t1) {
  double t = t0;
  while (t < t1) t = step(f, t, x, t1);
}

}  // namespace msgn
