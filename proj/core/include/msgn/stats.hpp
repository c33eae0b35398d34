#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msgn/fluctuation.hpp"
#include "msgn/network.hpp"

namespace msgn::stats {

// ---------- distribution tails ----------

// Survival function of the asymptotic Kolmogorov distribution,
// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2), with the
// theta-transformed series on the small-x side.
double kolmogorov_sf(double x);

// Regularized upper incomplete gamma Q(a, x) (series / continued
// fraction split at x = a + 1).
double regularized_gamma_q(double a, double x);

double chi_square_sf(double x, int df);
double normal_cdf(double x);

// ---------- goodness of fit ----------

struct GofResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

// Chi-square against Poisson(mu) with known mu; bins pooled to expected
// count >= 5, df = bins - 1. Requires >= 20 samples.
GofResult gof_poisson(std::span<const long long> samples, double mu);

// One-sample Kolmogorov-Smirnov tests with asymptotic p-values.
GofResult gof_exponential(std::span<const double> samples, double rate);
GofResult gof_normal(std::span<const double> samples, double mean, double variance);

GofResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct Law {
  enum class Kind { Poisson, Exponential, Normal };
  Kind kind;
  double p1 = 0.0;  // mu / rate / mean
  double p2 = 0.0;  // variance (normal only)
  static Law poisson(double mu) { return {Kind::Poisson, mu, 0.0}; }
  static Law exponential(double rate) { return {Kind::Exponential, rate, 0.0}; }
  static Law normal(double mean, double variance) { return {Kind::Normal, mean, variance}; }
};

// Generic entry point; Poisson samples are rounded from the doubles.
GofResult gof_test(std::span<const double> samples, const Law& law);

// ---------- estimators ----------

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample std / sqrt(count)
};
MeanSe mean_se(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};
WilsonInterval wilson_interval(long long successes, long long trials, double z = 1.96);

struct SlopeFit {
  bool defined = false;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_half_width = 0.0;  // 95%, Student-t on m-2 dof
};
// Least squares on (log N, log mean); undefined when fewer than two
// strictly positive means are available.
SlopeFit fit_loglog(std::span<const double> n_values, std::span<const double> means);

// ---------- Monte-Carlo harness ----------

struct SweepOptions {
  int grid_intervals = 256;
  int workers = 0;  // 0 = hardware concurrency
  CoupledOptions coupled;
};

struct NSweepRow {
  long long N = 0;
  int replicas = 0;
  int excluded = 0;  // replicas that hit a safety cap
  MeanSe sup_z, sup_x, sup_y, sup_m, sup_gamma;
  double eq_fraction = 0.0;
  WilsonInterval eq_interval;
  double sqrtn_mean_sup_m = 0.0;
  double n_mean_sup_gamma = 0.0;
};

struct CltCoordinate {
  double mean_n = 0.0, se_n = 0.0, var_n = 0.0;
  double mean_sde = 0.0, se_sde = 0.0, var_sde = 0.0;
};

struct CltBatch {
  double ks_statistic = 0.0;
  double ks_p = 0.0;
};

struct CltBlock {
  int m_n = 0, m_sde = 0, batches = 0;
  std::vector<CltCoordinate> coords;                    // pooled across batches
  std::vector<std::vector<CltBatch>> batch_ks;          // [coord][batch]
  std::vector<std::vector<double>> vn_samples;          // [coord] pooled
  std::vector<std::vector<double>> v_samples;           // [coord] pooled
  int excluded = 0;
  std::string warning;
};

struct ConvergenceReport {
  std::vector<NSweepRow> rows;
  SlopeFit fit;
  std::optional<CltBlock> clt;
};

// Coupled sweep over N: per N, `replicas` coupled pairs on shared
// streams (replica index varies, seed fixed); sup-norm errors on the
// shared grid; rate fitted on log-log means. Cap-hit replicas are
// excluded from the averages and counted.
ConvergenceReport strong_error_sweep(const ReactionNetwork& net, const HybridState& z0n,
                                     const HybridState& z0, double T,
                                     std::span<const long long> n_list, int replicas,
                                     uint64_t seed, const SweepOptions& options = {});

struct EqualityEstimate {
  double fraction = 0.0;
  WilsonInterval interval;
  int replicas = 0;
  int excluded = 0;
};

// Fraction of replicas whose accepted discrete event lists coincide
// exactly between the two coupled processes.
EqualityEstimate discrete_equality_probability(const ReactionNetwork& net,
                                               const HybridState& z0n, const HybridState& z0,
                                               double T, long long N, int replicas,
                                               uint64_t seed, const SweepOptions& options = {});

struct CltOptions {
  int sde_steps = 4096;
  int batches = 1;
  int workers = 0;
  int terminal_grid_intervals = 8;
  CoupledOptions coupled;
};

// Law comparison at the horizon: terminal fluctuations of M_N coupled
// pairs against M_sde Euler-Maruyama runs along independently simulated
// limit paths. Two-sample KS per coordinate per batch; moments pooled.
CltBlock clt_compare(const ReactionNetwork& net, const HybridState& z0n,
                     const HybridState& z0, double T, long long N, int m_n, int m_sde,
                     uint64_t seed, const CltOptions& options = {});

// ---------- report emission ----------

void write_report_csv(std::ostream& os, const ConvergenceReport& report,
                      std::span<const std::string> header);
void write_clt_csv(std::ostream& os, const CltBlock& clt, std::span<const std::string> header);
void write_clt_samples_csv(std::ostream& os, const CltBlock& clt,
                           std::span<const std::string> header);
std::string summary_text(const ConvergenceReport& report);
std::string clt_summary_text(const CltBlock& clt);

// matplotlib script reading the emitted CSVs from `out_dir`
std::string plot_script(bool have_report, bool have_clt_samples);

}  // namespace msgn::stats
