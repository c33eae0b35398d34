#include "msgn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "msgn/errors.hpp"
#include "msgn/rng.hpp"

namespace msgn::stats {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------- distribution tails ----------

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.0) {
    // cdf via the theta-transformed series, accurate for small x
    double t = kPi * kPi / (8.0 * x * x);
    double sum = 0.0;
    for (int k = 1; k < 40; k += 2) {
      double term = std::exp(-static_cast<double>(k) * k * t);
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    double cdf = std::sqrt(2.0 * kPi) / x * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 120; ++k) {
    double term = std::exp(-2.0 * static_cast<double>(k) * k * x * x);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double regularized_gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("bad incomplete-gamma arguments");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // lower series
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - lg);
    return std::clamp(1.0 - p, 0.0, 1.0);
  }
  // upper continued fraction (modified Lentz)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  double q = std::exp(-x + a * std::log(x) - lg) * h;
  return std::clamp(q, 0.0, 1.0);
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw std::invalid_argument("df must be >= 1");
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// ---------- goodness of fit ----------

namespace {

void require_samples(size_t count) {
  if (count < 20)
    throw std::invalid_argument("goodness-of-fit tests need at least 20 samples");
}

GofResult ks_one_sample(std::vector<double> sorted, const std::function<double(double)>& cdf) {
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    double f = cdf(sorted[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return {d, kolmogorov_sf(std::sqrt(n) * d)};
}

}  // namespace

GofResult gof_poisson(std::span<const long long> samples, double mu) {
  require_samples(samples.size());
  if (!(mu > 0.0)) throw std::invalid_argument("poisson mean must be positive");
  const double m = static_cast<double>(samples.size());

  // bins pooled left to right until expected >= 5; remaining tail mass
  // merged into the final bin
  std::vector<long long> upper;  // bin holds values <= upper[b] (last bin: everything)
  std::vector<double> expected;
  double pmf = std::exp(-mu);
  double cum = 0.0;
  double acc = 0.0;
  long long k = 0;
  const long long k_max = static_cast<long long>(mu + 12.0 * std::sqrt(mu) + 30.0);
  while (k <= k_max) {
    acc += m * pmf;
    cum += pmf;
    if (acc >= 5.0) {
      upper.push_back(k);
      expected.push_back(acc);
      acc = 0.0;
    }
    ++k;
    pmf *= mu / static_cast<double>(k);
  }
  double tail = m * (1.0 - cum) + acc;
  if (upper.empty()) {
    upper.push_back(k_max);
    expected.push_back(tail);
    tail = 0.0;
  }
  if (tail > 5.0) {
    upper.push_back(std::numeric_limits<long long>::max());
    expected.push_back(tail);
  } else {
    upper.back() = std::numeric_limits<long long>::max();
    expected.back() += tail;
  }
  if (expected.size() < 2)
    throw std::invalid_argument("too few samples for a poisson chi-square at this mean");

  std::vector<double> observed(expected.size(), 0.0);
  for (long long s : samples) {
    size_t b = 0;
    while (s > upper[b]) ++b;
    observed[b] += 1.0;
  }
  double stat = 0.0;
  for (size_t b = 0; b < expected.size(); ++b) {
    double diff = observed[b] - expected[b];
    stat += diff * diff / expected[b];
  }
  int df = static_cast<int>(expected.size()) - 1;
  return {stat, chi_square_sf(stat, df)};
}

GofResult gof_exponential(std::span<const double> samples, double rate) {
  require_samples(samples.size());
  if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
  return ks_one_sample(std::vector<double>(samples.begin(), samples.end()),
                       [rate](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x); });
}

GofResult gof_normal(std::span<const double> samples, double mean, double variance) {
  require_samples(samples.size());
  if (!(variance > 0.0)) throw std::invalid_argument("normal variance must be positive");
  const double sd = std::sqrt(variance);
  return ks_one_sample(std::vector<double>(samples.begin(), samples.end()),
                       [mean, sd](double x) { return normal_cdf((x - mean) / sd); });
}

GofResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require_samples(a.size());
  require_samples(b.size());
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= v) ++i;
    while (j < sb.size() && sb[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  double n_eff = na * nb / (na + nb);
  return {d, kolmogorov_sf(std::sqrt(n_eff) * d)};
}

GofResult gof_test(std::span<const double> samples, const Law& law) {
  switch (law.kind) {
    case Law::Kind::Poisson: {
      std::vector<long long> counts;
      counts.reserve(samples.size());
      for (double s : samples) counts.push_back(std::llround(s));
      return gof_poisson(counts, law.p1);
    }
    case Law::Kind::Exponential:
      return gof_exponential(samples, law.p1);
    case Law::Kind::Normal:
      return gof_normal(samples, law.p1, law.p2);
  }
  throw std::invalid_argument("unknown law");
}

// ---------- estimators ----------

MeanSe mean_se(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return {m, sd / std::sqrt(static_cast<double>(xs.size()))};
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

WilsonInterval wilson_interval(long long successes, long long trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

double student_t_975(int df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                 2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                 2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return std::numeric_limits<double>::quiet_NaN();
  if (df <= 30) return table[df - 1];
  return 1.96;
}

}  // namespace

SlopeFit fit_loglog(std::span<const double> n_values, std::span<const double> means) {
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < n_values.size() && i < means.size(); ++i) {
    if (means[i] > 0.0 && n_values[i] > 0.0) {
      xs.push_back(std::log(n_values[i]));
      ys.push_back(std::log(means[i]));
    }
  }
  const size_t m = xs.size();
  if (m < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.defined = true;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (m > 2) {
    double ssr = 0.0;
    for (size_t i = 0; i < m; ++i) {
      double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
      ssr += r * r;
    }
    fit.slope_se = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
    fit.ci_half_width = student_t_975(static_cast<int>(m) - 2) * fit.slope_se;
  } else {
    fit.slope_se = std::numeric_limits<double>::quiet_NaN();
    fit.ci_half_width = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

// ---------- Monte-Carlo harness ----------

namespace {

struct ReplicaOutcome {
  bool excluded = false;
  double sup_z = 0.0, sup_x = 0.0, sup_y = 0.0, sup_m = 0.0, sup_gamma = 0.0;
  bool y_equal = false;
  std::vector<double> v_terminal;
};

ReplicaOutcome summarize_replica(const ReactionNetwork& net, long long N,
                                 const HybridState& z0n, const HybridState& z0, double T,
                                 uint64_t seed, uint32_t replica, const SweepOptions& opts) {
  ReplicaOutcome out;
  FluctuationDecomposition dec;
  try {
    dec = coupled_fluctuation(net, N, z0n, z0, T, seed, replica, opts.grid_intervals,
                              opts.coupled);
  } catch (const cap_error&) {
    out.excluded = true;
    return out;
  }
  const double sqrt_n = std::sqrt(static_cast<double>(N));
  const size_t G = dec.grid.size();
  for (size_t g = 0; g < G; ++g) {
    const auto& zn = dec.jump_path.states[g];
    const auto& z = dec.pdmp_path.states[g];
    double ndx = 0.0;
    for (int i = 0; i < net.n(); ++i) {
      double d = zn.x[i] - z.x[i];
      ndx += d * d;
    }
    ndx = std::sqrt(ndx);
    double ndy = 0.0;
    for (int j = 0; j < net.d(); ++j) {
      double d = static_cast<double>(zn.y[j] - z.y[j]);
      ndy += d * d;
    }
    ndy = std::sqrt(ndy);
    out.sup_x = std::max(out.sup_x, ndx);
    out.sup_y = std::max(out.sup_y, ndy);
    out.sup_z = std::max(out.sup_z, ndx + ndy);
    out.sup_m = std::max(out.sup_m, norm2(dec.u[g]) / sqrt_n);
    out.sup_gamma = std::max(out.sup_gamma, norm2(dec.sqrtn_gamma[g]) / sqrt_n);
  }
  auto ev_n = dec.jump_path.discrete_events(net);
  auto ev = dec.pdmp_path.discrete_events(net);
  out.y_equal = ev_n.size() == ev.size();
  if (out.y_equal)
    for (size_t i = 0; i < ev.size(); ++i)
      if (ev_n[i].reaction != ev[i].reaction || ev_n[i].time != ev[i].time) {
        out.y_equal = false;
        break;
      }
  out.v_terminal = dec.v.back();
  return out;
}

NSweepRow aggregate_rows(long long N, const std::vector<ReplicaOutcome>& outcomes) {
  NSweepRow row;
  row.N = N;
  row.replicas = static_cast<int>(outcomes.size());
  std::vector<double> sz, sx, sy, sm, sg;
  long long eq = 0, valid = 0;
  for (const auto& o : outcomes) {
    if (o.excluded) {
      row.excluded++;
      continue;
    }
    ++valid;
    sz.push_back(o.sup_z);
    sx.push_back(o.sup_x);
    sy.push_back(o.sup_y);
    sm.push_back(o.sup_m);
    sg.push_back(o.sup_gamma);
    if (o.y_equal) ++eq;
  }
  row.sup_z = mean_se(sz);
  row.sup_x = mean_se(sx);
  row.sup_y = mean_se(sy);
  row.sup_m = mean_se(sm);
  row.sup_gamma = mean_se(sg);
  row.eq_fraction = valid > 0 ? static_cast<double>(eq) / static_cast<double>(valid) : 0.0;
  row.eq_interval = wilson_interval(eq, valid);
  row.sqrtn_mean_sup_m = std::sqrt(static_cast<double>(N)) * row.sup_m.mean;
  row.n_mean_sup_gamma = static_cast<double>(N) * row.sup_gamma.mean;
  return row;
}

}  // namespace

ConvergenceReport strong_error_sweep(const ReactionNetwork& net, const HybridState& z0n,
                                     const HybridState& z0, double T,
                                     std::span<const long long> n_list, int replicas,
                                     uint64_t seed, const SweepOptions& options) {
  if (replicas < 2) throw std::invalid_argument("at least two replicas are required");
  if (n_list.empty()) throw std::invalid_argument("N list must not be empty");

  ConvergenceReport report;
  for (long long N : n_list) {
    std::vector<ReplicaOutcome> outcomes(replicas);
    parallel_for_index(replicas, options.workers, [&](int m) {
      outcomes[m] = summarize_replica(net, N, z0n, z0, T, seed,
                                      static_cast<uint32_t>(m), options);
    });
    report.rows.push_back(aggregate_rows(N, outcomes));
  }

  std::vector<double> ns, means;
  for (const auto& row : report.rows) {
    ns.push_back(static_cast<double>(row.N));
    means.push_back(row.sup_z.mean);
  }
  report.fit = fit_loglog(ns, means);
  return report;
}

EqualityEstimate discrete_equality_probability(const ReactionNetwork& net,
                                               const HybridState& z0n, const HybridState& z0,
                                               double T, long long N, int replicas,
                                               uint64_t seed, const SweepOptions& options) {
  if (replicas < 1) throw std::invalid_argument("at least one replica is required");
  struct Flag {
    int state = -1;  // -1 excluded, 0 unequal, 1 equal
  };
  std::vector<Flag> flags(replicas);
  JumpSimOptions jopts = options.coupled.jump;
  jopts.grid_intervals = options.grid_intervals;
  PdmpSimOptions popts = options.coupled.pdmp;
  popts.grid_intervals = options.grid_intervals;
  parallel_for_index(replicas, options.workers, [&](int m) {
    try {
      auto jp = simulate_scaled(net, N, z0n, T, seed, static_cast<uint32_t>(m), jopts);
      auto pp = simulate_pdmp(net, z0, T, seed, static_cast<uint32_t>(m), popts);
      auto en = jp.discrete_events(net);
      auto el = pp.discrete_events(net);
      bool equal = en.size() == el.size();
      if (equal)
        for (size_t i = 0; i < el.size(); ++i)
          if (en[i].reaction != el[i].reaction || en[i].time != el[i].time) {
            equal = false;
            break;
          }
      flags[m].state = equal ? 1 : 0;
    } catch (const cap_error&) {
      flags[m].state = -1;
    }
  });
  EqualityEstimate est;
  est.replicas = replicas;
  long long eq = 0, valid = 0;
  for (const auto& f : flags) {
    if (f.state < 0) {
      est.excluded++;
      continue;
    }
    ++valid;
    eq += f.state;
  }
  est.fraction = valid > 0 ? static_cast<double>(eq) / static_cast<double>(valid) : 0.0;
  est.interval = wilson_interval(eq, valid);
  return est;
}

CltBlock clt_compare(const ReactionNetwork& net, const HybridState& z0n,
                     const HybridState& z0, double T, long long N, int m_n, int m_sde,
                     uint64_t seed, const CltOptions& options) {
  if (m_n < 2 || m_sde < 2) throw std::invalid_argument("sample sizes must be >= 2");
  const int n = net.n();
  const int batches = std::max(1, options.batches);

  CltBlock block;
  block.m_n = m_n;
  block.m_sde = m_sde;
  block.batches = batches;
  block.coords.resize(n);
  block.batch_ks.assign(n, {});
  block.vn_samples.assign(n, {});
  block.v_samples.assign(n, {});
  if (m_sde < 10 * n)
    block.warning = "SDE sample count below 10x dimension; KS power is limited";

  const double sqrt_n = std::sqrt(static_cast<double>(N));
  std::vector<double> v0(n, 0.0);
  for (int i = 0; i < n; ++i) v0[i] = sqrt_n * (z0n.x[i] - z0.x[i]);

  auto sde_grid = uniform_grid(T, options.sde_steps);

  for (int b = 0; b < batches; ++b) {
    const uint32_t base = static_cast<uint32_t>(b) * static_cast<uint32_t>(m_n + m_sde);

    std::vector<std::vector<double>> vn(m_n);
    std::vector<int> vn_ok(m_n, 0);
    JumpSimOptions jopts = options.coupled.jump;
    jopts.grid_intervals = options.terminal_grid_intervals;
    PdmpSimOptions popts = options.coupled.pdmp;
    popts.grid_intervals = options.terminal_grid_intervals;
    parallel_for_index(m_n, options.workers, [&](int m) {
      try {
        auto jp = simulate_scaled(net, N, z0n, T, seed, base + m, jopts);
        auto pp = simulate_pdmp(net, z0, T, seed, base + m, popts);
        std::vector<double> v(n, 0.0);
        for (int i = 0; i < n; ++i)
          v[i] = sqrt_n * (jp.states.back().x[i] - pp.states.back().x[i]);
        vn[m] = std::move(v);
        vn_ok[m] = 1;
      } catch (const cap_error&) {
        vn_ok[m] = 0;
      }
    });

    std::vector<std::vector<double>> vs(m_sde);
    std::vector<int> vs_ok(m_sde, 0);
    PdmpSimOptions sde_popts = options.coupled.pdmp;
    sde_popts.grid_intervals = options.sde_steps;
    parallel_for_index(m_sde, options.workers, [&](int j) {
      try {
        auto zp = simulate_pdmp(net, z0, T, seed, base + static_cast<uint32_t>(m_n) + j,
                                sde_popts);
        uint64_t driver_seed = rng::combine(rng::combine(seed, 0xc17bULL),
                                            static_cast<uint64_t>(b) * m_sde + j);
        auto sp = simulate_limit_sde(net, zp, v0, sde_grid, driver_seed);
        vs[j] = sp.v.back();
        vs_ok[j] = 1;
      } catch (const cap_error&) {
        vs_ok[j] = 0;
      }
    });

    for (int i = 0; i < n; ++i) {
      std::vector<double> an, as;
      for (int m = 0; m < m_n; ++m)
        if (vn_ok[m]) an.push_back(vn[m][i]);
      for (int j = 0; j < m_sde; ++j)
        if (vs_ok[j]) as.push_back(vs[j][i]);
      auto ks = ks_two_sample(an, as);
      block.batch_ks[i].push_back({ks.statistic, ks.p_value});
      auto& pool_n = block.vn_samples[i];
      pool_n.insert(pool_n.end(), an.begin(), an.end());
      auto& pool_s = block.v_samples[i];
      pool_s.insert(pool_s.end(), as.begin(), as.end());
    }
    for (int m = 0; m < m_n; ++m)
      if (!vn_ok[m]) block.excluded++;
    for (int j = 0; j < m_sde; ++j)
      if (!vs_ok[j]) block.excluded++;
  }

  for (int i = 0; i < n; ++i) {
    auto mn = mean_se(block.vn_samples[i]);
    auto ms = mean_se(block.v_samples[i]);
    block.coords[i] = {mn.mean, mn.se, sample_variance(block.vn_samples[i]),
                       ms.mean, ms.se, sample_variance(block.v_samples[i])};
  }
  return block;
}

// ---------- report emission ----------

void write_report_csv(std::ostream& os, const ConvergenceReport& report,
                      std::span<const std::string> header) {
  for (const auto& h : header) os << "# " << h << "\n";
  os << "N,replicas,excluded,mean_sup_z,se_sup_z,mean_sup_x,se_sup_x,mean_sup_y,se_sup_y,"
        "eq_fraction,eq_lo,eq_hi,sqrtn_mean_sup_m,n_mean_sup_gamma\n";
  for (const auto& r : report.rows) {
    os << r.N << ',' << r.replicas << ',' << r.excluded << ',' << format_double(r.sup_z.mean)
       << ',' << format_double(r.sup_z.se) << ',' << format_double(r.sup_x.mean) << ','
       << format_double(r.sup_x.se) << ',' << format_double(r.sup_y.mean) << ','
       << format_double(r.sup_y.se) << ',' << format_double(r.eq_fraction) << ','
       << format_double(r.eq_interval.lo) << ',' << format_double(r.eq_interval.hi) << ','
       << format_double(r.sqrtn_mean_sup_m) << ',' << format_double(r.n_mean_sup_gamma)
       << "\n";
  }
  if (report.fit.defined) {
    os << "# fitted_slope = " << format_double(report.fit.slope) << "\n";
    os << "# fitted_intercept = " << format_double(report.fit.intercept) << "\n";
    os << "# slope_ci_half_width = " << format_double(report.fit.ci_half_width) << "\n";
  } else {
    os << "# fitted_slope = undefined\n";
  }
}

void write_clt_csv(std::ostream& os, const CltBlock& clt, std::span<const std::string> header) {
  for (const auto& h : header) os << "# " << h << "\n";
  os << "coord,batch,ks_statistic,ks_p\n";
  for (size_t i = 0; i < clt.batch_ks.size(); ++i)
    for (size_t b = 0; b < clt.batch_ks[i].size(); ++b)
      os << i << ',' << b << ',' << format_double(clt.batch_ks[i][b].ks_statistic) << ','
         << format_double(clt.batch_ks[i][b].ks_p) << "\n";
  os << "# coord,mean_n,se_n,var_n,mean_sde,se_sde,var_sde\n";
  for (size_t i = 0; i < clt.coords.size(); ++i) {
    const auto& c = clt.coords[i];
    os << "# moment " << i << ": " << format_double(c.mean_n) << ',' << format_double(c.se_n)
       << ',' << format_double(c.var_n) << ',' << format_double(c.mean_sde) << ','
       << format_double(c.se_sde) << ',' << format_double(c.var_sde) << "\n";
  }
}

void write_clt_samples_csv(std::ostream& os, const CltBlock& clt,
                           std::span<const std::string> header) {
  for (const auto& h : header) os << "# " << h << "\n";
  os << "coord,source,value\n";
  for (size_t i = 0; i < clt.vn_samples.size(); ++i) {
    for (double v : clt.vn_samples[i]) os << i << ",jump," << format_double(v) << "\n";
    for (double v : clt.v_samples[i]) os << i << ",sde," << format_double(v) << "\n";
  }
}

std::string summary_text(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "coupled strong-error sweep\n";
  os << "N        replicas excluded mean_sup_z  se          sqrtN*E supM  N*E supGamma  eq_fraction\n";
  for (const auto& r : report.rows) {
    os << r.N << "  " << r.replicas << "  " << r.excluded << "  "
       << format_double(r.sup_z.mean) << "  " << format_double(r.sup_z.se) << "  "
       << format_double(r.sqrtn_mean_sup_m) << "  " << format_double(r.n_mean_sup_gamma)
       << "  " << format_double(r.eq_fraction) << "\n";
  }
  if (report.fit.defined) {
    os << "fitted log-log slope: " << format_double(report.fit.slope) << " +/- "
       << format_double(report.fit.ci_half_width) << " (95% CI half-width)\n";
  } else {
    os << "fitted log-log slope: undefined (zero or missing errors)\n";
  }
  return os.str();
}

std::string clt_summary_text(const CltBlock& clt) {
  std::ostringstream os;
  os << "terminal-law comparison (" << clt.m_n << " coupled pairs vs " << clt.m_sde
     << " SDE runs, " << clt.batches << " batch(es))\n";
  if (!clt.warning.empty()) os << "warning: " << clt.warning << "\n";
  for (size_t i = 0; i < clt.coords.size(); ++i) {
    const auto& c = clt.coords[i];
    os << "coord " << i << ": mean " << format_double(c.mean_n) << " (se "
       << format_double(c.se_n) << ") vs " << format_double(c.mean_sde) << " (se "
       << format_double(c.se_sde) << "); variance " << format_double(c.var_n) << " vs "
       << format_double(c.var_sde) << "\n";
    os << "  ks p-values:";
    for (const auto& bk : clt.batch_ks[i]) os << ' ' << format_double(bk.ks_p);
    os << "\n";
  }
  if (clt.excluded > 0) os << "excluded runs: " << clt.excluded << "\n";
  return os.str();
}

std::string plot_script(bool have_report, bool have_clt_samples) {
  std::string s;
  s += "#!/usr/bin/env python3\n";
  s += "# Plots the CSV reports living next to this script.\n";
  s += "import csv, math, os, sys\n";
  s += "import matplotlib\n";
  s += "matplotlib.use('Agg')\n";
  s += "import matplotlib.pyplot as plt\n";
  s += "here = os.path.dirname(os.path.abspath(__file__))\n";
  if (have_report) {
    s += "rows = []\n";
    s += "with open(os.path.join(here, 'report.csv')) as f:\n";
    s += "    for row in csv.DictReader(r for r in f if not r.startswith('#')):\n";
    s += "        rows.append(row)\n";
    s += "ns = [float(r['N']) for r in rows]\n";
    s += "errs = [float(r['mean_sup_z']) for r in rows]\n";
    s += "ses = [float(r['se_sup_z']) for r in rows]\n";
    s += "plt.figure()\n";
    s += "plt.errorbar(ns, errs, yerr=[3*s for s in ses], fmt='o-', capsize=3)\n";
    s += "ref = [errs[0] * math.sqrt(ns[0]/n) for n in ns]\n";
    s += "plt.plot(ns, ref, '--', label='slope -1/2 reference')\n";
    s += "plt.xscale('log'); plt.yscale('log')\n";
    s += "plt.xlabel('N'); plt.ylabel('mean sup error'); plt.legend()\n";
    s += "plt.savefig(os.path.join(here, 'error_rate.png'), dpi=150)\n";
  }
  if (have_clt_samples) {
    s += "import collections\n";
    s += "samples = collections.defaultdict(lambda: {'jump': [], 'sde': []})\n";
    s += "with open(os.path.join(here, 'samples.csv')) as f:\n";
    s += "    for row in csv.DictReader(r for r in f if not r.startswith('#')):\n";
    s += "        samples[row['coord']][row['source']].append(float(row['value']))\n";
    s += "for coord, data in samples.items():\n";
    s += "    plt.figure()\n";
    s += "    plt.hist(data['jump'], bins=60, density=True, alpha=0.5, label='coupled')\n";
    s += "    plt.hist(data['sde'], bins=60, density=True, alpha=0.5, label='sde')\n";
    s += "    plt.xlabel('terminal fluctuation'); plt.legend()\n";
    s += "    plt.savefig(os.path.join(here, f'fluctuation_hist_{coord}.png'), dpi=150)\n";
  }
  s += "print('plots written')\n";
  return s;
}

}  // namespace msgn::stats
