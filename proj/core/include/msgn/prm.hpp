#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace msgn {

struct PrmPoint {
  double s = 0.0;  // time coordinate
  double u = 0.0;  // level coordinate
};

// One realization of a unit-intensity Poisson random measure on
// R_+ x R_+, keyed by (seed, replica, reaction id). The plane is tiled
// into cells (strip k, unit time window j) with geometric strip tops
// lambda0 * 2^k; each cell's points are a pure function of the cell key,
// so any query sees the same realization regardless of what was queried
// before — that is what lets two different simulations share one noise
// source while reading it at different levels and in different orders.
//
// Within a cell the point count is Poisson(cell area) and positions are
// i.i.d. uniform. Streams are logically immutable; the cell cache is
// memoization only and is mutex-guarded for concurrent readers.
class PrmStream {
 public:
  PrmStream(uint64_t seed, uint32_t replica, std::string reaction_id, double lambda0 = 1.0);

  uint64_t seed() const { return seed_; }
  uint32_t replica() const { return replica_; }
  const std::string& reaction_id() const { return reaction_id_; }
  double lambda0() const { return lambda0_; }

  // Points with t0 < s <= t1 and 0 < u <= level, sorted by s.
  std::vector<PrmPoint> query(double t0, double t1, double level) const;

  // Earliest point with s > t and u <= level; equals the head of
  // query(t, infinity, level). Gives up (returns nullopt) only after
  // scanning a stretch whose miss probability is below exp(-10^4).
  std::optional<PrmPoint> next_point(double t, double level) const;

  // --- cell geometry (used by PrmCursor and tests) ---
  double strip_lo(int strip) const;
  double strip_hi(int strip) const;
  int strips_for_level(double level) const;  // strips 0..K-1 cover [0, level]
  const std::vector<PrmPoint>& cell(int strip, int64_t window) const;

 private:
  uint64_t seed_;
  uint32_t replica_;
  std::string reaction_id_;
  uint64_t id_hash_;
  double lambda0_;
  mutable std::mutex mu_;
  mutable std::unordered_map<uint64_t, std::unique_ptr<std::vector<PrmPoint>>> cells_;
};

// Time-ordered iteration over the points of one stream below a level,
// starting strictly after a given time. Levels may be raised mid-flight:
// the cursor re-seeks every strip so points in the newly exposed band
// enter the merge from `from_time` on.
class PrmCursor {
 public:
  PrmCursor(const PrmStream& stream, double start_time, double level, double horizon);

  // Next point not yet consumed, or nullopt past the horizon.
  std::optional<PrmPoint> peek();
  void pop();

  void raise_level(double new_level, double from_time);
  double level() const { return level_; }

 private:
  void seek(double t);
  void load_window(int64_t w);
  void compute_pending();

  const PrmStream* stream_;
  double level_;
  double horizon_;
  int64_t window_ = 0;
  int64_t horizon_window_ = 0;
  double seek_time_ = 0.0;
  std::vector<size_t> idx_;  // per strip, next unexamined point in current window
  std::optional<PrmPoint> pending_;
  int pending_strip_ = -1;
};

}  // namespace msgn
