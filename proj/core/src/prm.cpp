#include "msgn/prm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msgn/rng.hpp"

namespace msgn {

namespace {
constexpr int kMaxStrips = 63;
}

PrmStream::PrmStream(uint64_t seed, uint32_t replica, std::string reaction_id, double lambda0)
    : seed_(seed),
      replica_(replica),
      reaction_id_(std::move(reaction_id)),
      id_hash_(rng::fnv1a(reaction_id_)),
      lambda0_(lambda0) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be positive");
}

double PrmStream::strip_lo(int strip) const {
  return strip == 0 ? 0.0 : lambda0_ * std::ldexp(1.0, strip - 1);
}

double PrmStream::strip_hi(int strip) const { return lambda0_ * std::ldexp(1.0, strip); }

int PrmStream::strips_for_level(double level) const {
  if (level <= 0.0) return 0;
  int k = 1;
  while (strip_hi(k - 1) < level && k < kMaxStrips) ++k;
  return k;
}

const std::vector<PrmPoint>& PrmStream::cell(int strip, int64_t window) const {
  uint64_t key = (static_cast<uint64_t>(strip) << 48) ^ static_cast<uint64_t>(window);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cells_.find(key);
    if (it != cells_.end()) return *it->second;
  }
  // Build outside the lock; the construction is deterministic, so a rare
  // duplicate build yields an identical vector.
  auto pts = std::make_unique<std::vector<PrmPoint>>();
  rng::KeyedStream ks(rng::cell_key(seed_, replica_, id_hash_, static_cast<uint32_t>(strip),
                                    window));
  const double lo = strip_lo(strip);
  const double height = strip_hi(strip) - lo;
  long long count = ks.next_poisson(height);
  pts->reserve(static_cast<size_t>(count));
  for (long long i = 0; i < count; ++i) {
    PrmPoint p;
    p.s = static_cast<double>(window) + ks.next_unit_open();
    p.u = lo + height * ks.next_unit_open();
    pts->push_back(p);
  }
  std::sort(pts->begin(), pts->end(), [](const PrmPoint& a, const PrmPoint& b) {
    if (a.s != b.s) return a.s < b.s;
    return a.u < b.u;
  });
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cells_.try_emplace(key, std::move(pts));
  return *it->second;
}

std::vector<PrmPoint> PrmStream::query(double t0, double t1, double level) const {
  std::vector<PrmPoint> out;
  if (!(t1 > t0) || !(level > 0.0)) return out;
  const int strips = strips_for_level(level);
  const int64_t w0 = static_cast<int64_t>(std::floor(t0));
  const int64_t w1 = static_cast<int64_t>(std::ceil(t1));
  for (int64_t w = std::max<int64_t>(w0, 0); w < std::max<int64_t>(w1, 0); ++w) {
    for (int k = 0; k < strips; ++k) {
      for (const PrmPoint& p : cell(k, w)) {
        if (p.s > t0 && p.s <= t1 && p.u <= level) out.push_back(p);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const PrmPoint& a, const PrmPoint& b) {
    if (a.s != b.s) return a.s < b.s;
    return a.u < b.u;
  });
  return out;
}

std::optional<PrmPoint> PrmStream::next_point(double t, double level) const {
  if (!(level > 0.0)) return std::nullopt;
  // Miss probability beyond `span` windows is exp(-level * span).
  double span = std::ceil(1.0e4 / level) + 2.0;
  PrmCursor cur(*this, t, level, t + span);
  return cur.peek();
}

PrmCursor::PrmCursor(const PrmStream& stream, double start_time, double level, double horizon)
    : stream_(&stream), level_(level), horizon_(horizon) {
  horizon_window_ = static_cast<int64_t>(std::floor(std::max(horizon, 0.0)));
  seek(start_time);
}

void PrmCursor::seek(double t) {
  seek_time_ = t;
  window_ = std::max<int64_t>(static_cast<int64_t>(std::floor(std::max(t, 0.0))), 0);
  load_window(window_);
  compute_pending();
}

void PrmCursor::load_window(int64_t w) {
  window_ = w;
  const int strips = stream_->strips_for_level(level_);
  idx_.assign(strips, 0);
  for (int k = 0; k < strips; ++k) {
    const auto& pts = stream_->cell(k, w);
    // first point with s > seek_time_
    size_t lo = 0, hi = pts.size();
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (pts[mid].s > seek_time_)
        hi = mid;
      else
        lo = mid + 1;
    }
    idx_[k] = lo;
  }
}

void PrmCursor::compute_pending() {
  pending_.reset();
  pending_strip_ = -1;
  if (!(level_ > 0.0)) return;
  for (;;) {
    const int strips = static_cast<int>(idx_.size());
    for (int k = 0; k < strips; ++k) {
      const auto& pts = stream_->cell(k, window_);
      size_t i = idx_[k];
      // skip points above the current level; a later raise_level re-seeks
      while (i < pts.size() && pts[i].u > level_) ++i;
      idx_[k] = i;
      if (i < pts.size()) {
        const PrmPoint& p = pts[i];
        if (!pending_ || p.s < pending_->s) {
          pending_ = p;
          pending_strip_ = k;
        }
      }
    }
    if (pending_) return;
    if (window_ >= horizon_window_) return;
    load_window(window_ + 1);
  }
}

std::optional<PrmPoint> PrmCursor::peek() {
  if (pending_ && pending_->s > horizon_) return std::nullopt;
  return pending_;
}

void PrmCursor::pop() {
  if (!pending_) return;
  idx_[pending_strip_]++;
  seek_time_ = pending_->s;
  pending_.reset();
  pending_strip_ = -1;
  compute_pending();
}

void PrmCursor::raise_level(double new_level, double from_time) {
  if (new_level <= level_) return;
  level_ = new_level;
  seek(std::max(from_time, seek_time_));
}

}  // namespace msgn
