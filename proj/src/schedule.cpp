#include "duality_lab/schedule.hpp"

#include <algorithm>
#include <string>

#include "duality_lab/errors.hpp"

namespace duality_lab {

Schedule::Schedule(std::vector<Segment> segments, double horizon)
    : segments_(std::move(segments)), horizon_(horizon) {
  if (segments_.empty()) throw InvalidInput("Schedule: at least one segment required");
  if (segments_.front().t_start != 0.0) throw InvalidInput("Schedule: first segment must start at t = 0");
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    if (!(segments_[i].t_start > segments_[i - 1].t_start)) {
      throw InvalidInput("Schedule: segment start times must be strictly increasing");
    }
  }
  if (!std::isfinite(horizon_) || horizon_ < segments_.back().t_start) {
    throw InvalidInput("Schedule: horizon must be finite and not precede the last segment");
  }
}

Schedule Schedule::constant(const PauliVector& h0, const PauliVector& v, double horizon) {
  return Schedule({Segment{0.0, h0, v}}, horizon);
}

std::size_t Schedule::segment_index(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw OutOfRange("Schedule: t = " + std::to_string(t) + " outside [0, " + std::to_string(horizon_) + "]");
  }
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double value, const Segment& seg) { return value < seg.t_start; });
  return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

std::pair<PauliVector, PauliVector> Schedule::sample(double t) const {
  const Segment& seg = segments_[segment_index(t)];
  return {seg.h0, seg.v};
}

double Schedule::segment_end(std::size_t index) const {
  return index + 1 < segments_.size() ? segments_[index + 1].t_start : horizon_;
}

ScheduleBounds Schedule::bounds() const {
  ScheduleBounds b;
  for (const auto& seg : segments_) {
    b.v_m = std::max(b.v_m, pair_interaction_trace_norm(seg.v));
    b.v_star = std::max(b.v_star, seg.v.max_abs());
    b.h0_m = std::max(b.h0_m, 2.0 * seg.h0.norm());
  }
  return b;
}

ScheduleBounds bounds(const Schedule& s) { return s.bounds(); }

double default_time_step(const ScheduleBounds& b) {
  return 1e-3 / std::max(1.0, b.v_m + 4.0 * b.h0_m);
}

}  // namespace duality_lab
