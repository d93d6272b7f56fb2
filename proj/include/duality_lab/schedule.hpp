#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "duality_lab/pauli.hpp"

namespace duality_lab {

struct Segment {
  double t_start = 0.0;
  PauliVector h0;
  PauliVector v;
};

struct ScheduleBounds {
  double v_m = 0.0;     // sup_t ||V(t)||_1 of the two-qubit interaction
  double v_star = 0.0;  // sup_{mu,t} |V_mu(t)|
  double h0_m = 0.0;    // sup_t ||H0(t)||_1 = 2 |h0|
};

// Piecewise-constant couplings on [0, horizon]. Right-continuous: at a
// breakpoint the new segment is in force.
class Schedule {
 public:
  Schedule(std::vector<Segment> segments, double horizon);
  static Schedule constant(const PauliVector& h0, const PauliVector& v, double horizon);

  const std::vector<Segment>& segments() const { return segments_; }
  double horizon() const { return horizon_; }

  std::size_t segment_index(double t) const;
  std::pair<PauliVector, PauliVector> sample(double t) const;
  ScheduleBounds bounds() const;

  // End of the segment containing t (or the horizon for the last one).
  double segment_end(std::size_t index) const;

 private:
  std::vector<Segment> segments_;
  double horizon_;
};

ScheduleBounds bounds(const Schedule& s);

// 1e-3 / max(1, v_m + 4 h0_m).
double default_time_step(const ScheduleBounds& b);

struct Substep {
  const PauliVector& h0;
  const PauliVector& v;
  double piece_start;  // where the current constant stretch began (>= its segment start)
  double t;            // start of this sub-step
  double h;
};

// Walks [t0, t1] in equal sub-steps no longer than dt, never straddling a
// breakpoint, calling step(Substep) for each in order.
template <typename StepFn>
void for_each_step(const Schedule& s, double t0, double t1, double dt, StepFn&& step) {
  if (t1 <= t0) return;
  std::size_t idx = s.segment_index(t0);
  double a = t0;
  while (a < t1) {
    const double seg_end = s.segment_end(idx);
    const double b = std::min(seg_end, t1);
    if (b > a) {
      const double len = b - a;
      const auto count = static_cast<long>(std::ceil(len / dt - 1e-9));
      const long steps = count < 1 ? 1 : count;
      const double h = len / static_cast<double>(steps);
      const Segment& seg = s.segments()[idx];
      for (long i = 0; i < steps; ++i) step(Substep{seg.h0, seg.v, a, a + static_cast<double>(i) * h, h});
    }
    a = b;
    if (idx + 1 < s.segments().size()) ++idx;
    else break;
  }
}

}  // namespace duality_lab
