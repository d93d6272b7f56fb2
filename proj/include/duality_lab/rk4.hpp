#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "duality_lab/errors.hpp"

namespace duality_lab {

struct PropagationStats {
  long steps = 0;
  double max_norm_drift = 0.0;  // largest | ||psi|| - 1 | seen before renormalizing
};

// Classical RK4 for d psi/dt = -i H(t) psi with H supplied as
// apply(t, in, out). Buffers are reused across steps.
class SchrodingerRk4 {
 public:
  using Complex = std::complex<double>;

  explicit SchrodingerRk4(std::size_t dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  template <typename Apply>
  void step(std::vector<Complex>& psi, double t, double h, Apply&& apply, PropagationStats* stats) {
    const std::size_t dim = psi.size();
    const Complex mi{0.0, -1.0};
    apply(t, psi, k1_);
    for (std::size_t i = 0; i < dim; ++i) {
      k1_[i] *= mi;
      tmp_[i] = psi[i] + 0.5 * h * k1_[i];
    }
    apply(t + 0.5 * h, tmp_, k2_);
    for (std::size_t i = 0; i < dim; ++i) {
      k2_[i] *= mi;
      tmp_[i] = psi[i] + 0.5 * h * k2_[i];
    }
    apply(t + 0.5 * h, tmp_, k3_);
    for (std::size_t i = 0; i < dim; ++i) {
      k3_[i] *= mi;
      tmp_[i] = psi[i] + h * k3_[i];
    }
    apply(t + h, tmp_, k4_);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      k4_[i] *= mi;
      psi[i] += (h / 6.0) * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
      norm2 += std::norm(psi[i]);
    }
    const double norm = std::sqrt(norm2);
    if (!std::isfinite(norm) || norm == 0.0) throw NumericalFailure("RK4: state norm is not finite");
    const double inv = 1.0 / norm;
    for (auto& a : psi) a *= inv;
    if (stats) {
      ++stats->steps;
      stats->max_norm_drift = std::max(stats->max_norm_drift, std::abs(norm - 1.0));
    }
  }

 private:
  std::vector<Complex> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace duality_lab
