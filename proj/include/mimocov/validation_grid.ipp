#pragma once

#include <algorithm>
#include <limits>

namespace mimocov::validation {

template <class F>
double grid_max_triangle(F&& g, double cap, int zoom_levels) {
  constexpr int kN = 400;
  double t_lo = 0.0, t_hi = cap, f_lo = 0.0, f_hi = 1.0;
  double best = -std::numeric_limits<double>::infinity();
  double best_t = 0.0, best_f = 0.0;
  for (int level = 0; level <= zoom_levels; ++level) {
    const double dt = (t_hi - t_lo) / (kN - 1);
    const double df = (f_hi - f_lo) / (kN - 1);
    for (int i = 0; i < kN; ++i) {
      const double t1 = std::min(cap, t_lo + dt * i);
      for (int j = 0; j < kN; ++j) {
        const double f = std::min(1.0, f_lo + df * j);
        const double v = g(t1, f * (cap - t1));
        if (v > best) {
          best = v;
          best_t = t1;
          best_f = f;
        }
      }
    }
    t_lo = std::max(0.0, best_t - 3 * dt);
    t_hi = std::min(cap, best_t + 3 * dt);
    f_lo = std::max(0.0, best_f - 3 * df);
    f_hi = std::min(1.0, best_f + 3 * df);
  }
  return best;
}

}  // namespace mimocov::validation
