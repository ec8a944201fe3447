// Tricritical point and one horizontal slice of the ground-state phase diagram.

#include "stagising/landau.hpp"
#include "stagising/transition.hpp"
#include "stagising/univariate.hpp"

#include <cstdio>

int main() {
  using namespace stagising;
  ModelParams p;
  p.n = 64;
  p.s = 0.5;
  p.alpha = RangeExponent(0.5);
  const double sg = p.s_gamma();

  const auto [wx_tp, wz_tp] = tricritical_point_exact(p.s, p.gamma);
  if (const auto tp = landau_tricritical_point(p))
    std::printf("tricritical: scan (%.6f, %.6f), closed form (%.6f, %.6f) sGamma\n", tp->omega_x / sg,
                tp->omega_z / sg, wx_tp / sg, wz_tp / sg);

  SliceSpec slice;
  slice.fixed = 0.2 * sg;
  slice.from = 0.0;
  slice.to = 2.0 * sg;
  slice.count = 11;
  for (int k = 0; k < slice.count; ++k) {
    const double wx = grid_value(slice.from, slice.to, slice.count, k);
    const auto vp = minimize_univariate(at_slice_point(p, slice, wx));
    std::printf("omega_x=%.2f m_s=%.4f\n", wx / sg, vp.m_s);
  }
  const auto rec = classify_transition(slice, p);
  std::printf("%s transition at omega_x=%.6f sGamma, jump %.4f\n", to_string(rec.order).c_str(),
              rec.critical_value.value_or(0.0) / sg, rec.jump);
}
