#pragma once

#include <cmath>
#include <utility>

namespace nhring {

struct ScalarMinimum {
  double x;
  double value;
  int evaluations;
};

// Golden-section search for a minimum of a unimodal fn on [a, b], stopping
// once the bracket is narrower than xtol.
template <class Fn>
ScalarMinimum golden_section_minimize(Fn&& fn, double a, double b, double xtol,
                                      int max_iter = 200) {
  constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2
  if (a > b) std::swap(a, b);
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  int evals = 2;
  for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = fn(x2);
    }
    ++evals;
  }
  return f1 <= f2 ? ScalarMinimum{x1, f1, evals} : ScalarMinimum{x2, f2, evals};
}

}  // namespace nhring
