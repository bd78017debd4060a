#pragma once

// Central finite-difference oracle for parameter gradients. Test-only: it
// perturbs parameter values directly and never calls backward().

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "wcam/nn/parameter.hpp"
#include "wcam/util/random.hpp"

namespace wcam::testing {

struct GradCheckResult {
  int checked = 0;
  int passed = 0;
  double worst = 0.0;

  double pass_rate() const { return checked == 0 ? 0.0 : static_cast<double>(passed) / checked; }
};

// Differences below `floor` are finite-difference noise, e.g. conv biases that a
// following batch norm cancels exactly.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (std::abs(analytic - numeric) < floor) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

// `loss` evaluates the scalar loss at the current parameter values.
// `analytic` holds gradients captured from backward() before this call.
inline GradCheckResult finite_difference_check(const nn::ParameterList<double>& params,
                                               const std::vector<nn::Vector<double>>& analytic,
                                               const std::function<double()>& loss, int per_param, double tol,
                                               std::uint64_t seed, double step = 1e-6,
                                               double floor = 1e-8) {
  GradCheckResult r;
  Rng rng(seed);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto* p = params[k];
    const int samples = static_cast<int>(std::min<nn::Index>(per_param, p->size()));
    for (int s = 0; s < samples; ++s) {
      const nn::Index i = p->size() <= per_param ? s : rng.integer(0, p->size() - 1);
      const double saved = p->value[i];
      p->value[i] = saved + step;
      const double up = loss();
      p->value[i] = saved - step;
      const double down = loss();
      p->value[i] = saved;
      const double numeric = (up - down) / (2 * step);
      const double err = relative_error(analytic[k][i], numeric, floor);
      r.worst = std::max(r.worst, err);
      ++r.checked;
      if (err <= tol) ++r.passed;
    }
  }
  return r;
}

}  // namespace wcam::testing
