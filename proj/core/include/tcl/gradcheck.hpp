#pragma once

#include <functional>
#include <string>

#include "tcl/tensor.hpp"

namespace tcl {

struct GradCheckReport {
  std::string name;
  double max_rel_err = 0.0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool pass = false;
};

// Central-difference check of an analytic gradient. f evaluates the scalar
// objective at an arbitrary point with the same shape as `point`; `analytic`
// is the gradient under test, evaluated at `point`. Coordinates where
// |analytic| <= grad_floor are skipped: the difference quotient carries no
// usable signal against roundoff there.
GradCheckReport gradcheck(const std::string& name,
                          const std::function<double(const Tensor&)>& f,
                          const Tensor& point, const Tensor& analytic,
                          double h = 1e-6, double rel_tol = 1e-6,
                          double grad_floor = 1e-8);

// Sweeps every training loss with `instances` random small instances each and
// folds the worst case into one report per loss. Reported names, in order:
// info_nce, nll_mean, gated_nll, loss_st, loss_ts, tcl_multi, idl, icdl.
// Multi-domain losses alternate the differentiated leaf between the target
// and a source batch so both sides of the cross terms get exercised.
std::vector<GradCheckReport> loss_gradcheck_suite(std::size_t instances, std::uint64_t seed,
                                                  double h = 1e-6, double rel_tol = 1e-6,
                                                  double grad_floor = 1e-8);

}  // namespace tcl
