#pragma once

#include <functional>
#include <string>

#include "strokegen/param_store.hpp"

namespace strokegen {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    std::size_t coords_checked = 0;
    double tolerance = 0.0;
    bool pass = false;
};

// Central-difference check of analytic gradients against `loss`, coordinate by
// coordinate over every tensor in `store`. `compute_grads` must leave the
// analytic gradients in the store (it is called once, before perturbing).
// The per-coordinate error is |analytic - numeric| scaled by
// max(1, |analytic|, |numeric|).
GradCheckReport grad_check(ParamStore& store, const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           double h = 1e-5, double tolerance = 1e-6);

}  // namespace strokegen
