#pragma once

#include <functional>
#include <vector>

#include "swag/autodiff.hpp"

namespace swag::ad {

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_parameter = 0;
    Index worst_entry = 0;
    std::size_t coordinates = 0;
};

/// Builds a scalar loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients against fourth-order central differences
/// (five-point stencil) with the given step, coordinate by coordinate. The per-coordinate error is
/// |g_ad - g_fd| / max(|g_ad|, |g_fd|, floor); `floor` keeps near-zero
/// gradients from dominating through rounding noise. Parameter values are
/// restored and their gradients zeroed on return.
GradCheckResult finite_diff_check(const LossBuilder& loss, const std::vector<Parameter*>& params,
                                  double step = 1e-4, double floor = 1e-6);

} // namespace swag::ad
