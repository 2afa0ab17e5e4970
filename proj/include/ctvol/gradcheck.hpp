#pragma once

#include <cstdint>

#include "ctvol/tensor.hpp"

namespace ctvol {

// Central finite differences (step 1e-5, double precision) on every input
// and parameter coordinate of a small random instance, against the analytic
// backward pass. Each returns the max of |fd - analytic| / max(1, |fd|,
// |analytic|) over all coordinates.
double grad_check_conv2d(std::uint64_t seed);
double grad_check_group_norm(std::uint64_t seed);
double grad_check_residual_block(std::uint64_t seed);
double grad_check_aspp(std::uint64_t seed);
double grad_check_upsample(std::uint64_t seed);
double grad_check_loss(std::uint64_t seed);
// full tiny model chained through the loss
double grad_check_model(std::uint64_t seed);

}  // namespace ctvol
