#pragma once

#include "ctvol/tensor.hpp"

namespace ctvol {

// Mean over the two channels of [pixel BCE on sigmoided logits +
// (1 - soft Dice)], Dice smoothing eps = 1.0, pooled over the whole batch.
// logits (N, 2, H, W); lung_gt and infection_gt (N, 1, H, W), binary.
double seg_loss(const Tensor& logits, const Tensor& lung_gt, const Tensor& infection_gt);

struct LossResult {
    double value = 0.0;
    Tensor grad_logits;
};
LossResult seg_loss_with_grad(const Tensor& logits, const Tensor& lung_gt,
                              const Tensor& infection_gt);

}  // namespace ctvol
