#pragma once

#include <utility>
#include <vector>

#include "ctvol/tensor.hpp"

namespace ctvol {

// Convolution weights plus hyperparameters. Dilation is the atrous rate.
struct ConvParams {
    Tensor weights;            // (C_out, C_in, k, k), k odd
    std::vector<double> bias;  // C_out
    int stride = 1;
    int dilation = 1;
    int padding = 0;

    int c_out() const { return weights.n; }
    int c_in() const { return weights.c; }
    int ksize() const { return weights.h; }
};

// floor((H + 2p - d*(k-1) - 1)/s) + 1 per axis; throws NonPositiveOutputSize.
std::pair<int, int> conv2d_output_hw(int h, int w, const ConvParams& p);

// Dilated cross-correlation with zero padding.
Tensor conv2d_forward(const Tensor& x, const ConvParams& p);

struct ConvGrads {
    Tensor grad_x;
    Tensor grad_w;
    std::vector<double> grad_b;
};
ConvGrads conv2d_backward(const Tensor& x, const ConvParams& p, const Tensor& grad_out);

// Per-sample group normalization: statistics over (channels/groups, H, W)
// for each sample independently, so batch members never interact.
struct GroupNormParams {
    std::vector<double> gamma;
    std::vector<double> beta;
    int groups = 4;
    double eps = 1e-5;
};
struct GroupNormCache {
    Tensor xhat;
    std::vector<double> inv_std;  // per (n, group)
};
Tensor group_norm_forward(const Tensor& x, const GroupNormParams& p, GroupNormCache* cache);

struct GroupNormGrads {
    Tensor grad_x;
    std::vector<double> grad_gamma;
    std::vector<double> grad_beta;
};
GroupNormGrads group_norm_backward(const GroupNormParams& p, const GroupNormCache& cache,
                                   const Tensor& grad_out);

Tensor relu_forward(const Tensor& x);
// grad masked by the forward output (out > 0)
Tensor relu_backward(const Tensor& out, const Tensor& grad_out);

// align-corners = false: sample centers at (i + 0.5)/factor - 0.5, edges
// clamped.
Tensor bilinear_upsample(const Tensor& x, int factor);
Tensor bilinear_upsample_backward(const Tensor& grad_out, int in_h, int in_w, int factor);

Tensor global_avg_pool(const Tensor& x);                      // (N, C, 1, 1)
Tensor global_avg_pool_backward(const Tensor& grad_out, int h, int w);
Tensor broadcast_hw(const Tensor& x, int h, int w);           // from (N, C, 1, 1)
Tensor broadcast_hw_backward(const Tensor& grad_out);         // sums back to (N, C, 1, 1)

Tensor concat_channels(const std::vector<const Tensor*>& xs);
std::vector<Tensor> split_channels(const Tensor& x, const std::vector<int>& widths);

}  // namespace ctvol
