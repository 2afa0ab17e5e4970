#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctvol/layers.hpp"

namespace ctvol {

struct ModelConfig {
    int input_channels = 1;
    int stem_width = 16;
    std::vector<int> stage_widths{16, 32, 64};  // each stage halves H and W
    std::vector<int> stage_blocks{2, 2, 2};
    std::vector<int> aspp_rates{1, 2, 4};
    int aspp_width = 64;
    int low_level_width = 16;   // projection width of the stage-0 skip
    int decoder_width = 32;
    int output_channels = 2;    // channel 0 lung, channel 1 infection
    int output_stride = 8;      // must equal 2^len(stage_widths)
    int norm_groups = 4;

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

// Named view of one parameter block and its gradient.
struct ParamView {
    std::string name;
    double* value = nullptr;
    double* grad = nullptr;
    std::size_t count = 0;
    std::vector<int> shape;
};
using ParamVisitor = std::function<void(const ParamView&)>;

// Layer wrappers own parameters, gradients, and forward caches. A model
// instance is therefore stateful across forward/backward and must not be
// shared between threads; share checkpoints instead.
class Conv2d {
public:
    Conv2d(std::string name, int c_in, int c_out, int k, int stride = 1, int dilation = 1,
           int padding = 0);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);
    void visit(const ParamVisitor& v);

    ConvParams params;
    Tensor grad_w;
    std::vector<double> grad_b;

private:
    std::string name_;
    Tensor x_cache_;
};

class GroupNorm {
public:
    GroupNorm(std::string name, int channels, int groups);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);
    void visit(const ParamVisitor& v);

    GroupNormParams params;
    std::vector<double> grad_gamma, grad_beta;

private:
    std::string name_;
    GroupNormCache cache_;
};

class Relu {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);

private:
    Tensor out_cache_;
};

// conv-norm-relu-conv-norm plus shortcut, final ReLU. Shortcut is the
// identity when shape is preserved, otherwise a strided 1x1 projection.
class ResidualBlock {
public:
    ResidualBlock(std::string name, int c_in, int c_out, int stride, int groups);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);
    void visit(const ParamVisitor& v);

private:
    Conv2d conv1_, conv2_;
    GroupNorm gn1_, gn2_;
    Relu relu1_, relu_out_;
    std::optional<Conv2d> projection_;
    Tensor x_cache_;
};

// 1x1 branch + one 3x3 dilated branch per rate (padding = rate) + pooled
// branch, concatenated and projected back with a 1x1 conv.
class Aspp {
public:
    Aspp(std::string name, int c_in, int c_out, std::vector<int> rates);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);
    void visit(const ParamVisitor& v);

private:
    std::vector<int> rates_;
    Conv2d conv1x1_;
    std::vector<std::unique_ptr<Conv2d>> rate_convs_;
    Conv2d pool_conv_;
    Conv2d project_;
    int in_h_ = 0, in_w_ = 0;
};

class SegModel {
public:
    explicit SegModel(ModelConfig cfg);

    // He-normal conv weights, unit gamma, zero beta/bias; one seeded stream
    // consumed in visit order.
    void init_params(std::uint64_t seed);

    // logits (N, 2, H, W)
    Tensor forward(const Tensor& batch);
    // returns grad w.r.t. the input batch; parameter grads land in layers
    Tensor backward(const Tensor& grad_logits);

    void visit_params(const ParamVisitor& v);
    std::size_t param_count();
    const ModelConfig& config() const { return cfg_; }

private:
    ModelConfig cfg_;
    Conv2d stem_conv_;
    GroupNorm stem_gn_;
    Relu stem_relu_;
    std::vector<std::unique_ptr<ResidualBlock>> blocks_;
    std::size_t low_level_block_ = 0;  // index after which the skip is taken
    Aspp aspp_;
    Conv2d low_proj_conv_;
    GroupNorm low_proj_gn_;
    Relu low_proj_relu_;
    Conv2d dec_conv1_;
    GroupNorm dec_gn1_;
    Relu dec_relu1_;
    Conv2d dec_conv2_;
    GroupNorm dec_gn2_;
    Relu dec_relu2_;
    Conv2d head_;
    int up1_ = 4, up2_ = 2;
    // shapes cached for backward
    int enc_h_ = 0, enc_w_ = 0, low_h_ = 0, low_w_ = 0, in_h_ = 0, in_w_ = 0;
};

}  // namespace ctvol
