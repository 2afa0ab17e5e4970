#include "ctvol/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "ctvol/layers.hpp"
#include "ctvol/loss.hpp"
#include "ctvol/model.hpp"
#include "ctvol/rng.hpp"

namespace ctvol {

namespace {

constexpr double kStep = 1e-5;

void fill_uniform(std::vector<double>& v, std::mt19937_64& rng, double lo, double hi) {
    for (auto& x : v) x = uniform_in(rng, lo, hi);
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Compare analytic gradients against central differences for every listed
// coordinate. `objective` must recompute the scalar from current values.
double max_fd_error(const std::function<double()>& objective,
                    const std::vector<std::pair<double*, std::size_t>>& blocks,
                    const std::vector<const double*>& analytic) {
    double worst = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        auto [ptr, count] = blocks[b];
        for (std::size_t i = 0; i < count; ++i) {
            const double saved = ptr[i];
            ptr[i] = saved + kStep;
            const double up = objective();
            ptr[i] = saved - kStep;
            const double down = objective();
            ptr[i] = saved;
            const double fd = (up - down) / (2.0 * kStep);
            worst = std::max(worst, rel_err(fd, analytic[b][i]));
        }
    }
    return worst;
}

// random projection tensor turning a tensor-valued op into a scalar objective
Tensor projection_like(const Tensor& t, std::mt19937_64& rng) {
    Tensor r = t;
    fill_uniform(r.data, rng, -1.0, 1.0);
    return r;
}

double dot(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

}  // namespace

double grad_check_conv2d(std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 1));
    Tensor x(1, 2, 5, 5);
    fill_uniform(x.data, rng, -1.0, 1.0);
    ConvParams p;
    p.weights = Tensor(3, 2, 3, 3);
    fill_uniform(p.weights.data, rng, -0.5, 0.5);
    p.bias.assign(3, 0.0);
    fill_uniform(p.bias, rng, -0.5, 0.5);
    p.stride = 2;
    p.dilation = 2;
    p.padding = 2;

    Tensor r = projection_like(conv2d_forward(x, p), rng);
    auto objective = [&]() { return dot(conv2d_forward(x, p), r); };
    ConvGrads g = conv2d_backward(x, p, r);

    return max_fd_error(objective,
                        {{x.data.data(), x.size()},
                         {p.weights.data.data(), p.weights.size()},
                         {p.bias.data(), p.bias.size()}},
                        {g.grad_x.data.data(), g.grad_w.data.data(), g.grad_b.data()});
}

double grad_check_group_norm(std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 2));
    Tensor x(2, 4, 3, 3);
    fill_uniform(x.data, rng, -1.0, 1.0);
    GroupNormParams p;
    p.groups = 2;
    p.gamma.assign(4, 0.0);
    p.beta.assign(4, 0.0);
    fill_uniform(p.gamma, rng, 0.5, 1.5);
    fill_uniform(p.beta, rng, -0.5, 0.5);

    GroupNormCache cache;
    Tensor r = projection_like(group_norm_forward(x, p, &cache), rng);
    auto objective = [&]() { return dot(group_norm_forward(x, p, nullptr), r); };
    group_norm_forward(x, p, &cache);
    GroupNormGrads g = group_norm_backward(p, cache, r);

    return max_fd_error(objective,
                        {{x.data.data(), x.size()},
                         {p.gamma.data(), p.gamma.size()},
                         {p.beta.data(), p.beta.size()}},
                        {g.grad_x.data.data(), g.grad_gamma.data(), g.grad_beta.data()});
}

namespace {

// shared scaffolding for block-level checks: run forward through a module
// with parameters exposed by visit(), project to a scalar, and FD every
// parameter plus the input
template <typename Module>
double check_module(Module& module, Tensor x, std::mt19937_64& rng) {
    Tensor r = projection_like(module.forward(x), rng);
    auto objective = [&]() { return dot(module.forward(x), r); };

    module.forward(x);
    Tensor grad_x = module.backward(r);

    std::vector<std::pair<double*, std::size_t>> blocks{{x.data.data(), x.size()}};
    std::vector<std::vector<double>> grads;  // copies, since backward reruns
    grads.emplace_back(grad_x.data);
    std::vector<ParamView> views;
    module.visit([&views](const ParamView& p) { views.push_back(p); });
    for (const auto& p : views) {
        blocks.emplace_back(p.value, p.count);
        grads.emplace_back(p.grad, p.grad + p.count);
    }
    std::vector<const double*> analytic;
    for (const auto& g : grads) analytic.push_back(g.data());
    return max_fd_error(objective, blocks, analytic);
}

}  // namespace

double grad_check_residual_block(std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 3));
    ResidualBlock block("rb", 2, 4, 2, 2);
    // seed the block params randomly
    NormalSampler normal(mix_seed(seed, 30));
    block.visit([&normal](const ParamView& p) {
        for (std::size_t i = 0; i < p.count; ++i) p.value[i] = 0.4 * normal.next() + 0.2;
    });
    Tensor x(1, 2, 6, 6);
    fill_uniform(x.data, rng, -1.0, 1.0);
    return check_module(block, std::move(x), rng);
}

double grad_check_aspp(std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 4));
    Aspp aspp("aspp", 3, 4, {1, 2});
    NormalSampler normal(mix_seed(seed, 40));
    aspp.visit([&normal](const ParamView& p) {
        for (std::size_t i = 0; i < p.count; ++i) p.value[i] = 0.3 * normal.next();
    });
    Tensor x(1, 3, 5, 5);
    fill_uniform(x.data, rng, -1.0, 1.0);
    return check_module(aspp, std::move(x), rng);
}

double grad_check_upsample(std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 5));
    Tensor x(1, 2, 3, 4);
    fill_uniform(x.data, rng, -1.0, 1.0);
    const int factor = 3;
    Tensor r = projection_like(bilinear_upsample(x, factor), rng);
    auto objective = [&]() { return dot(bilinear_upsample(x, factor), r); };
    Tensor grad_x = bilinear_upsample_backward(r, x.h, x.w, factor);
    return max_fd_error(objective, {{x.data.data(), x.size()}}, {grad_x.data.data()});
}

double grad_check_loss(std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 6));
    Tensor logits(2, 2, 4, 4);
    fill_uniform(logits.data, rng, -2.0, 2.0);
    Tensor lung(2, 1, 4, 4), infection(2, 1, 4, 4);
    for (auto& v : lung.data) v = uniform01(rng) < 0.6 ? 1.0 : 0.0;
    for (auto& v : infection.data) v = uniform01(rng) < 0.3 ? 1.0 : 0.0;

    auto objective = [&]() { return seg_loss(logits, lung, infection); };
    LossResult res = seg_loss_with_grad(logits, lung, infection);
    return max_fd_error(objective, {{logits.data.data(), logits.size()}},
                        {res.grad_logits.data.data()});
}

double grad_check_model(std::uint64_t seed) {
    ModelConfig cfg;
    cfg.input_channels = 1;
    cfg.stem_width = 2;
    cfg.stage_widths = {2, 4, 4};
    cfg.stage_blocks = {1, 1, 1};
    cfg.aspp_rates = {1, 2};
    cfg.aspp_width = 4;
    cfg.low_level_width = 2;
    cfg.decoder_width = 4;
    cfg.output_stride = 8;
    cfg.norm_groups = 2;

    SegModel model(cfg);
    model.init_params(seed);

    std::mt19937_64 rng(mix_seed(seed, 7));
    Tensor x(1, 1, 16, 16);
    fill_uniform(x.data, rng, 0.0, 1.0);
    Tensor lung(1, 1, 16, 16), infection(1, 1, 16, 16);
    for (auto& v : lung.data) v = uniform01(rng) < 0.5 ? 1.0 : 0.0;
    for (auto& v : infection.data) v = uniform01(rng) < 0.25 ? 1.0 : 0.0;

    auto objective = [&]() { return seg_loss(model.forward(x), lung, infection); };

    LossResult res = seg_loss_with_grad(model.forward(x), lung, infection);
    Tensor grad_x = model.backward(res.grad_logits);

    std::vector<std::pair<double*, std::size_t>> blocks{{x.data.data(), x.size()}};
    std::vector<std::vector<double>> grads;
    grads.emplace_back(grad_x.data);
    std::vector<ParamView> views;
    model.visit_params([&views](const ParamView& p) { views.push_back(p); });
    for (const auto& p : views) {
        blocks.emplace_back(p.value, p.count);
        grads.emplace_back(p.grad, p.grad + p.count);
    }
    std::vector<const double*> analytic;
    for (const auto& g : grads) analytic.push_back(g.data());
    return max_fd_error(objective, blocks, analytic);
}

}  // namespace ctvol
