#include "ctvol/model.hpp"

#include <cmath>

#include "ctvol/rng.hpp"
#include <json.hpp>

namespace ctvol {

void ModelConfig::validate() const {
    if (input_channels < 1) throw ConfigInvalid("model: input_channels must be >= 1");
    if (output_channels != 2) throw ConfigInvalid("model: output_channels must be 2");
    if (stage_widths.empty() || stage_widths.size() != stage_blocks.size())
        throw ConfigInvalid("model: stage widths/blocks mismatch");
    if (aspp_rates.empty()) throw EmptyRates("model: aspp_rates must be nonempty");
    for (std::size_t i = 1; i < aspp_rates.size(); ++i)
        if (aspp_rates[i] <= aspp_rates[i - 1])
            throw ConfigInvalid("model: aspp_rates must be strictly increasing");
    if (aspp_rates[0] < 1) throw ConfigInvalid("model: aspp rates must be >= 1");
    if (output_stride != (1 << stage_widths.size()))
        throw ConfigInvalid("model: output_stride must equal 2^num_stages");
    if (norm_groups < 1) throw ConfigInvalid("model: norm_groups must be >= 1");
    auto divisible = [this](int w) { return w % norm_groups == 0; };
    if (!divisible(stem_width) || !divisible(low_level_width) || !divisible(decoder_width))
        throw ConfigInvalid("model: widths must be divisible by norm_groups");
    for (int w : stage_widths)
        if (!divisible(w)) throw ConfigInvalid("model: stage widths must be divisible by norm_groups");
    for (int b : stage_blocks)
        if (b < 1) throw ConfigInvalid("model: each stage needs >= 1 block");
}

std::string model_config_to_json(const ModelConfig& cfg) {
    nlohmann::json j;
    j["input_channels"] = cfg.input_channels;
    j["stem_width"] = cfg.stem_width;
    j["stage_widths"] = cfg.stage_widths;
    j["stage_blocks"] = cfg.stage_blocks;
    j["aspp_rates"] = cfg.aspp_rates;
    j["aspp_width"] = cfg.aspp_width;
    j["low_level_width"] = cfg.low_level_width;
    j["decoder_width"] = cfg.decoder_width;
    j["output_channels"] = cfg.output_channels;
    j["output_stride"] = cfg.output_stride;
    j["norm_groups"] = cfg.norm_groups;
    return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("model config: bad JSON: ") + e.what());
    }
    ModelConfig cfg;
    try {
        cfg.input_channels = j.value("input_channels", cfg.input_channels);
        cfg.stem_width = j.value("stem_width", cfg.stem_width);
        cfg.stage_widths = j.value("stage_widths", cfg.stage_widths);
        cfg.stage_blocks = j.value("stage_blocks", cfg.stage_blocks);
        cfg.aspp_rates = j.value("aspp_rates", cfg.aspp_rates);
        cfg.aspp_width = j.value("aspp_width", cfg.aspp_width);
        cfg.low_level_width = j.value("low_level_width", cfg.low_level_width);
        cfg.decoder_width = j.value("decoder_width", cfg.decoder_width);
        cfg.output_channels = j.value("output_channels", cfg.output_channels);
        cfg.output_stride = j.value("output_stride", cfg.output_stride);
        cfg.norm_groups = j.value("norm_groups", cfg.norm_groups);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("model config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Layer wrappers

Conv2d::Conv2d(std::string name, int c_in, int c_out, int k, int stride, int dilation,
               int padding)
    : name_(std::move(name)) {
    params.weights = Tensor(c_out, c_in, k, k);
    params.bias.assign(c_out, 0.0);
    params.stride = stride;
    params.dilation = dilation;
    params.padding = padding;
    grad_w = Tensor(c_out, c_in, k, k);
    grad_b.assign(c_out, 0.0);
}

Tensor Conv2d::forward(const Tensor& x) {
    x_cache_ = x;
    return conv2d_forward(x, params);
}

Tensor Conv2d::backward(const Tensor& grad_out) {
    ConvGrads g = conv2d_backward(x_cache_, params, grad_out);
    grad_w = std::move(g.grad_w);
    grad_b = std::move(g.grad_b);
    return std::move(g.grad_x);
}

void Conv2d::visit(const ParamVisitor& v) {
    v(ParamView{name_ + ".w", params.weights.data.data(), grad_w.data.data(),
                params.weights.size(),
                {params.weights.n, params.weights.c, params.weights.h, params.weights.w}});
    v(ParamView{name_ + ".b", params.bias.data(), grad_b.data(), params.bias.size(),
                {static_cast<int>(params.bias.size())}});
}

GroupNorm::GroupNorm(std::string name, int channels, int groups) : name_(std::move(name)) {
    params.gamma.assign(channels, 1.0);
    params.beta.assign(channels, 0.0);
    params.groups = groups;
    grad_gamma.assign(channels, 0.0);
    grad_beta.assign(channels, 0.0);
}

Tensor GroupNorm::forward(const Tensor& x) { return group_norm_forward(x, params, &cache_); }

Tensor GroupNorm::backward(const Tensor& grad_out) {
    GroupNormGrads g = group_norm_backward(params, cache_, grad_out);
    grad_gamma = std::move(g.grad_gamma);
    grad_beta = std::move(g.grad_beta);
    return std::move(g.grad_x);
}

void GroupNorm::visit(const ParamVisitor& v) {
    v(ParamView{name_ + ".gamma", params.gamma.data(), grad_gamma.data(), params.gamma.size(),
                {static_cast<int>(params.gamma.size())}});
    v(ParamView{name_ + ".beta", params.beta.data(), grad_beta.data(), params.beta.size(),
                {static_cast<int>(params.beta.size())}});
}

Tensor Relu::forward(const Tensor& x) {
    out_cache_ = relu_forward(x);
    return out_cache_;
}

Tensor Relu::backward(const Tensor& grad_out) { return relu_backward(out_cache_, grad_out); }

// ---------------------------------------------------------------------------
// Residual block

ResidualBlock::ResidualBlock(std::string name, int c_in, int c_out, int stride, int groups)
    : conv1_(name + ".conv1", c_in, c_out, 3, stride, 1, 1),
      conv2_(name + ".conv2", c_out, c_out, 3, 1, 1, 1),
      gn1_(name + ".gn1", c_out, groups),
      gn2_(name + ".gn2", c_out, groups) {
    if (stride != 1 || c_in != c_out)
        projection_.emplace(name + ".proj", c_in, c_out, 1, stride, 1, 0);
}

Tensor ResidualBlock::forward(const Tensor& x) {
    x_cache_ = x;
    Tensor f = gn2_.forward(conv2_.forward(relu1_.forward(gn1_.forward(conv1_.forward(x)))));
    Tensor s = projection_ ? projection_->forward(x) : x;
    if (!f.same_shape(s)) throw ShapeMismatch("residual_block: branch shapes diverge");
    for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] += s.data[i];
    return relu_out_.forward(f);
}

Tensor ResidualBlock::backward(const Tensor& grad_out) {
    Tensor g = relu_out_.backward(grad_out);
    // g flows into both the residual branch and the shortcut
    Tensor gf = gn2_.backward(g);
    gf = conv2_.backward(gf);
    gf = relu1_.backward(gf);
    gf = gn1_.backward(gf);
    Tensor gx = conv1_.backward(gf);
    Tensor gs = projection_ ? projection_->backward(g) : g;
    for (std::size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += gs.data[i];
    return gx;
}

void ResidualBlock::visit(const ParamVisitor& v) {
    conv1_.visit(v);
    gn1_.visit(v);
    conv2_.visit(v);
    gn2_.visit(v);
    if (projection_) projection_->visit(v);
}

// ---------------------------------------------------------------------------
// ASPP

Aspp::Aspp(std::string name, int c_in, int c_out, std::vector<int> rates)
    : rates_(std::move(rates)),
      conv1x1_(name + ".b0", c_in, c_out, 1),
      pool_conv_(name + ".pool", c_in, c_out, 1),
      project_(name + ".project", c_out * (2 + static_cast<int>(rates_.size())), c_out, 1) {
    if (rates_.empty()) throw EmptyRates("aspp: no dilation rates");
    for (std::size_t i = 0; i < rates_.size(); ++i)
        rate_convs_.push_back(std::make_unique<Conv2d>(
            name + ".b" + std::to_string(i + 1), c_in, c_out, 3, 1, rates_[i], rates_[i]));
}

Tensor Aspp::forward(const Tensor& x) {
    in_h_ = x.h;
    in_w_ = x.w;
    std::vector<Tensor> branches;
    branches.push_back(conv1x1_.forward(x));
    for (auto& conv : rate_convs_) branches.push_back(conv->forward(x));
    Tensor pooled = pool_conv_.forward(global_avg_pool(x));
    branches.push_back(broadcast_hw(pooled, x.h, x.w));

    std::vector<const Tensor*> ptrs;
    for (const auto& b : branches) ptrs.push_back(&b);
    return project_.forward(concat_channels(ptrs));
}

Tensor Aspp::backward(const Tensor& grad_out) {
    Tensor gcat = project_.backward(grad_out);
    const int width = conv1x1_.params.c_out();
    std::vector<int> widths(2 + rate_convs_.size(), width);
    std::vector<Tensor> parts = split_channels(gcat, widths);

    Tensor gx = conv1x1_.backward(parts[0]);
    for (std::size_t i = 0; i < rate_convs_.size(); ++i) {
        Tensor gi = rate_convs_[i]->backward(parts[1 + i]);
        for (std::size_t k = 0; k < gx.data.size(); ++k) gx.data[k] += gi.data[k];
    }
    Tensor gpool = pool_conv_.backward(broadcast_hw_backward(parts.back()));
    Tensor gpool_x = global_avg_pool_backward(gpool, in_h_, in_w_);
    for (std::size_t k = 0; k < gx.data.size(); ++k) gx.data[k] += gpool_x.data[k];
    return gx;
}

void Aspp::visit(const ParamVisitor& v) {
    conv1x1_.visit(v);
    for (auto& conv : rate_convs_) conv->visit(v);
    pool_conv_.visit(v);
    project_.visit(v);
}

// ---------------------------------------------------------------------------
// Full model

namespace {

ModelConfig validated(ModelConfig cfg) {
    cfg.validate();
    return cfg;
}

}  // namespace

SegModel::SegModel(ModelConfig cfg)
    : cfg_(validated(std::move(cfg))),
      stem_conv_("stem.conv", cfg_.input_channels, cfg_.stem_width, 3, 1, 1, 1),
      stem_gn_("stem.gn", cfg_.stem_width, cfg_.norm_groups),
      aspp_("aspp", cfg_.stage_widths.back(), cfg_.aspp_width, cfg_.aspp_rates),
      low_proj_conv_("decoder.low_proj.conv", cfg_.stage_widths.front(), cfg_.low_level_width, 1),
      low_proj_gn_("decoder.low_proj.gn", cfg_.low_level_width, cfg_.norm_groups),
      dec_conv1_("decoder.conv1", cfg_.aspp_width + cfg_.low_level_width, cfg_.decoder_width, 3,
                 1, 1, 1),
      dec_gn1_("decoder.gn1", cfg_.decoder_width, cfg_.norm_groups),
      dec_conv2_("decoder.conv2", cfg_.decoder_width, cfg_.decoder_width, 3, 1, 1, 1),
      dec_gn2_("decoder.gn2", cfg_.decoder_width, cfg_.norm_groups),
      head_("head", cfg_.decoder_width, cfg_.output_channels, 1) {
    int c_in = cfg_.stem_width;
    for (std::size_t s = 0; s < cfg_.stage_widths.size(); ++s) {
        const int width = cfg_.stage_widths[s];
        for (int b = 0; b < cfg_.stage_blocks[s]; ++b) {
            const int stride = b == 0 ? 2 : 1;
            blocks_.push_back(std::make_unique<ResidualBlock>(
                "stage" + std::to_string(s) + ".block" + std::to_string(b), c_in, width, stride,
                cfg_.norm_groups));
            c_in = width;
        }
        if (s == 0) low_level_block_ = blocks_.size();
    }
    up1_ = 1 << (static_cast<int>(cfg_.stage_widths.size()) - 1);
    up2_ = 2;
}

void SegModel::init_params(std::uint64_t seed) {
    NormalSampler normal(mix_seed(seed, 0x5e6e));
    visit_params([&normal](const ParamView& p) {
        if (p.name.size() >= 2 && p.name.compare(p.name.size() - 2, 2, ".w") == 0) {
            // He-normal: std = sqrt(2 / fan_in)
            const std::size_t fan_in =
                static_cast<std::size_t>(p.shape[1]) * p.shape[2] * p.shape[3];
            const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
            for (std::size_t i = 0; i < p.count; ++i) p.value[i] = stddev * normal.next();
        } else if (p.name.size() >= 6 &&
                   p.name.compare(p.name.size() - 6, 6, ".gamma") == 0) {
            for (std::size_t i = 0; i < p.count; ++i) p.value[i] = 1.0;
        } else {
            for (std::size_t i = 0; i < p.count; ++i) p.value[i] = 0.0;
        }
    });
}

Tensor SegModel::forward(const Tensor& batch) {
    if (batch.c != cfg_.input_channels)
        throw ChannelMismatch("model: batch channels do not match config");
    in_h_ = batch.h;
    in_w_ = batch.w;

    Tensor x = stem_relu_.forward(stem_gn_.forward(stem_conv_.forward(batch)));
    Tensor low;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        x = blocks_[i]->forward(x);
        if (i + 1 == low_level_block_) low = x;
    }
    enc_h_ = x.h;
    enc_w_ = x.w;
    low_h_ = low.h;
    low_w_ = low.w;

    Tensor ctx = bilinear_upsample(aspp_.forward(x), up1_);
    Tensor low_proj = low_proj_relu_.forward(low_proj_gn_.forward(low_proj_conv_.forward(low)));
    if (ctx.h != low_proj.h || ctx.w != low_proj.w)
        throw ShapeMismatch("model: decoder feature sizes diverge");

    Tensor fused = concat_channels({&ctx, &low_proj});
    Tensor d = dec_relu1_.forward(dec_gn1_.forward(dec_conv1_.forward(fused)));
    d = dec_relu2_.forward(dec_gn2_.forward(dec_conv2_.forward(d)));
    Tensor logits = head_.forward(bilinear_upsample(d, up2_));
    CTVOL_DEBUG_CHECK_FINITE(logits, "model_forward");
    return logits;
}

Tensor SegModel::backward(const Tensor& grad_logits) {
    Tensor g = head_.backward(grad_logits);
    g = bilinear_upsample_backward(g, low_h_, low_w_, up2_);
    g = dec_gn2_.backward(dec_relu2_.backward(g));
    g = dec_conv2_.backward(g);
    g = dec_gn1_.backward(dec_relu1_.backward(g));
    g = dec_conv1_.backward(g);

    std::vector<Tensor> parts = split_channels(g, {cfg_.aspp_width, cfg_.low_level_width});
    Tensor g_low = low_proj_conv_.backward(
        low_proj_gn_.backward(low_proj_relu_.backward(parts[1])));
    Tensor g_enc = aspp_.backward(bilinear_upsample_backward(parts[0], enc_h_, enc_w_, up1_));

    for (std::size_t i = blocks_.size(); i-- > 0;) {
        if (i + 1 == low_level_block_)
            for (std::size_t k = 0; k < g_enc.data.size(); ++k) g_enc.data[k] += g_low.data[k];
        g_enc = blocks_[i]->backward(g_enc);
    }
    g_enc = stem_gn_.backward(stem_relu_.backward(g_enc));
    return stem_conv_.backward(g_enc);
}

void SegModel::visit_params(const ParamVisitor& v) {
    stem_conv_.visit(v);
    stem_gn_.visit(v);
    for (auto& b : blocks_) b->visit(v);
    aspp_.visit(v);
    low_proj_conv_.visit(v);
    low_proj_gn_.visit(v);
    dec_conv1_.visit(v);
    dec_gn1_.visit(v);
    dec_conv2_.visit(v);
    dec_gn2_.visit(v);
    head_.visit(v);
}

std::size_t SegModel::param_count() {
    std::size_t total = 0;
    visit_params([&total](const ParamView& p) { total += p.count; });
    return total;
}

}  // namespace ctvol
