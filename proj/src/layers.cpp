#include "ctvol/layers.hpp"

#include <cmath>

namespace ctvol {

namespace {

// col is (C_in*k*k) x (H'*W'); zero padding outside the input.
void im2col(const Tensor& x, int sample, const ConvParams& p, int out_h, int out_w,
            std::vector<double>& col) {
    const int k = p.ksize();
    const int ci = x.c;
    const std::size_t cols = static_cast<std::size_t>(out_h) * out_w;
    col.assign(static_cast<std::size_t>(ci) * k * k * cols, 0.0);
    for (int c = 0; c < ci; ++c)
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                double* dst = col.data() + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * cols;
                for (int oy = 0; oy < out_h; ++oy) {
                    const int iy = oy * p.stride - p.padding + ky * p.dilation;
                    if (iy < 0 || iy >= x.h) continue;
                    const double* src = &x.data[((static_cast<std::size_t>(sample) * ci + c) * x.h + iy) * x.w];
                    double* row = dst + static_cast<std::size_t>(oy) * out_w;
                    for (int ox = 0; ox < out_w; ++ox) {
                        const int ix = ox * p.stride - p.padding + kx * p.dilation;
                        if (ix >= 0 && ix < x.w) row[ox] = src[ix];
                    }
                }
            }
}

// scatter-add the col layout back into an input-shaped gradient
void col2im_add(const std::vector<double>& col, int sample, const ConvParams& p, int in_h,
                int in_w, int in_c, int out_h, int out_w, Tensor& grad_x) {
    const int k = p.ksize();
    const std::size_t cols = static_cast<std::size_t>(out_h) * out_w;
    for (int c = 0; c < in_c; ++c)
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                const double* src = col.data() + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * cols;
                for (int oy = 0; oy < out_h; ++oy) {
                    const int iy = oy * p.stride - p.padding + ky * p.dilation;
                    if (iy < 0 || iy >= in_h) continue;
                    double* dst = &grad_x.data[((static_cast<std::size_t>(sample) * in_c + c) * in_h + iy) * in_w];
                    const double* row = src + static_cast<std::size_t>(oy) * out_w;
                    for (int ox = 0; ox < out_w; ++ox) {
                        const int ix = ox * p.stride - p.padding + kx * p.dilation;
                        if (ix >= 0 && ix < in_w) dst[ix] += row[ox];
                    }
                }
            }
}

}  // namespace

std::pair<int, int> conv2d_output_hw(int h, int w, const ConvParams& p) {
    const int k = p.ksize();
    const int eff = p.dilation * (k - 1) + 1;
    const int oh = (h + 2 * p.padding - eff) / p.stride + 1;
    const int ow = (w + 2 * p.padding - eff) / p.stride + 1;
    if (h + 2 * p.padding < eff || w + 2 * p.padding < eff || oh <= 0 || ow <= 0)
        throw NonPositiveOutputSize("conv2d: output size would be non-positive");
    return {oh, ow};
}

Tensor conv2d_forward(const Tensor& x, const ConvParams& p) {
    if (x.c != p.c_in()) throw ChannelMismatch("conv2d: input channels do not match weights");
    const auto [oh, ow] = conv2d_output_hw(x.h, x.w, p);
    const int co = p.c_out();
    const int kk = p.c_in() * p.ksize() * p.ksize();
    const std::size_t cols = static_cast<std::size_t>(oh) * ow;

    Tensor out(x.n, co, oh, ow);
    std::vector<double> col;
    for (int sample = 0; sample < x.n; ++sample) {
        im2col(x, sample, p, oh, ow, col);
        // out[co_i][:] = sum_k w[co_i][k] * col[k][:]
        for (int o = 0; o < co; ++o) {
            double* dst = &out.data[(static_cast<std::size_t>(sample) * co + o) * cols];
            for (std::size_t i = 0; i < cols; ++i) dst[i] = p.bias[o];
            const double* wrow = &p.weights.data[static_cast<std::size_t>(o) * kk];
            for (int q = 0; q < kk; ++q) {
                const double wv = wrow[q];
                if (wv == 0.0) continue;
                const double* crow = col.data() + static_cast<std::size_t>(q) * cols;
                for (std::size_t i = 0; i < cols; ++i) dst[i] += wv * crow[i];
            }
        }
    }
    CTVOL_DEBUG_CHECK_FINITE(out, "conv2d_forward");
    return out;
}

ConvGrads conv2d_backward(const Tensor& x, const ConvParams& p, const Tensor& grad_out) {
    if (x.c != p.c_in()) throw ChannelMismatch("conv2d: input channels do not match weights");
    const auto [oh, ow] = conv2d_output_hw(x.h, x.w, p);
    if (grad_out.n != x.n || grad_out.c != p.c_out() || grad_out.h != oh || grad_out.w != ow)
        throw ShapeMismatch("conv2d_backward: grad_out shape inconsistent with forward");

    const int co = p.c_out();
    const int kk = p.c_in() * p.ksize() * p.ksize();
    const std::size_t cols = static_cast<std::size_t>(oh) * ow;

    ConvGrads g;
    g.grad_x = Tensor(x.n, x.c, x.h, x.w);
    g.grad_w = Tensor(p.weights.n, p.weights.c, p.weights.h, p.weights.w);
    g.grad_b.assign(co, 0.0);

    std::vector<double> col, gcol(static_cast<std::size_t>(kk) * cols);
    for (int sample = 0; sample < x.n; ++sample) {
        im2col(x, sample, p, oh, ow, col);
        std::fill(gcol.begin(), gcol.end(), 0.0);
        for (int o = 0; o < co; ++o) {
            const double* go = &grad_out.data[(static_cast<std::size_t>(sample) * co + o) * cols];
            double bsum = 0.0;
            for (std::size_t i = 0; i < cols; ++i) bsum += go[i];
            g.grad_b[o] += bsum;

            double* gw = &g.grad_w.data[static_cast<std::size_t>(o) * kk];
            const double* wrow = &p.weights.data[static_cast<std::size_t>(o) * kk];
            for (int q = 0; q < kk; ++q) {
                const double* crow = col.data() + static_cast<std::size_t>(q) * cols;
                double acc = 0.0;
                for (std::size_t i = 0; i < cols; ++i) acc += go[i] * crow[i];
                gw[q] += acc;

                const double wv = wrow[q];
                if (wv == 0.0) continue;
                double* gcrow = gcol.data() + static_cast<std::size_t>(q) * cols;
                for (std::size_t i = 0; i < cols; ++i) gcrow[i] += wv * go[i];
            }
        }
        col2im_add(gcol, sample, p, x.h, x.w, x.c, oh, ow, g.grad_x);
    }
    return g;
}

Tensor group_norm_forward(const Tensor& x, const GroupNormParams& p, GroupNormCache* cache) {
    if (x.c % p.groups != 0)
        throw ChannelMismatch("group_norm: channels not divisible by groups");
    if (static_cast<int>(p.gamma.size()) != x.c || static_cast<int>(p.beta.size()) != x.c)
        throw ShapeMismatch("group_norm: gamma/beta size mismatch");

    const int cpg = x.c / p.groups;
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    const std::size_t gsize = static_cast<std::size_t>(cpg) * plane;

    Tensor out(x.n, x.c, x.h, x.w);
    if (cache) {
        cache->xhat = Tensor(x.n, x.c, x.h, x.w);
        cache->inv_std.assign(static_cast<std::size_t>(x.n) * p.groups, 0.0);
    }
    for (int sample = 0; sample < x.n; ++sample)
        for (int g = 0; g < p.groups; ++g) {
            const std::size_t base =
                (static_cast<std::size_t>(sample) * x.c + static_cast<std::size_t>(g) * cpg) * plane;
            double mean = 0.0;
            for (std::size_t i = 0; i < gsize; ++i) mean += x.data[base + i];
            mean /= static_cast<double>(gsize);
            double var = 0.0;
            for (std::size_t i = 0; i < gsize; ++i) {
                const double d = x.data[base + i] - mean;
                var += d * d;
            }
            var /= static_cast<double>(gsize);
            const double inv_std = 1.0 / std::sqrt(var + p.eps);
            if (cache) cache->inv_std[static_cast<std::size_t>(sample) * p.groups + g] = inv_std;
            for (int c = 0; c < cpg; ++c) {
                const int ch = g * cpg + c;
                const double ga = p.gamma[ch], be = p.beta[ch];
                const std::size_t cbase = base + static_cast<std::size_t>(c) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const double xh = (x.data[cbase + i] - mean) * inv_std;
                    if (cache) cache->xhat.data[cbase + i] = xh;
                    out.data[cbase + i] = ga * xh + be;
                }
            }
        }
    CTVOL_DEBUG_CHECK_FINITE(out, "group_norm_forward");
    return out;
}

GroupNormGrads group_norm_backward(const GroupNormParams& p, const GroupNormCache& cache,
                                   const Tensor& grad_out) {
    const Tensor& xhat = cache.xhat;
    if (!grad_out.same_shape(xhat))
        throw ShapeMismatch("group_norm_backward: grad shape mismatch");

    const int cpg = xhat.c / p.groups;
    const std::size_t plane = static_cast<std::size_t>(xhat.h) * xhat.w;
    const std::size_t gsize = static_cast<std::size_t>(cpg) * plane;

    GroupNormGrads g;
    g.grad_x = Tensor(xhat.n, xhat.c, xhat.h, xhat.w);
    g.grad_gamma.assign(xhat.c, 0.0);
    g.grad_beta.assign(xhat.c, 0.0);

    for (int sample = 0; sample < xhat.n; ++sample)
        for (int grp = 0; grp < p.groups; ++grp) {
            const std::size_t base =
                (static_cast<std::size_t>(sample) * xhat.c + static_cast<std::size_t>(grp) * cpg) *
                plane;
            const double inv_std =
                cache.inv_std[static_cast<std::size_t>(sample) * p.groups + grp];

            // dxhat = dy * gamma; need mean(dxhat) and mean(dxhat * xhat)
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (int c = 0; c < cpg; ++c) {
                const int ch = grp * cpg + c;
                const double ga = p.gamma[ch];
                const std::size_t cbase = base + static_cast<std::size_t>(c) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const double dy = grad_out.data[cbase + i];
                    const double xh = xhat.data[cbase + i];
                    g.grad_gamma[ch] += dy * xh;
                    g.grad_beta[ch] += dy;
                    const double dxh = dy * ga;
                    sum_dxhat += dxh;
                    sum_dxhat_xhat += dxh * xh;
                }
            }
            const double mean_dxhat = sum_dxhat / static_cast<double>(gsize);
            const double mean_dxhat_xhat = sum_dxhat_xhat / static_cast<double>(gsize);
            for (int c = 0; c < cpg; ++c) {
                const int ch = grp * cpg + c;
                const double ga = p.gamma[ch];
                const std::size_t cbase = base + static_cast<std::size_t>(c) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const double dxh = grad_out.data[cbase + i] * ga;
                    const double xh = xhat.data[cbase + i];
                    g.grad_x.data[cbase + i] =
                        inv_std * (dxh - mean_dxhat - xh * mean_dxhat_xhat);
                }
            }
        }
    return g;
}

Tensor relu_forward(const Tensor& x) {
    Tensor out = x;
    for (auto& v : out.data)
        if (v < 0.0) v = 0.0;
    return out;
}

Tensor relu_backward(const Tensor& out, const Tensor& grad_out) {
    if (!out.same_shape(grad_out)) throw ShapeMismatch("relu_backward: shape mismatch");
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.data.size(); ++i)
        if (out.data[i] <= 0.0) g.data[i] = 0.0;
    return g;
}

Tensor bilinear_upsample(const Tensor& x, int factor) {
    if (factor < 1) throw ConfigInvalid("bilinear_upsample: factor must be >= 1");
    if (factor == 1) return x;
    const int oh = x.h * factor, ow = x.w * factor;
    Tensor out(x.n, x.c, oh, ow);
    const double inv = 1.0 / factor;
    for (int oy = 0; oy < oh; ++oy) {
        const double sy = (oy + 0.5) * inv - 0.5;
        int y0 = static_cast<int>(std::floor(sy));
        const double fy = sy - y0;
        int y1 = y0 + 1;
        y0 = y0 < 0 ? 0 : (y0 >= x.h ? x.h - 1 : y0);
        y1 = y1 < 0 ? 0 : (y1 >= x.h ? x.h - 1 : y1);
        for (int ox = 0; ox < ow; ++ox) {
            const double sx = (ox + 0.5) * inv - 0.5;
            int x0 = static_cast<int>(std::floor(sx));
            const double fx = sx - x0;
            int x1 = x0 + 1;
            x0 = x0 < 0 ? 0 : (x0 >= x.w ? x.w - 1 : x0);
            x1 = x1 < 0 ? 0 : (x1 >= x.w ? x.w - 1 : x1);
            const double w00 = (1.0 - fy) * (1.0 - fx), w01 = (1.0 - fy) * fx;
            const double w10 = fy * (1.0 - fx), w11 = fy * fx;
            for (int sample = 0; sample < x.n; ++sample)
                for (int c = 0; c < x.c; ++c)
                    out.at(sample, c, oy, ox) = w00 * x.at(sample, c, y0, x0) +
                                                w01 * x.at(sample, c, y0, x1) +
                                                w10 * x.at(sample, c, y1, x0) +
                                                w11 * x.at(sample, c, y1, x1);
        }
    }
    return out;
}

Tensor bilinear_upsample_backward(const Tensor& grad_out, int in_h, int in_w, int factor) {
    if (factor == 1) return grad_out;
    Tensor g(grad_out.n, grad_out.c, in_h, in_w);
    const double inv = 1.0 / factor;
    for (int oy = 0; oy < grad_out.h; ++oy) {
        const double sy = (oy + 0.5) * inv - 0.5;
        int y0 = static_cast<int>(std::floor(sy));
        const double fy = sy - y0;
        int y1 = y0 + 1;
        y0 = y0 < 0 ? 0 : (y0 >= in_h ? in_h - 1 : y0);
        y1 = y1 < 0 ? 0 : (y1 >= in_h ? in_h - 1 : y1);
        for (int ox = 0; ox < grad_out.w; ++ox) {
            const double sx = (ox + 0.5) * inv - 0.5;
            int x0 = static_cast<int>(std::floor(sx));
            const double fx = sx - x0;
            int x1 = x0 + 1;
            x0 = x0 < 0 ? 0 : (x0 >= in_w ? in_w - 1 : x0);
            x1 = x1 < 0 ? 0 : (x1 >= in_w ? in_w - 1 : x1);
            const double w00 = (1.0 - fy) * (1.0 - fx), w01 = (1.0 - fy) * fx;
            const double w10 = fy * (1.0 - fx), w11 = fy * fx;
            for (int sample = 0; sample < grad_out.n; ++sample)
                for (int c = 0; c < grad_out.c; ++c) {
                    const double go = grad_out.at(sample, c, oy, ox);
                    g.at(sample, c, y0, x0) += w00 * go;
                    g.at(sample, c, y0, x1) += w01 * go;
                    g.at(sample, c, y1, x0) += w10 * go;
                    g.at(sample, c, y1, x1) += w11 * go;
                }
        }
    }
    return g;
}

Tensor global_avg_pool(const Tensor& x) {
    Tensor out(x.n, x.c, 1, 1);
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int sample = 0; sample < x.n; ++sample)
        for (int c = 0; c < x.c; ++c) {
            const double* src = &x.data[(static_cast<std::size_t>(sample) * x.c + c) * plane];
            double acc = 0.0;
            for (std::size_t i = 0; i < plane; ++i) acc += src[i];
            out.at(sample, c, 0, 0) = acc / static_cast<double>(plane);
        }
    return out;
}

Tensor global_avg_pool_backward(const Tensor& grad_out, int h, int w) {
    Tensor g(grad_out.n, grad_out.c, h, w);
    const double inv = 1.0 / (static_cast<double>(h) * w);
    for (int sample = 0; sample < grad_out.n; ++sample)
        for (int c = 0; c < grad_out.c; ++c) {
            const double v = grad_out.at(sample, c, 0, 0) * inv;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) g.at(sample, c, y, x) = v;
        }
    return g;
}

Tensor broadcast_hw(const Tensor& x, int h, int w) {
    if (x.h != 1 || x.w != 1) throw ShapeMismatch("broadcast_hw: expected (N, C, 1, 1)");
    Tensor out(x.n, x.c, h, w);
    for (int sample = 0; sample < x.n; ++sample)
        for (int c = 0; c < x.c; ++c) {
            const double v = x.at(sample, c, 0, 0);
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx) out.at(sample, c, y, xx) = v;
        }
    return out;
}

Tensor broadcast_hw_backward(const Tensor& grad_out) {
    Tensor g(grad_out.n, grad_out.c, 1, 1);
    for (int sample = 0; sample < grad_out.n; ++sample)
        for (int c = 0; c < grad_out.c; ++c) {
            double acc = 0.0;
            for (int y = 0; y < grad_out.h; ++y)
                for (int x = 0; x < grad_out.w; ++x) acc += grad_out.at(sample, c, y, x);
            g.at(sample, c, 0, 0) = acc;
        }
    return g;
}

Tensor concat_channels(const std::vector<const Tensor*>& xs) {
    if (xs.empty()) throw ShapeMismatch("concat_channels: nothing to concatenate");
    int total_c = 0;
    for (const Tensor* t : xs) {
        if (t->n != xs[0]->n || t->h != xs[0]->h || t->w != xs[0]->w)
            throw ShapeMismatch("concat_channels: spatial/batch dims differ");
        total_c += t->c;
    }
    Tensor out(xs[0]->n, total_c, xs[0]->h, xs[0]->w);
    const std::size_t plane = static_cast<std::size_t>(out.h) * out.w;
    for (int sample = 0; sample < out.n; ++sample) {
        int c_off = 0;
        for (const Tensor* t : xs) {
            for (int c = 0; c < t->c; ++c) {
                const double* src = &t->data[(static_cast<std::size_t>(sample) * t->c + c) * plane];
                double* dst =
                    &out.data[(static_cast<std::size_t>(sample) * total_c + c_off + c) * plane];
                for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i];
            }
            c_off += t->c;
        }
    }
    return out;
}

std::vector<Tensor> split_channels(const Tensor& x, const std::vector<int>& widths) {
    int total = 0;
    for (int w : widths) total += w;
    if (total != x.c) throw ShapeMismatch("split_channels: widths do not sum to channels");
    std::vector<Tensor> parts;
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    int c_off = 0;
    for (int wc : widths) {
        Tensor part(x.n, wc, x.h, x.w);
        for (int sample = 0; sample < x.n; ++sample)
            for (int c = 0; c < wc; ++c) {
                const double* src =
                    &x.data[(static_cast<std::size_t>(sample) * x.c + c_off + c) * plane];
                double* dst = &part.data[(static_cast<std::size_t>(sample) * wc + c) * plane];
                for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i];
            }
        parts.push_back(std::move(part));
        c_off += wc;
    }
    return parts;
}

}  // namespace ctvol
