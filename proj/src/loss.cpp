#include "ctvol/loss.hpp"

#include <cmath>

namespace ctvol {

namespace {

constexpr double kDiceEps = 1.0;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^-|z|) + max(z,0) - z*t, the overflow-safe BCE
double bce_term(double z, double t) {
    return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - z * t;
}

void check_shapes(const Tensor& logits, const Tensor& lung_gt, const Tensor& infection_gt) {
    if (logits.c != 2) throw ShapeMismatch("loss: logits must have 2 channels");
    if (lung_gt.n != logits.n || lung_gt.c != 1 || lung_gt.h != logits.h ||
        lung_gt.w != logits.w)
        throw ShapeMismatch("loss: lung target shape mismatch");
    if (!infection_gt.same_shape(lung_gt))
        throw ShapeMismatch("loss: infection target shape mismatch");
    for (double v : lung_gt.data)
        if (v != 0.0 && v != 1.0) throw NonBinaryMask("loss: lung target not binary");
    for (double v : infection_gt.data)
        if (v != 0.0 && v != 1.0) throw NonBinaryMask("loss: infection target not binary");
}

struct ChannelStats {
    double bce_sum = 0.0;
    double inter = 0.0;   // sum p*t
    double p_sum = 0.0;
    double t_sum = 0.0;
};

ChannelStats channel_stats(const Tensor& logits, int channel, const Tensor& gt) {
    ChannelStats s;
    const std::size_t plane = static_cast<std::size_t>(logits.h) * logits.w;
    for (int n = 0; n < logits.n; ++n) {
        const double* z = &logits.data[(static_cast<std::size_t>(n) * logits.c + channel) * plane];
        const double* t = &gt.data[static_cast<std::size_t>(n) * plane];
        for (std::size_t i = 0; i < plane; ++i) {
            const double p = sigmoid(z[i]);
            s.bce_sum += bce_term(z[i], t[i]);
            s.inter += p * t[i];
            s.p_sum += p;
            s.t_sum += t[i];
        }
    }
    return s;
}

}  // namespace

double seg_loss(const Tensor& logits, const Tensor& lung_gt, const Tensor& infection_gt) {
    check_shapes(logits, lung_gt, infection_gt);
    const double pixels = static_cast<double>(logits.n) * logits.h * logits.w;
    double total = 0.0;
    for (int channel = 0; channel < 2; ++channel) {
        const Tensor& gt = channel == 0 ? lung_gt : infection_gt;
        ChannelStats s = channel_stats(logits, channel, gt);
        const double dice = (2.0 * s.inter + kDiceEps) / (s.p_sum + s.t_sum + kDiceEps);
        total += s.bce_sum / pixels + (1.0 - dice);
    }
    return total / 2.0;
}

LossResult seg_loss_with_grad(const Tensor& logits, const Tensor& lung_gt,
                              const Tensor& infection_gt) {
    check_shapes(logits, lung_gt, infection_gt);
    const double pixels = static_cast<double>(logits.n) * logits.h * logits.w;
    const std::size_t plane = static_cast<std::size_t>(logits.h) * logits.w;

    LossResult out;
    out.grad_logits = Tensor(logits.n, logits.c, logits.h, logits.w);
    double total = 0.0;
    for (int channel = 0; channel < 2; ++channel) {
        const Tensor& gt = channel == 0 ? lung_gt : infection_gt;
        ChannelStats s = channel_stats(logits, channel, gt);
        const double denom = s.p_sum + s.t_sum + kDiceEps;
        const double numer = 2.0 * s.inter + kDiceEps;
        total += s.bce_sum / pixels + (1.0 - numer / denom);

        // d(1 - dice)/dp_i = (numer - 2 t_i denom) / denom^2,
        // dBCE/dz_i = (p_i - t_i)/pixels, dp/dz = p(1-p); halved for the
        // mean over the two channels
        for (int n = 0; n < logits.n; ++n) {
            const double* z =
                &logits.data[(static_cast<std::size_t>(n) * logits.c + channel) * plane];
            const double* t = &gt.data[static_cast<std::size_t>(n) * plane];
            double* g =
                &out.grad_logits.data[(static_cast<std::size_t>(n) * logits.c + channel) * plane];
            for (std::size_t i = 0; i < plane; ++i) {
                const double p = sigmoid(z[i]);
                const double dbce = (p - t[i]) / pixels;
                const double ddice_dp = (numer - 2.0 * t[i] * denom) / (denom * denom);
                g[i] = 0.5 * (dbce + ddice_dp * p * (1.0 - p));
            }
        }
    }
    out.value = total / 2.0;
    return out;
}

}  // namespace ctvol
