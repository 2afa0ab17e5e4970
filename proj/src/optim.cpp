#include "ctvol/optim.hpp"

#include <cmath>

namespace ctvol {

Adam::Adam(SegModel& model, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
    std::size_t total = 0;
    model.visit_params([&total](const ParamView& p) { total += p.count; });
    m_.assign(total, 0.0);
    v_.assign(total, 0.0);
}

void Adam::step(SegModel& model, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::size_t off = 0;
    model.visit_params([&](const ParamView& p) {
        for (std::size_t i = 0; i < p.count; ++i) {
            const double g = p.grad[i];
            double& m = m_[off + i];
            double& v = v_[off + i];
            m = beta1_ * m + (1.0 - beta1_) * g;
            v = beta2_ * v + (1.0 - beta2_) * g * g;
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
        off += p.count;
    });
    if (off != m_.size()) throw ShapeMismatch("adam: parameter count changed under the optimizer");
}

double train_step(SegModel& model, Adam& optimizer, const Tensor& batch, const Tensor& lung_gt,
                  const Tensor& infection_gt, double lr) {
    Tensor logits = model.forward(batch);
    LossResult loss = seg_loss_with_grad(logits, lung_gt, infection_gt);
    if (!std::isfinite(loss.value))
        throw NonFiniteLoss("train_step: loss is not finite");
    model.backward(loss.grad_logits);
    if (lr != 0.0) optimizer.step(model, lr);
    return loss.value;
}

}  // namespace ctvol
