#pragma once

#include <cstdint>
#include <vector>

#include "ctvol/loss.hpp"
#include "ctvol/model.hpp"

namespace ctvol {

// Adam with bias correction; state vectors follow the model's visit order.
class Adam {
public:
    explicit Adam(SegModel& model, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

    void step(SegModel& model, double lr);
    std::uint64_t steps_taken() const { return t_; }

private:
    double beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
    std::vector<double> m_, v_;
};

// One forward/backward/update cycle. Throws NonFiniteLoss when training
// diverges. Deterministic given (model, optimizer state, batch).
double train_step(SegModel& model, Adam& optimizer, const Tensor& batch, const Tensor& lung_gt,
                  const Tensor& infection_gt, double lr);

}  // namespace ctvol
