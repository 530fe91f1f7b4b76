#pragma once

#include <string>
#include <vector>

#include "snnattack/network.hpp"
#include "snnattack/tensor.hpp"

namespace snnattack {

enum class LossKind { Mse, Ce };

std::string loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

// Rectangular surrogate for the firing function's derivative: 1/a inside
// |u - u_th| <= a/2, zero outside (boundary inclusive).
Tensor surrogate_deriv(const Tensor& u, double u_th, double a);

struct LossResult {
    double value = 0.0;
    Tensor grad_rate; // dL/dy
};

// MSE compares the rate vector against the one-hot label; CE applies a
// max-subtracted softmax to the rates first.
LossResult loss(const RateVector& rate, int label, LossKind kind);

// Continuous gradient of the loss with respect to the input spike pattern,
// same (T,C,H,W) shape as the attacked input.
using InputGradient = Tensor;

struct BackwardResult {
    InputGradient input;
    std::vector<Tensor> weight_grads; // per layer, empty for avgpool
    std::vector<Tensor> bias_grads;
};

// Backpropagation through time over a recorded forward pass. Gradients flow
// spatially through the layer adjoints and temporally through the leak path
// decay * (1 - fired); the reset gate itself is treated as constant. The
// firing function uses the rectangular surrogate, with the same threshold
// (including any override) the recorded pass used.
BackwardResult backward(const NetworkModel& model, const LifState& state,
                        const Tensor& dL_drate);

struct SgdMomentum {
    double learning_rate = 0.1;
    double momentum = 0.9;
    // The LIF current has no bias term, so biases stay at zero unless a
    // config opts in.
    bool train_bias = false;
    std::vector<Tensor> velocity_w; // lazily sized to the model
    std::vector<Tensor> velocity_b;
};

struct TrainSample {
    SpikeTensor input;
    int label = 0;
};

// One momentum-SGD update from the mean batch gradient; returns mean loss.
// Per-sample gradients may be computed on several threads but are reduced in
// sample order, so results do not depend on the thread count.
double train_step(NetworkModel& model, const std::vector<TrainSample>& batch, LossKind kind,
                  SgdMomentum& opt, int threads = 1);

} // namespace snnattack
