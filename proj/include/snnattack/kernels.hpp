#pragma once

#include "snnattack/rng.hpp"
#include "snnattack/tensor.hpp"

namespace snnattack {

// Deterministic numerical kernels shared by the network forward pass and
// backpropagation. Convolution follows the cross-correlation convention
// (no kernel flip). Backward kernels are exact adjoints of their forwards.

// input (C,H,W), weights (K,C,kh,kw), bias (K) or empty -> (K,H',W')
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      int stride, int padding);

struct Conv2dGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};

Conv2dGrads conv2d_backward(const Tensor& grad_out, const Tensor& input,
                            const Tensor& weights, int stride, int padding);

// Non-overlapping k x k mean over each channel; spatial dims must divide k.
Tensor avgpool2d_forward(const Tensor& input, int k);

// Spreads grad_out / k^2 uniformly over each pooled window.
Tensor avgpool2d_backward(const Tensor& grad_out, int k);

// input (N), weights (M,N), bias (M) or empty -> (M)
Tensor fc_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct FcGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};

FcGrads fc_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights);

// Element-wise independent Bernoulli draws; probabilities must lie in [0,1].
// One draw per element in row-major order, so a re-created Rng with the same
// (seed, stream) reproduces the mask bit for bit.
Tensor bernoulli_mask(const Tensor& probabilities, Rng& rng);

} // namespace snnattack
