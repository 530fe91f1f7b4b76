#include "snnattack/kernels.hpp"

#include <string>

namespace snnattack {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.rank() != rank) {
        throw ConfigError(std::string(what) + ": expected rank " + std::to_string(rank) +
                          ", got shape " + shape_str(t.shape));
    }
}

int conv_out_dim(int in, int k, int stride, int padding, const char* what) {
    const int span = in + 2 * padding - k;
    if (span < 0 || span % stride != 0) {
        throw ConfigError(std::string(what) + ": kernel " + std::to_string(k) +
                          " does not fit input " + std::to_string(in) + " with stride " +
                          std::to_string(stride) + ", padding " + std::to_string(padding));
    }
    return span / stride + 1;
}

} // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      int stride, int padding) {
    require_rank(input, 3, "conv2d");
    require_rank(weights, 4, "conv2d weights");
    const int c = static_cast<int>(input.shape[0]);
    const int h = static_cast<int>(input.shape[1]);
    const int w = static_cast<int>(input.shape[2]);
    const int kout = static_cast<int>(weights.shape[0]);
    const int kh = static_cast<int>(weights.shape[2]);
    const int kw = static_cast<int>(weights.shape[3]);
    if (static_cast<int>(weights.shape[1]) != c) {
        throw ConfigError("conv2d: weight channels " + std::to_string(weights.shape[1]) +
                          " != input channels " + std::to_string(c));
    }
    if (!bias.empty() && bias.size() != static_cast<std::size_t>(kout)) {
        throw ConfigError("conv2d: bias size does not match output channels");
    }
    if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
    const int oh = conv_out_dim(h, kh, stride, padding, "conv2d");
    const int ow = conv_out_dim(w, kw, stride, padding, "conv2d");

    Tensor out({static_cast<std::size_t>(kout), static_cast<std::size_t>(oh),
                static_cast<std::size_t>(ow)});
    for (int ko = 0; ko < kout; ++ko) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(ko)];
                for (int ci = 0; ci < c; ++ci) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy * stride + ky - padding;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ox * stride + kx - padding;
                            if (ix < 0 || ix >= w) continue;
                            acc += input[(static_cast<std::size_t>(ci) * h + iy) * w + ix] *
                                   weights[((static_cast<std::size_t>(ko) * c + ci) * kh + ky) * kw + kx];
                        }
                    }
                }
                out[(static_cast<std::size_t>(ko) * oh + oy) * ow + ox] = acc;
            }
        }
    }
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& grad_out, const Tensor& input,
                            const Tensor& weights, int stride, int padding) {
    require_rank(grad_out, 3, "conv2d backward");
    require_rank(input, 3, "conv2d backward input");
    require_rank(weights, 4, "conv2d backward weights");
    const int c = static_cast<int>(input.shape[0]);
    const int h = static_cast<int>(input.shape[1]);
    const int w = static_cast<int>(input.shape[2]);
    const int kout = static_cast<int>(weights.shape[0]);
    const int kh = static_cast<int>(weights.shape[2]);
    const int kw = static_cast<int>(weights.shape[3]);
    const int oh = conv_out_dim(h, kh, stride, padding, "conv2d backward");
    const int ow = conv_out_dim(w, kw, stride, padding, "conv2d backward");
    if (grad_out.shape != std::vector<std::size_t>{static_cast<std::size_t>(kout),
                                                   static_cast<std::size_t>(oh),
                                                   static_cast<std::size_t>(ow)}) {
        throw ConfigError("conv2d backward: grad_out shape " + shape_str(grad_out.shape) +
                          " inconsistent with forward geometry");
    }

    Conv2dGrads g;
    g.input = Tensor(input.shape);
    g.weights = Tensor(weights.shape);
    g.bias = Tensor({static_cast<std::size_t>(kout)});
    for (int ko = 0; ko < kout; ++ko) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const double go = grad_out[(static_cast<std::size_t>(ko) * oh + oy) * ow + ox];
                if (go == 0.0) continue;
                g.bias[static_cast<std::size_t>(ko)] += go;
                for (int ci = 0; ci < c; ++ci) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy * stride + ky - padding;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ox * stride + kx - padding;
                            if (ix < 0 || ix >= w) continue;
                            const std::size_t ii = (static_cast<std::size_t>(ci) * h + iy) * w + ix;
                            const std::size_t wi =
                                ((static_cast<std::size_t>(ko) * c + ci) * kh + ky) * kw + kx;
                            g.input[ii] += go * weights[wi];
                            g.weights[wi] += go * input[ii];
                        }
                    }
                }
            }
        }
    }
    return g;
}

Tensor avgpool2d_forward(const Tensor& input, int k) {
    require_rank(input, 3, "avgpool2d");
    if (k < 1) throw ConfigError("avgpool2d: window must be >= 1");
    const int c = static_cast<int>(input.shape[0]);
    const int h = static_cast<int>(input.shape[1]);
    const int w = static_cast<int>(input.shape[2]);
    if (h % k != 0 || w % k != 0) {
        throw ConfigError("avgpool2d: spatial dims " + std::to_string(h) + "x" +
                          std::to_string(w) + " not divisible by " + std::to_string(k));
    }
    const int oh = h / k;
    const int ow = w / k;
    const double inv = 1.0 / (static_cast<double>(k) * k);
    Tensor out({static_cast<std::size_t>(c), static_cast<std::size_t>(oh),
                static_cast<std::size_t>(ow)});
    for (int ci = 0; ci < c; ++ci) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = 0.0;
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        acc += input[(static_cast<std::size_t>(ci) * h + oy * k + ky) * w +
                                     ox * k + kx];
                    }
                }
                out[(static_cast<std::size_t>(ci) * oh + oy) * ow + ox] = acc * inv;
            }
        }
    }
    return out;
}

Tensor avgpool2d_backward(const Tensor& grad_out, int k) {
    require_rank(grad_out, 3, "avgpool2d backward");
    if (k < 1) throw ConfigError("avgpool2d backward: window must be >= 1");
    const int c = static_cast<int>(grad_out.shape[0]);
    const int oh = static_cast<int>(grad_out.shape[1]);
    const int ow = static_cast<int>(grad_out.shape[2]);
    const int h = oh * k;
    const int w = ow * k;
    const double inv = 1.0 / (static_cast<double>(k) * k);
    Tensor gin({static_cast<std::size_t>(c), static_cast<std::size_t>(h),
                static_cast<std::size_t>(w)});
    for (int ci = 0; ci < c; ++ci) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const double share =
                    grad_out[(static_cast<std::size_t>(ci) * oh + oy) * ow + ox] * inv;
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        gin[(static_cast<std::size_t>(ci) * h + oy * k + ky) * w + ox * k + kx] =
                            share;
                    }
                }
            }
        }
    }
    return gin;
}

Tensor fc_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    require_rank(weights, 2, "fc weights");
    const std::size_t m = weights.shape[0];
    const std::size_t n = weights.shape[1];
    if (input.size() != n) {
        throw ConfigError("fc: input size " + std::to_string(input.size()) +
                          " != weight columns " + std::to_string(n));
    }
    if (!bias.empty() && bias.size() != m) {
        throw ConfigError("fc: bias size does not match output units");
    }
    Tensor out({m});
    for (std::size_t i = 0; i < m; ++i) {
        double acc = bias.empty() ? 0.0 : bias[i];
        const std::size_t row = i * n;
        for (std::size_t j = 0; j < n; ++j) acc += weights[row + j] * input[j];
        out[i] = acc;
    }
    return out;
}

FcGrads fc_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights) {
    require_rank(weights, 2, "fc backward weights");
    const std::size_t m = weights.shape[0];
    const std::size_t n = weights.shape[1];
    if (grad_out.size() != m || input.size() != n) {
        throw ConfigError("fc backward: shapes inconsistent with forward");
    }
    FcGrads g;
    g.input = Tensor(input.shape);
    g.weights = Tensor(weights.shape);
    g.bias = Tensor({m});
    for (std::size_t i = 0; i < m; ++i) {
        const double go = grad_out[i];
        g.bias[i] = go;
        if (go == 0.0) continue;
        const std::size_t row = i * n;
        for (std::size_t j = 0; j < n; ++j) {
            g.input[j] += go * weights[row + j];
            g.weights[row + j] = go * input[j];
        }
    }
    return g;
}

Tensor bernoulli_mask(const Tensor& probabilities, Rng& rng) {
    for (double p : probabilities.data) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainError("bernoulli_mask: probability " + std::to_string(p) +
                              " outside [0,1]");
        }
    }
    Tensor mask(probabilities.shape);
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        mask[i] = rng.bernoulli(probabilities[i]) ? 1.0 : 0.0;
    }
    return mask;
}

} // namespace snnattack
