#include "snnattack/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "snnattack/kernels.hpp"

namespace snnattack {

std::string loss_kind_name(LossKind kind) { return kind == LossKind::Mse ? "mse" : "ce"; }

LossKind loss_kind_from_name(const std::string& name) {
    if (name == "mse" || name == "MSE") return LossKind::Mse;
    if (name == "ce" || name == "CE") return LossKind::Ce;
    throw ConfigError("unknown loss kind '" + name + "'");
}

Tensor surrogate_deriv(const Tensor& u, double u_th, double a) {
    if (!(a > 0.0)) throw DomainError("surrogate width must be positive");
    const double half = a / 2.0;
    const double inv = 1.0 / a;
    Tensor g(u.shape);
    for (std::size_t i = 0; i < u.size(); ++i) {
        g[i] = std::abs(u[i] - u_th) <= half ? inv : 0.0;
    }
    return g;
}

LossResult loss(const RateVector& rate, int label, LossKind kind) {
    const std::size_t n = rate.size();
    if (label < 0 || static_cast<std::size_t>(label) >= n) {
        throw DomainError("label " + std::to_string(label) + " out of range for " +
                          std::to_string(n) + " classes");
    }
    LossResult res;
    res.grad_rate = Tensor(rate.shape);
    if (kind == LossKind::Mse) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = rate[i] - (static_cast<int>(i) == label ? 1.0 : 0.0);
            acc += d * d;
            res.grad_rate[i] = 2.0 * d / static_cast<double>(n);
        }
        res.value = acc / static_cast<double>(n);
    } else {
        double m = rate[0];
        for (std::size_t i = 1; i < n; ++i) m = std::max(m, rate[i]);
        double z = 0.0;
        std::vector<double> e(n);
        for (std::size_t i = 0; i < n; ++i) {
            e[i] = std::exp(rate[i] - m);
            z += e[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double p = e[i] / z;
            res.grad_rate[i] = p - (static_cast<int>(i) == label ? 1.0 : 0.0);
        }
        res.value = -(rate[static_cast<std::size_t>(label)] - m - std::log(z));
    }
    return res;
}

BackwardResult backward(const NetworkModel& model, const LifState& state,
                        const Tensor& dL_drate) {
    const int L = model.layer_count();
    const int T = model.time_window;
    if (state.outputs.size() != static_cast<std::size_t>(L) ||
        state.outputs.empty() || state.outputs.back().size() != static_cast<std::size_t>(T)) {
        throw UsageError("backward: state was not recorded by forward on this model");
    }
    if (dL_drate.size() != static_cast<std::size_t>(model.num_classes)) {
        throw ConfigError("backward: rate gradient has wrong length");
    }

    BackwardResult res;
    res.weight_grads.resize(L);
    res.bias_grads.resize(L);
    for (int li = 0; li < L; ++li) {
        if (model.layers[li].spec.spiking()) {
            res.weight_grads[li] = Tensor(model.layers[li].weights.shape);
            res.bias_grads[li] = Tensor(model.layers[li].bias.shape);
        }
    }

    // dL/d(output of the layer below) per timestep; starts as dL/do of the
    // output layer, which only feeds the rate decode: dL/do[t] = dL/dy / T.
    std::vector<Tensor> grad_out_time(T);
    const double invT = 1.0 / T;
    for (int t = 0; t < T; ++t) {
        Tensor g(dL_drate.shape);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = dL_drate[i] * invT;
        grad_out_time[t] = std::move(g);
    }

    for (int li = L - 1; li >= 0; --li) {
        const Layer& layer = model.layers[li];
        if (layer.spec.kind == LayerKind::AvgPool) {
            for (int t = 0; t < T; ++t) {
                Tensor shaped = Tensor::from({static_cast<std::size_t>(layer.out_shape.c),
                                              static_cast<std::size_t>(layer.out_shape.h),
                                              static_cast<std::size_t>(layer.out_shape.w)},
                                             std::move(grad_out_time[t].data));
                Tensor gin = avgpool2d_backward(shaped, layer.spec.pool);
                gin.shape = {gin.size()};
                grad_out_time[t] = std::move(gin);
            }
            continue;
        }

        double u_th = layer.spec.u_th;
        if (state.override_used && state.override_used->layer_index == li) {
            u_th = state.override_used->u_th;
        }

        std::vector<Tensor> grad_in_time(T);
        Tensor du_next; // dL/du at t+1, zero beyond the horizon
        for (int t = T - 1; t >= 0; --t) {
            const Tensor& u_t = state.potentials[li][static_cast<std::size_t>(t)];
            const Tensor sg = surrogate_deriv(u_t, u_th, model.surrogate_width);

            // dL/du[t] = dL/do[t] * sg(u[t]) + dL/du[t+1] * decay * (1 - o[t])
            Tensor du(u_t.shape);
            const Tensor& fired_t = state.fired[li][static_cast<std::size_t>(t)];
            for (std::size_t i = 0; i < du.size(); ++i) {
                double v = grad_out_time[t][i] * sg[i];
                if (!du_next.empty()) {
                    v += du_next[i] * model.decay * (1.0 - fired_t[i]);
                }
                du[i] = v;
            }

            // The synaptic current enters u additively, so dL/dc = dL/du.
            const Tensor x_flat = li == 0
                                      ? Tensor::from({static_cast<std::size_t>(layer.in_shape.count())},
                                                     std::vector<double>(
                                                         state.input.data.begin() +
                                                             static_cast<std::size_t>(t) * layer.in_shape.count(),
                                                         state.input.data.begin() +
                                                             static_cast<std::size_t>(t + 1) * layer.in_shape.count()))
                                      : state.outputs[li - 1][static_cast<std::size_t>(t)];

            if (layer.spec.kind == LayerKind::Conv) {
                Tensor go = Tensor::from({static_cast<std::size_t>(layer.out_shape.c),
                                          static_cast<std::size_t>(layer.out_shape.h),
                                          static_cast<std::size_t>(layer.out_shape.w)},
                                         std::move(du.data));
                Tensor xs = Tensor::from({static_cast<std::size_t>(layer.in_shape.c),
                                          static_cast<std::size_t>(layer.in_shape.h),
                                          static_cast<std::size_t>(layer.in_shape.w)},
                                         std::vector<double>(x_flat.data));
                Conv2dGrads g = conv2d_backward(go, xs, layer.weights, layer.spec.stride,
                                                layer.spec.padding);
                for (std::size_t i = 0; i < g.weights.size(); ++i) {
                    res.weight_grads[li][i] += g.weights[i];
                }
                for (std::size_t i = 0; i < g.bias.size(); ++i) res.bias_grads[li][i] += g.bias[i];
                g.input.shape = {g.input.size()};
                grad_in_time[t] = std::move(g.input);
                du = Tensor::from({go.size()}, std::move(go.data));
            } else {
                Tensor flat_x = Tensor::from({x_flat.size()}, std::vector<double>(x_flat.data));
                FcGrads g = fc_backward(du, flat_x, layer.weights);
                for (std::size_t i = 0; i < g.weights.size(); ++i) {
                    res.weight_grads[li][i] += g.weights[i];
                }
                for (std::size_t i = 0; i < g.bias.size(); ++i) res.bias_grads[li][i] += g.bias[i];
                grad_in_time[t] = std::move(g.input);
            }
            du_next = std::move(du);
        }
        grad_out_time = std::move(grad_in_time);
    }

    Tensor input_grad({static_cast<std::size_t>(T),
                       static_cast<std::size_t>(model.input_shape.c),
                       static_cast<std::size_t>(model.input_shape.h),
                       static_cast<std::size_t>(model.input_shape.w)});
    const std::size_t frame = static_cast<std::size_t>(model.input_shape.count());
    for (int t = 0; t < T; ++t) {
        std::copy(grad_out_time[t].data.begin(), grad_out_time[t].data.end(),
                  input_grad.data.begin() + static_cast<std::size_t>(t) * frame);
    }
    res.input = std::move(input_grad);
    return res;
}

double train_step(NetworkModel& model, const std::vector<TrainSample>& batch, LossKind kind,
                  SgdMomentum& opt, int threads) {
    if (batch.empty()) throw ConfigError("train_step: empty batch");
    const int L = model.layer_count();
    if (opt.velocity_w.size() != static_cast<std::size_t>(L)) {
        opt.velocity_w.assign(L, Tensor{});
        opt.velocity_b.assign(L, Tensor{});
        for (int li = 0; li < L; ++li) {
            if (!model.layers[li].spec.spiking()) continue;
            opt.velocity_w[li] = Tensor(model.layers[li].weights.shape);
            opt.velocity_b[li] = Tensor(model.layers[li].bias.shape);
        }
    }

    const std::size_t n = batch.size();
    std::vector<BackwardResult> grads(n);
    std::vector<double> losses(n, 0.0);
    auto worker = [&](std::size_t begin, std::size_t step) {
        for (std::size_t s = begin; s < n; s += step) {
            ForwardResult fr = forward(model, batch[s].input, /*record=*/true);
            LossResult lr = loss(fr.rate, batch[s].label, kind);
            losses[s] = lr.value;
            grads[s] = backward(model, *fr.state, lr.grad_rate);
        }
    };
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (nt == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker, static_cast<std::size_t>(i), nt);
        for (auto& th : pool) th.join();
    }

    const double scale = 1.0 / static_cast<double>(n);
    double mean_loss = 0.0;
    for (double v : losses) mean_loss += v;
    mean_loss *= scale;

    for (int li = 0; li < L; ++li) {
        if (!model.layers[li].spec.spiking()) continue;
        Tensor gw(model.layers[li].weights.shape);
        Tensor gb(model.layers[li].bias.shape);
        for (std::size_t s = 0; s < n; ++s) { // fixed reduction order
            for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += grads[s].weight_grads[li][i];
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += grads[s].bias_grads[li][i];
        }
        Tensor& vw = opt.velocity_w[li];
        Tensor& vb = opt.velocity_b[li];
        Tensor& w = model.layers[li].weights;
        Tensor& b = model.layers[li].bias;
        for (std::size_t i = 0; i < w.size(); ++i) {
            vw[i] = opt.momentum * vw[i] + gw[i] * scale;
            w[i] -= opt.learning_rate * vw[i];
        }
        if (opt.train_bias) {
            for (std::size_t i = 0; i < b.size(); ++i) {
                vb[i] = opt.momentum * vb[i] + gb[i] * scale;
                b[i] -= opt.learning_rate * vb[i];
            }
        }
    }
    return mean_loss;
}

} // namespace snnattack
