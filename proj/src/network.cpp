#include "snnattack/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>

#include "snnattack/kernels.hpp"

namespace snnattack {

bool is_binary(const Tensor& t) {
    for (double v : t.data) {
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

SpikeTensor SpikeTensor::checked(Tensor v) {
    if (v.rank() != 4) {
        throw ConfigError("spike tensor must have shape (T,C,H,W), got " + shape_str(v.shape));
    }
    if (!is_binary(v)) {
        throw ConfigError("spike tensor contains non-binary values");
    }
    SpikeTensor s;
    s.values = std::move(v);
    return s;
}

SpikeTensor SpikeTensor::zeros(int time_steps, Shape3 frame) {
    SpikeTensor s;
    s.values = Tensor({static_cast<std::size_t>(time_steps), static_cast<std::size_t>(frame.c),
                       static_cast<std::size_t>(frame.h), static_cast<std::size_t>(frame.w)});
    return s;
}

Tensor SpikeTensor::frame(int t) const {
    const Shape3 f = frame_shape();
    Tensor out({static_cast<std::size_t>(f.c), static_cast<std::size_t>(f.h),
                static_cast<std::size_t>(f.w)});
    const std::size_t n = out.size();
    std::memcpy(out.data.data(), values.data.data() + static_cast<std::size_t>(t) * n,
                n * sizeof(double));
    return out;
}

namespace {

Tensor slice_frame(const Tensor& stacked, int t, std::size_t frame_count) {
    Tensor out({frame_count});
    std::memcpy(out.data.data(), stacked.data.data() + static_cast<std::size_t>(t) * frame_count,
                frame_count * sizeof(double));
    return out;
}

} // namespace

std::vector<LayerSpec> parse_layer_stack(const std::string& spec, double u_th) {
    std::vector<LayerSpec> layers;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        std::size_t dash = spec.find('-', pos);
        if (dash == std::string::npos) dash = spec.size();
        std::string tok = spec.substr(pos, dash - pos);
        pos = dash + 1;
        if (tok.empty()) {
            if (pos > spec.size()) break;
            throw ConfigError("network spec: empty layer token in '" + spec + "'");
        }
        // Skip the conventional input marker ("Input", "Input28x28x1", ...).
        if (tok.size() >= 5 && (tok.compare(0, 5, "Input") == 0 || tok.compare(0, 5, "input") == 0)) {
            if (pos > spec.size()) break;
            continue;
        }

        LayerSpec l;
        l.u_th = u_th;
        if (tok.size() > 2 && tok.compare(0, 2, "AP") == 0) {
            l.kind = LayerKind::AvgPool;
            try {
                l.pool = std::stoi(tok.substr(2));
            } catch (const std::exception&) {
                throw ConfigError("network spec: bad pooling token '" + tok + "'");
            }
            if (l.pool < 1) throw ConfigError("network spec: pooling window must be >= 1");
        } else if (tok.size() > 2 && tok.compare(tok.size() - 2, 2, "FC") == 0) {
            l.kind = LayerKind::Fc;
            try {
                l.units = std::stoi(tok.substr(0, tok.size() - 2));
            } catch (const std::exception&) {
                throw ConfigError("network spec: bad FC token '" + tok + "'");
            }
            if (l.units < 1) throw ConfigError("network spec: FC width must be >= 1");
        } else {
            const std::size_t cpos = tok.find('C');
            if (cpos == std::string::npos || cpos == 0 || cpos + 1 >= tok.size()) {
                throw ConfigError("network spec: unrecognized token '" + tok + "'");
            }
            l.kind = LayerKind::Conv;
            std::size_t tail = cpos + 1;
            try {
                std::size_t used = 0;
                l.out_channels = std::stoi(tok.substr(0, cpos));
                l.kernel = std::stoi(tok.substr(tail), &used);
                tail += used;
            } catch (const std::exception&) {
                throw ConfigError("network spec: bad conv token '" + tok + "'");
            }
            if (l.out_channels < 1 || l.kernel < 1) {
                throw ConfigError("network spec: conv channels and kernel must be >= 1");
            }
            l.padding = l.kernel / 2;
            while (tail < tok.size()) {
                const char knob = tok[tail++];
                std::size_t used = 0;
                int value = 0;
                try {
                    value = std::stoi(tok.substr(tail), &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used == 0 || (knob != 'p' && knob != 's')) {
                    throw ConfigError("network spec: bad conv suffix in '" + tok + "'");
                }
                tail += used;
                if (knob == 'p') l.padding = value;
                if (knob == 's') l.stride = value;
            }
            if (l.stride < 1 || l.padding < 0) {
                throw ConfigError("network spec: conv stride/padding out of range in '" + tok + "'");
            }
        }
        layers.push_back(l);
        if (pos > spec.size()) break;
    }
    if (layers.empty()) {
        throw ConfigError("network spec '" + spec + "' defines no layers");
    }
    return layers;
}

NetworkModel build_network(const std::vector<LayerSpec>& specs, Shape3 input_shape,
                           double decay, double surrogate_width, int time_window, Rng& rng) {
    if (specs.empty()) throw ConfigError("network needs at least one layer");
    if (!(decay > 0.0 && decay < 1.0)) {
        throw ConfigError("decay must lie in (0,1), got " + std::to_string(decay));
    }
    if (!(surrogate_width > 0.0)) throw ConfigError("surrogate width must be positive");
    if (time_window < 1) throw ConfigError("time window must be >= 1");
    if (input_shape.count() <= 0) throw ConfigError("input shape must be non-empty");

    NetworkModel m;
    m.input_shape = input_shape;
    m.decay = decay;
    m.surrogate_width = surrogate_width;
    m.time_window = time_window;

    Shape3 cur = input_shape;
    for (const LayerSpec& spec : specs) {
        Layer layer;
        layer.spec = spec;
        layer.in_shape = cur;
        switch (spec.kind) {
        case LayerKind::Conv: {
            const int oh = (cur.h + 2 * spec.padding - spec.kernel);
            const int ow = (cur.w + 2 * spec.padding - spec.kernel);
            if (oh < 0 || ow < 0 || oh % spec.stride != 0 || ow % spec.stride != 0) {
                throw ConfigError("conv layer does not fit input " + std::to_string(cur.h) + "x" +
                                  std::to_string(cur.w));
            }
            layer.out_shape = {spec.out_channels, oh / spec.stride + 1, ow / spec.stride + 1};
            const int fan_in = cur.c * spec.kernel * spec.kernel;
            const double bound = std::sqrt(1.0 / fan_in);
            layer.weights = Tensor({static_cast<std::size_t>(spec.out_channels),
                                    static_cast<std::size_t>(cur.c),
                                    static_cast<std::size_t>(spec.kernel),
                                    static_cast<std::size_t>(spec.kernel)});
            for (double& w : layer.weights.data) w = rng.uniform(-bound, bound);
            layer.bias = Tensor({static_cast<std::size_t>(spec.out_channels)});
            break;
        }
        case LayerKind::AvgPool: {
            if (cur.h % spec.pool != 0 || cur.w % spec.pool != 0) {
                throw ConfigError("avgpool window " + std::to_string(spec.pool) +
                                  " does not divide " + std::to_string(cur.h) + "x" +
                                  std::to_string(cur.w));
            }
            layer.out_shape = {cur.c, cur.h / spec.pool, cur.w / spec.pool};
            break;
        }
        case LayerKind::Fc: {
            const int fan_in = cur.count();
            const double bound = std::sqrt(1.0 / fan_in);
            layer.out_shape = {spec.units, 1, 1};
            layer.weights = Tensor({static_cast<std::size_t>(spec.units),
                                    static_cast<std::size_t>(fan_in)});
            for (double& w : layer.weights.data) w = rng.uniform(-bound, bound);
            layer.bias = Tensor({static_cast<std::size_t>(spec.units)});
            break;
        }
        }
        if (spec.spiking() && !(spec.u_th > 0.0)) {
            throw ConfigError("spiking layer threshold must be positive");
        }
        cur = layer.out_shape;
        m.layers.push_back(std::move(layer));
    }

    const Layer& last = m.layers.back();
    if (last.spec.kind != LayerKind::Fc) {
        throw ConfigError("last layer must be a spiking FC layer");
    }
    m.num_classes = last.spec.units;
    return m;
}

int penultimate_spiking_layer(const NetworkModel& model) {
    for (int i = model.layer_count() - 2; i >= 0; --i) {
        if (model.layers[i].spec.spiking()) return i;
    }
    throw ConfigError("network has no spiking layer before the output layer");
}

std::pair<Tensor, Tensor> lif_step(const Tensor& u_prev, const Tensor& o_prev,
                                   const Tensor& current, double decay, double u_th) {
    require_same_shape(u_prev, o_prev, "lif_step");
    require_same_shape(u_prev, current, "lif_step");
    if (!(decay > 0.0 && decay < 1.0)) {
        throw ConfigError("lif_step: decay must lie in (0,1)");
    }
    Tensor u(u_prev.shape);
    Tensor o(u_prev.shape);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = decay * u_prev[i] * (1.0 - o_prev[i]) + current[i];
        o[i] = u[i] >= u_th ? 1.0 : 0.0;
    }
    return {std::move(u), std::move(o)};
}

namespace {

ForwardResult run_network(const NetworkModel& model, const Tensor& input, bool record,
                          const std::optional<ThresholdOverride>& override_th, bool soft) {
    const int T = model.time_window;
    const int L = model.layer_count();
    const std::size_t frame_count = static_cast<std::size_t>(model.input_shape.count());
    const std::vector<std::size_t> want{static_cast<std::size_t>(T),
                                        static_cast<std::size_t>(model.input_shape.c),
                                        static_cast<std::size_t>(model.input_shape.h),
                                        static_cast<std::size_t>(model.input_shape.w)};
    if (input.shape != want) {
        throw ConfigError("forward: input shape " + shape_str(input.shape) +
                          " does not match model " + shape_str(want));
    }
    if (override_th) {
        const int li = override_th->layer_index;
        if (li < 0 || li >= L || !model.layers[li].spec.spiking()) {
            throw ConfigError("threshold override targets a non-spiking or missing layer");
        }
        if (!(override_th->u_th > 0.0)) {
            throw ConfigError("threshold override must be positive");
        }
    }

    const double a = model.surrogate_width;
    LifState state;
    if (record) {
        state.input = input;
        state.outputs.resize(L);
        state.potentials.resize(L);
        state.fired.resize(L);
        state.override_used = override_th;
        state.soft = soft;
    }

    // Membrane state carried across timesteps, per spiking layer.
    std::vector<Tensor> u_prev(L), fired_prev(L);
    for (int li = 0; li < L; ++li) {
        if (!model.layers[li].spec.spiking()) continue;
        const std::size_t n = static_cast<std::size_t>(model.layers[li].out_shape.count());
        u_prev[li] = Tensor({n});
        fired_prev[li] = Tensor({n});
    }

    Tensor rate({static_cast<std::size_t>(model.num_classes)});
    for (int t = 0; t < T; ++t) {
        Tensor x = slice_frame(input, t, frame_count);
        for (int li = 0; li < L; ++li) {
            const Layer& layer = model.layers[li];
            if (layer.spec.kind == LayerKind::AvgPool) {
                Tensor shaped = Tensor::from({static_cast<std::size_t>(layer.in_shape.c),
                                              static_cast<std::size_t>(layer.in_shape.h),
                                              static_cast<std::size_t>(layer.in_shape.w)},
                                             std::move(x.data));
                x = avgpool2d_forward(shaped, layer.spec.pool);
                if (record) state.outputs[li].push_back(x);
                continue;
            }

            Tensor current;
            if (layer.spec.kind == LayerKind::Conv) {
                Tensor shaped = Tensor::from({static_cast<std::size_t>(layer.in_shape.c),
                                              static_cast<std::size_t>(layer.in_shape.h),
                                              static_cast<std::size_t>(layer.in_shape.w)},
                                             std::move(x.data));
                current = conv2d_forward(shaped, layer.weights, layer.bias, layer.spec.stride,
                                         layer.spec.padding);
            } else {
                Tensor flat = Tensor::from({x.size()}, std::move(x.data));
                current = fc_forward(flat, layer.weights, layer.bias);
            }
            current.shape = {current.size()};

            double u_th = layer.spec.u_th;
            if (override_th && override_th->layer_index == li) u_th = override_th->u_th;

            Tensor u(current.shape);
            Tensor fired_now(current.shape);
            Tensor out(current.shape);
            const Tensor& up = u_prev[li];
            const Tensor& fp = fired_prev[li];
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double ui = model.decay * up[i] * (1.0 - fp[i]) + current[i];
                u[i] = ui;
                const double hard = ui >= u_th ? 1.0 : 0.0;
                fired_now[i] = hard;
                out[i] = soft ? std::clamp((ui - u_th) / a + 0.5, 0.0, 1.0) : hard;
            }
            u_prev[li] = u;
            fired_prev[li] = fired_now;
            if (record) {
                state.outputs[li].push_back(out);
                state.potentials[li].push_back(std::move(u));
                state.fired[li].push_back(std::move(fired_now));
            }
            x = std::move(out);
        }
        for (int c = 0; c < model.num_classes; ++c) rate[c] += x[c];
    }
    const double invT = 1.0 / T;
    for (double& r : rate.data) r *= invT;

    ForwardResult res;
    res.rate = std::move(rate);
    if (record) res.state = std::move(state);
    return res;
}

} // namespace

ForwardResult forward(const NetworkModel& model, const SpikeTensor& input, bool record,
                      const std::optional<ThresholdOverride>& override_th) {
    return run_network(model, input.values, record, override_th, /*soft=*/false);
}

ForwardResult soft_forward(const NetworkModel& model, const Tensor& input, bool record,
                           const std::optional<ThresholdOverride>& override_th) {
    return run_network(model, input, record, override_th, /*soft=*/true);
}

int predict(const RateVector& rate) {
    if (rate.empty()) throw ConfigError("predict: empty rate vector");
    return static_cast<int>(std::max_element(rate.data.begin(), rate.data.end()) -
                            rate.data.begin());
}

std::vector<long long> spike_count_per_layer(const LifState& state) {
    std::vector<long long> counts;
    for (std::size_t li = 0; li < state.fired.size(); ++li) {
        if (state.fired[li].empty()) continue; // non-spiking layer
        long long total = 0;
        for (const Tensor& frame : state.fired[li]) {
            for (double v : frame.data) total += v != 0.0 ? 1 : 0;
        }
        counts.push_back(total);
    }
    return counts;
}

} // namespace snnattack
