#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snnattack/rng.hpp"
#include "snnattack/tensor.hpp"

namespace snnattack {

// Binary spatio-temporal pattern of shape (T, C, H, W). Inputs, hidden spike
// trains and adversarial examples in spike mode all use this layout.
struct SpikeTensor {
    Tensor values; // row-major (T, C, H, W), every element 0.0 or 1.0

    SpikeTensor() = default;

    // Validates rank and binariness; the only way to build one from raw data.
    static SpikeTensor checked(Tensor v);
    static SpikeTensor zeros(int time_steps, Shape3 frame);

    int time_steps() const { return static_cast<int>(values.shape[0]); }
    Shape3 frame_shape() const {
        return {static_cast<int>(values.shape[1]), static_cast<int>(values.shape[2]),
                static_cast<int>(values.shape[3])};
    }
    std::size_t size() const { return values.size(); }

    // Copy of the (C,H,W) slice at timestep t.
    Tensor frame(int t) const;
};

bool is_binary(const Tensor& t);

enum class LayerKind { Conv, AvgPool, Fc };

struct LayerSpec {
    LayerKind kind = LayerKind::Fc;
    // conv
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
    int padding = 0;
    // avgpool
    int pool = 0;
    // fc
    int units = 0;

    double u_th = 0.3; // spiking layers only

    bool spiking() const { return kind != LayerKind::AvgPool; }
};

// "16C3-AP2-32C3-AP2-128FC-10FC" -> layer specs. Conv tokens accept an
// optional explicit padding ("16C3p0") and stride ("16C3s2"); default padding
// is kernel/2 so 3x3 stacks preserve spatial size. A leading "Input" token
// (with or without a size annotation) is ignored.
std::vector<LayerSpec> parse_layer_stack(const std::string& spec, double u_th = 0.3);

struct Layer {
    LayerSpec spec;
    Shape3 in_shape;
    Shape3 out_shape;
    Tensor weights; // conv: (K,C,kh,kw); fc: (M,N); avgpool: empty
    Tensor bias;    // zero by default; the LIF current has no bias term
};

struct NetworkModel {
    std::vector<Layer> layers;
    Shape3 input_shape;
    double decay = 0.25;          // e^{-dt/tau}, in (0,1)
    double surrogate_width = 1.0; // a
    int time_window = 15;         // T
    int num_classes = 0;

    int layer_count() const { return static_cast<int>(layers.size()); }
};

// Resolves geometry and initializes weights uniform in +-sqrt(1/fan_in).
// The last layer must be a spiking FC layer; its width sets num_classes.
NetworkModel build_network(const std::vector<LayerSpec>& specs, Shape3 input_shape,
                           double decay, double surrogate_width, int time_window, Rng& rng);

// Index (into model.layers) of the spiking layer just before the output
// layer; the default target of a firing-threshold override.
int penultimate_spiking_layer(const NetworkModel& model);

// Substitute firing threshold for one layer, valid for a single forward
// pass; never touches the model.
struct ThresholdOverride {
    int layer_index = -1;
    double u_th = 0.3;
};

// Per-timestep class scores: spike count of each output neuron divided by T.
using RateVector = Tensor;

// Full recording of one forward pass, enough to run backpropagation through
// time afterwards. `outputs` holds what each layer passed downstream (binary
// spikes, soft firing values, or pooled activations); `fired` holds the hard
// threshold crossings that gate the membrane reset.
struct LifState {
    Tensor input;                                // (T,C,H,W)
    std::vector<std::vector<Tensor>> outputs;    // [layer][t]
    std::vector<std::vector<Tensor>> potentials; // [layer][t], spiking layers only
    std::vector<std::vector<Tensor>> fired;      // [layer][t], spiking layers only
    std::optional<ThresholdOverride> override_used;
    bool soft = false;
};

// One iterative LIF update: u' = decay * u * (1 - o) + current, spike where
// u' >= u_th. Reset-to-zero is folded into the next step's leak term.
std::pair<Tensor, Tensor> lif_step(const Tensor& u_prev, const Tensor& o_prev,
                                   const Tensor& current, double decay, double u_th);

struct ForwardResult {
    RateVector rate;
    std::optional<LifState> state;
};

// Runs the full time window through every layer. The override, if any,
// substitutes that layer's threshold for this pass only.
ForwardResult forward(const NetworkModel& model, const SpikeTensor& input, bool record,
                      const std::optional<ThresholdOverride>& override_th = {});

// Differentiable relaxation: neurons emit clamp((u - u_th)/a + 1/2, 0, 1)
// instead of a hard step, whose derivative is exactly the rectangular
// surrogate. Exists so finite-difference checks of the backward pass are
// meaningful; reset gating still uses the hard threshold crossing.
ForwardResult soft_forward(const NetworkModel& model, const Tensor& input, bool record,
                           const std::optional<ThresholdOverride>& override_th = {});

// Winner neuron; ties go to the lowest index.
int predict(const RateVector& rate);

// Total spikes per spiking layer, summed over time and space.
std::vector<long long> spike_count_per_layer(const LifState& state);

} // namespace snnattack
