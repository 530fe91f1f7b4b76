#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snnattack/gradient.hpp"
#include "snnattack/network.hpp"
#include "snnattack/rng.hpp"
#include "snnattack/tensor.hpp"

namespace snnattack {

enum class AttackMode { Untargeted, Targeted };
enum class InputKind { Spike, Image };
enum class AttackStatus { Success, FailedBudget, FailedMaxIter };

std::string attack_status_name(AttackStatus s);
std::string attack_mode_name(AttackMode m);
std::string input_kind_name(InputKind k);

struct AttackConfig {
    AttackMode mode = AttackMode::Untargeted;
    int target_class = -1; // targeted mode only
    int max_iter = 25;
    int norm_p = 2;
    // Perturbation bound per point; unbounded by default.
    double epsilon = 1e30;
    // Gradient scaling rate. Listed among the attack inputs but the ternary
    // update consumes the converted gradient directly, so it multiplies
    // nothing; kept so configs and reports can echo it.
    double eta = 1.0;
    double gamma = 0.05;  // RSF sampling factor
    double cw_c = 0.0;    // CWL2 regularization weight, image mode only
    std::optional<ThresholdOverride> threshold_override;
    InputKind input_kind = InputKind::Spike;
    LossKind loss = LossKind::Mse;
    std::uint64_t seed = 0;
    // Debug instrumentation: stash the first iteration's continuous input
    // gradient in the outcome.
    bool record_first_gradient = false;

    void validate() const;
};

// Spike-compatible gradient: same (T,C,H,W) shape as the input it updates,
// every element in {-1, 0, 1}, and constructed so that adding it to the
// current binary input yields a binary input again.
struct TernaryGradient {
    Tensor values;

    static TernaryGradient checked(Tensor v);
    std::size_t nonzeros() const;
};

// Adds a ternary gradient to a spike pattern; the result is validated binary.
SpikeTensor apply_ternary(const SpikeTensor& input, const TernaryGradient& grad);

struct IterationRecord {
    double loss = 0.0;
    // Model prediction observed this iteration: the post-update verification
    // forward when it ran, otherwise the generation forward's winner.
    int predicted = -1;
    long long penultimate_spikes = 0;
    bool rsf = false;
};

struct AttackOutcome {
    AttackStatus status = AttackStatus::FailedMaxIter;
    int iterations_used = 0;
    double perturbation = 0.0; // (1/N) * ||x' - x0||_p over the final input
    int flip_iterations = 0;   // iterations where the gradient vanished and RSF fired
    Tensor adversarial;        // (T,C,H,W) spikes or (C,H,W) image
    Tensor original;
    std::vector<IterationRecord> trace;

    InputKind input_kind = InputKind::Spike;
    AttackMode mode = AttackMode::Untargeted;
    int true_label = -1;
    int target_class = -1;
    std::uint64_t seed = 0;
    // Image mode: stream id of the Bernoulli encoding used by the final
    // verification forward, so a stored success can be replayed exactly.
    std::uint64_t check_stream = 0;
    Tensor first_gradient; // only when requested
    std::string warning;
};

// Gradient-to-spike converter: normalize |grad| by its maximum, Bernoulli-
// sample a pass mask from the normalized magnitudes, extract signs
// (sign(0) = 0), then zero the entries whose accumulation would leave {0,1}.
// A caller holding an all-zero gradient must use rsf_flip instead.
TernaryGradient g2s_convert(const InputGradient& grad, const SpikeTensor& current_input,
                            Rng& rng);

// Deterministic tail of g2s_convert for a given mask; exposed for exhaustive
// truth-table checks.
TernaryGradient g2s_apply(const InputGradient& grad, const Tensor& mask,
                          const SpikeTensor& current_input);

// Restricted spike flipper: Bernoulli(gamma) selects elements, each selected
// element flips its spike state (g = 1 - 2x).
TernaryGradient rsf_flip(const SpikeTensor& current_input, double gamma, Rng& rng);

TernaryGradient rsf_apply(const Tensor& mask, const SpikeTensor& current_input);

// Mean over the time dimension: (T,C,H,W) ternary -> (C,H,W) values in
// [-1,1], quantized to multiples of 1/T.
Tensor temporal_aggregate(const TernaryGradient& grad);

// CWL2 pull toward the original image: delta - c * 2 * (current - original).
// c = 0 leaves the update untouched.
Tensor cw_regularize(const Tensor& delta_img, const Tensor& current, const Tensor& original,
                     double c);

// Average perturbation per point: (1/N) * p-norm of the difference, where N
// is the element count (C*H*W for images, T*C*H*W for spike patterns).
double perturbation_metric(const Tensor& x_adv, const Tensor& x_orig, int p);

// The full iterative attack. `input` is a binary (T,C,H,W) pattern in spike
// mode or a (C,H,W) image in [0,1] in image mode, assumed correctly
// classified by the model (the campaign filters). Per iteration: forward with
// the threshold override recorded, backward to the input gradient, G2S (or
// RSF on vanishing), accumulate, then check the perturbation budget before
// testing success against the unmodified model.
AttackOutcome run_attack(const NetworkModel& model, const Tensor& input, int true_label,
                         const AttackConfig& config);

// Replays the stored adversarial example through the unmodified model and
// reports whether the outcome's goal holds. Image mode re-encodes with the
// recorded (seed, check_stream) pair.
bool reverify(const NetworkModel& model, const AttackOutcome& outcome);

// Per-iteration Bernoulli encoding stream ids used by run_attack (iteration
// index is 1-based); reverify uses the recorded one.
std::uint64_t encode_stream_id(int iteration);

} // namespace snnattack
