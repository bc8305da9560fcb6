#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dirsteer/activation_store.hpp"
#include "dirsteer/direction_extraction.hpp"

namespace dirsteer {

/// Layered residual network with a planted detect -> refuse circuit.
///
///   detect layer:  h += g_d * max_k sig(s_d (h.f_k - c_d)) * u_harm
///   exec layer:    h += g_e * gate(h) * v_ref
///   sustain layer: h += g_s * gate(h) * v_ref
///   other layers:  h += bg * W_l tanh(U_l h)
///
/// gate(h) = sig(s_u (h.u_harm - c_u)) * sig(s_i (max_j |h.iota_j| - c_i))
///
/// Harmful inputs carry a topic feature f_k and a signed intent cue iota_j.
/// Their benign twins keep the topic but drop the intent, so the detector
/// fires on both and only the gate tells them apart. The refusal score is
/// h.v_ref - threshold, read after readout_layer.
struct ToyModelSpec {
    std::size_t num_layers = 8;
    std::size_t hidden_dim = 32;
    std::size_t num_topics = 3;
    std::size_t num_intents = 2;
    std::size_t support = 4;  // nonzero coordinates per planted vector

    std::size_t detect_layer = 3;
    std::size_t exec_layer = 5;
    std::size_t sustain_layer = 6;
    std::size_t readout_layer = 6;

    double detect_gain = 4.0;
    double detect_sharpness = 8.0;
    double detect_center = 0.5;
    double exec_gain = 6.0;
    double sustain_gain = 2.0;
    double harm_sharpness = 4.0;
    double harm_center = 2.0;
    double intent_sharpness = 12.0;
    double intent_center = 0.75;
    double intent_scale = 1.5;
    double noise = 0.2;
    double background = 0.05;
    double threshold = 2.0;

    std::uint64_t seed = 0;
};

struct ToyModel {
    ToyModelSpec spec;
    Matrix topics;   // num_topics x d
    Matrix intents;  // num_intents x d
    Vector u_harm;
    Vector v_ref;
    Vector readout;  // == v_ref
    std::vector<Matrix> w;  // per layer, d x d
    std::vector<Matrix> u;
};

ToyModel build_toy_model(const ToyModelSpec& spec);

enum class InputKind { kHarmful, kBenignTwin, kNeutral };

struct SyntheticInput {
    Vector base;
    std::size_t topic = 0;
    std::size_t intent = 0;
    double sign = 1.0;
    InputKind kind = InputKind::kHarmful;
    Vector embedding;

    bool harmful() const noexcept { return kind == InputKind::kHarmful; }
};

/// Deterministic in (stream, index). Inputs with the same (stream, index)
/// share base, topic and intent regardless of kind.
SyntheticInput make_input(const ToyModel& model, std::uint64_t stream, std::size_t index, InputKind kind);

/// Embeddings of inputs [0, count) of a stream, one per row.
Matrix make_inputs(const ToyModel& model, std::uint64_t stream, std::size_t count, InputKind kind);

/// Independent 64-bit stream id for (seed, tag).
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) noexcept;

/// In-place transform of the rows of a hidden-state batch.
using RowHook = std::function<void(Matrix&)>;

struct Hook {
    std::size_t layer = 0;
    RowHook fn;
};

struct ForwardResult {
    Vector scores;
    std::vector<Matrix> hiddens;  // one n x d matrix per layer, post-hook
};

/// Batch forward, one input per row. The hook replaces h after its
/// layer's update.
ForwardResult forward(const ToyModel& model, const Matrix& x, const std::optional<Hook>& hook = std::nullopt);

struct SingleForward {
    double score = 0.0;
    Matrix hiddens;  // L x d
};

SingleForward forward(const ToyModel& model, const SyntheticInput& x, const std::optional<Hook>& hook = std::nullopt);

/// Forward pass without a hook, kept so hooked runs can resume from any
/// layer instead of starting over.
struct Trace {
    Vector scores;
    std::vector<Matrix> hiddens;
};

Trace trace(const ToyModel& model, const Matrix& x);

/// Same scores as forward(model, x, Hook{layer, fn}), starting from the
/// cached hidden state at `layer`.
Vector resume_scores(const ToyModel& model, const Trace& tr, std::size_t layer, const RowHook& fn);

/// Refusal bundles: rows [0, n) are benign twins (label 1), rows [n, 2n) the
/// harmful originals, pairing (i, n + i). Harm bundles: n harmful rows
/// (label 1) then n neutral rows with independent bases, no pairing.
ActivationBundle generate_synthetic_bundle(const ToyModel& model, std::size_t n_pairs, ContrastKind kind,
                                           std::uint64_t seed);

/// The planted vector as a full-mask direction (v_ref at the exec layer,
/// u_harm at the detect layer).
DirectionVector truth_direction(const ToyModel& model, ContrastKind kind);

/// Generic two-class Gaussian bundle: unit noise everywhere, class means
/// +-snr/2 along `direction` at the listed layers. Rows [0, n) positive,
/// [n, 2n) negative, paired (i, n + i).
struct PlantedSpec {
    std::size_t num_layers = 4;
    std::size_t hidden_dim = 16;
    std::size_t n_per_class = 50;
    std::vector<std::size_t> signal_layers{2};
    double snr = 5.0;
    std::uint64_t seed = 0;
    std::optional<Vector> direction;  // random unit vector if unset
};

struct PlantedBundle {
    ActivationBundle bundle;
    Vector direction;
};

PlantedBundle make_planted_bundle(const PlantedSpec& spec);

}  // namespace dirsteer
