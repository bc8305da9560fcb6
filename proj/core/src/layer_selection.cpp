#include "dirsteer/layer_selection.hpp"

#include <fmt/format.h>

#include "dirsteer/error.hpp"

namespace dirsteer {

std::vector<LayerScore> score_layers(const ActivationBundle& bundle, ContrastKind kind,
                                     const std::optional<std::vector<std::size_t>>& layers, const ProbeOptions& opts) {
    if (bundle.num_rows() < 10) {
        fail(ErrorCode::kInsufficientData, fmt::format("layer scoring needs >= 10 rows, bundle has {}", bundle.num_rows()));
    }
    std::vector<std::size_t> candidates;
    if (layers) {
        if (layers->empty()) fail(ErrorCode::kEmptyInput, "no candidate layers");
        candidates = *layers;
    } else {
        for (std::size_t l = 0; l < bundle.num_layers; ++l) candidates.push_back(l);
    }

    std::vector<LayerScore> scores;
    scores.reserve(candidates.size());
    for (auto l : candidates) {
        const ContrastSet cs = make_contrast_set(bundle, l, kind);
        Matrix x(cs.positive.rows() + cs.negative.rows(), cs.positive.cols());
        x << cs.positive, cs.negative;
        std::vector<std::uint8_t> y(static_cast<std::size_t>(x.rows()), 0);
        std::fill_n(y.begin(), cs.positive.rows(), std::uint8_t{1});
        scores.push_back({l, train_probe(x, y, opts).cv_accuracy});
    }
    return scores;
}

std::size_t select_layer(const std::vector<LayerScore>& scores) {
    if (scores.empty()) fail(ErrorCode::kEmptyInput, "no layer scores");
    const LayerScore* best = &scores.front();
    for (const auto& s : scores) {
        if (s.accuracy > best->accuracy || (s.accuracy == best->accuracy && s.layer < best->layer)) best = &s;
    }
    return best->layer;
}

}  // namespace dirsteer
