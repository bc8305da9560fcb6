#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dirsteer/activation_store.hpp"
#include "dirsteer/direction_extraction.hpp"

namespace dirsteer {

struct LayerScore {
    std::size_t layer = 0;
    double accuracy = 0.0;
};

/// Cross-validated probe accuracy per layer. Uses the rows of the contrast
/// set for `kind` (paired rows for refusal, balanced classes for harm).
/// `layers` restricts the candidates; default is every layer.
std::vector<LayerScore> score_layers(const ActivationBundle& bundle, ContrastKind kind,
                                     const std::optional<std::vector<std::size_t>>& layers = std::nullopt,
                                     const ProbeOptions& opts = {});

/// argmax accuracy, lowest layer on ties.
std::size_t select_layer(const std::vector<LayerScore>& scores);

}  // namespace dirsteer
