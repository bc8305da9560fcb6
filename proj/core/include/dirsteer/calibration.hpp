#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dirsteer/intervention.hpp"
#include "dirsteer/toy_model.hpp"

namespace dirsteer {

inline constexpr std::size_t kDefaultEvalSize = 200;

/// Held-out harmful inputs for the success-rate proxy. They come from their
/// own stream, never from the calibration bundles.
class Evaluator {
public:
    Evaluator(const ToyModel& model, std::size_t n_eval, std::uint64_t seed);

    /// Fraction of harmful inputs with refusal score < 0 under cfg.
    double rate(const InterventionConfig& cfg) const;
    /// Same with no intervention.
    double baseline() const;

    const ToyModel& model() const noexcept { return *model_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(trace_.scores.size()); }

private:
    const ToyModel* model_;
    Trace trace_;
};

double asr_proxy(const ToyModel& model, const InterventionConfig& cfg, std::size_t n_eval, std::uint64_t seed);

/// Compliance on benign inputs (twins and neutrals): fraction with score < 0.
double benign_compliance(const ToyModel& model, std::size_t n_eval, std::uint64_t seed);

struct Axis {
    std::string name;
    std::vector<double> values;
};

/// Rates over the full grid of `axes`, row-major (last axis fastest).
/// best_index: coordinate per axis of the best cell.
struct SweepResult {
    std::vector<Axis> axes;
    std::vector<double> rates;
    std::vector<std::size_t> best_index;
    double best_rate = 0.0;

    double at(std::size_t i, std::size_t j) const { return rates[i * axes.at(1).values.size() + j]; }
    std::vector<double> best_coords() const;
};

std::vector<double> default_alpha_grid();  // 0, 0.25, ..., 2
std::vector<double> default_bhat_grid();   // 0, 0.05, ..., 0.5

/// beta = bhat * mean row norm of `bundle` at `layer`.
std::vector<double> beta_grid(const ActivationBundle& bundle, std::size_t layer, const std::vector<double>& bhats);

/// Every (alpha, beta) cell at `layer`; best is the highest rate, ties to
/// smaller alpha then smaller beta.
SweepResult grid_search(const Evaluator& eval, const DirectionVector& refusal, const DirectionVector& harm,
                        std::size_t layer, const std::vector<double>& alphas, const std::vector<double>& betas,
                        Order order = Order::kStandard);

InterventionConfig best_config(const SweepResult& grid, const DirectionVector& refusal, const DirectionVector& harm,
                               std::size_t layer);

struct OrderResult {
    double standard_rate = 0.0;
    double reversed_rate = 0.0;
};

OrderResult ablate_order(const Evaluator& eval, const InterventionConfig& cfg);

/// Settings shared by the re-extracting sweeps.
struct PipelineOptions {
    double retain = 0.5;
    std::vector<double> alphas = default_alpha_grid();
    std::vector<double> bhats = default_bhat_grid();
    ProbeOptions probe;
};

struct LayerCalibration {
    DirectionVector refusal;
    DirectionVector harm;
    SweepResult grid;
    InterventionConfig best;
};

/// Extract both directions at `layer` and grid-search there.
LayerCalibration calibrate_layer(const Evaluator& eval, const ActivationBundle& refusal_bundle,
                                 const ActivationBundle& harm_bundle, std::size_t layer,
                                 const PipelineOptions& opts = {});

/// Best rate per layer, directions re-extracted at each layer.
SweepResult ablate_layers(const Evaluator& eval, const ActivationBundle& refusal_bundle,
                          const ActivationBundle& harm_bundle, const std::vector<std::size_t>& layers,
                          const PipelineOptions& opts = {});

/// Best rate per retention fraction at a fixed layer.
SweepResult ablate_retention(const Evaluator& eval, const ActivationBundle& refusal_bundle,
                             const ActivationBundle& harm_bundle, std::size_t layer, const std::vector<double>& rhos,
                             const PipelineOptions& opts = {});

/// Best rate per calibration size: bundles of n_pairs = N are regenerated
/// from the toy model with `bundle_seed`.
SweepResult ablate_calibration_size(const Evaluator& eval, const std::vector<std::size_t>& sizes,
                                    std::uint64_t bundle_seed, std::size_t layer, const PipelineOptions& opts = {});

}  // namespace dirsteer
