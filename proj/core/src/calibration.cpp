#include "dirsteer/calibration.hpp"

#include <fmt/format.h>

#include "dirsteer/error.hpp"

namespace dirsteer {

namespace {

constexpr std::uint64_t kEvalTag = 4;
constexpr std::uint64_t kBenignTwinTag = 5;
constexpr std::uint64_t kNeutralTag = 6;

double fraction_below_zero(const Vector& scores) {
    return static_cast<double>((scores.array() < 0.0).count()) / static_cast<double>(scores.size());
}

std::vector<double> linspace_steps(double step, int count) {
    std::vector<double> out;
    for (int i = 0; i <= count; ++i) out.push_back(step * i);
    return out;
}

// One-axis sweep; ties keep the earliest entry.
SweepResult one_axis(std::string name, std::vector<double> values, std::vector<double> rates) {
    SweepResult r;
    r.axes.push_back({std::move(name), std::move(values)});
    r.rates = std::move(rates);
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.rates.size(); ++i) {
        if (r.rates[i] > r.rates[best]) best = i;
    }
    r.best_index = {best};
    r.best_rate = r.rates[best];
    return r;
}

}  // namespace

Evaluator::Evaluator(const ToyModel& model, std::size_t n_eval, std::uint64_t seed) : model_(&model) {
    if (n_eval < 20) fail(ErrorCode::kInsufficientData, fmt::format("n_eval must be >= 20, got {}", n_eval));
    trace_ = trace(model, make_inputs(model, derive_stream(seed, kEvalTag), n_eval, InputKind::kHarmful));
}

double Evaluator::rate(const InterventionConfig& cfg) const {
    validate_config(cfg);
    if (cfg.refusal.hidden_dim() != model_->spec.hidden_dim) {
        fail(ErrorCode::kShapeMismatch, fmt::format("directions have d={}, model d={}", cfg.refusal.hidden_dim(),
                                                    model_->spec.hidden_dim));
    }
    if (cfg.layer >= model_->spec.num_layers) {
        fail(ErrorCode::kOutOfRange, fmt::format("layer {} >= num_layers {}", cfg.layer, model_->spec.num_layers));
    }
    return fraction_below_zero(
        resume_scores(*model_, trace_, cfg.layer, [&cfg](Matrix& h) { dbdi_transform_rows(h, cfg); }));
}

double Evaluator::baseline() const { return fraction_below_zero(trace_.scores); }

double asr_proxy(const ToyModel& model, const InterventionConfig& cfg, std::size_t n_eval, std::uint64_t seed) {
    return Evaluator(model, n_eval, seed).rate(cfg);
}

double benign_compliance(const ToyModel& model, std::size_t n_eval, std::uint64_t seed) {
    if (n_eval < 20) fail(ErrorCode::kInsufficientData, fmt::format("n_eval must be >= 20, got {}", n_eval));
    const std::size_t twins = n_eval / 2;
    Matrix x(static_cast<Eigen::Index>(n_eval), static_cast<Eigen::Index>(model.spec.hidden_dim));
    x << make_inputs(model, derive_stream(seed, kBenignTwinTag), twins, InputKind::kBenignTwin),
        make_inputs(model, derive_stream(seed, kNeutralTag), n_eval - twins, InputKind::kNeutral);
    return fraction_below_zero(forward(model, x).scores);
}

std::vector<double> SweepResult::best_coords() const {
    std::vector<double> out;
    for (std::size_t a = 0; a < axes.size(); ++a) out.push_back(axes[a].values[best_index[a]]);
    return out;
}

std::vector<double> default_alpha_grid() { return linspace_steps(0.25, 8); }
std::vector<double> default_bhat_grid() { return linspace_steps(0.05, 10); }

std::vector<double> beta_grid(const ActivationBundle& bundle, std::size_t layer, const std::vector<double>& bhats) {
    const double scale = mean_row_norm(bundle, layer);
    std::vector<double> out;
    for (double b : bhats) out.push_back(b * scale);
    return out;
}

SweepResult grid_search(const Evaluator& eval, const DirectionVector& refusal, const DirectionVector& harm,
                        std::size_t layer, const std::vector<double>& alphas, const std::vector<double>& betas,
                        Order order) {
    if (alphas.empty() || betas.empty()) fail(ErrorCode::kEmptyInput, "alpha and beta grids must be non-empty");
    SweepResult r;
    r.axes = {{"alpha", alphas}, {"beta", betas}};
    r.rates.reserve(alphas.size() * betas.size());
    InterventionConfig cfg{layer, 0.0, 0.0, order, refusal, harm};
    std::size_t bi = 0;
    std::size_t bj = 0;
    r.best_rate = -1.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        for (std::size_t j = 0; j < betas.size(); ++j) {
            cfg.alpha = alphas[i];
            cfg.beta = betas[j];
            const double rate = eval.rate(cfg);
            r.rates.push_back(rate);
            const bool better = rate > r.best_rate ||
                                (rate == r.best_rate && (alphas[i] < alphas[bi] ||
                                                         (alphas[i] == alphas[bi] && betas[j] < betas[bj])));
            if (better) {
                r.best_rate = rate;
                bi = i;
                bj = j;
            }
        }
    }
    r.best_index = {bi, bj};
    return r;
}

InterventionConfig best_config(const SweepResult& grid, const DirectionVector& refusal, const DirectionVector& harm,
                               std::size_t layer) {
    if (grid.axes.size() != 2 || grid.axes[0].name != "alpha" || grid.axes[1].name != "beta") {
        fail(ErrorCode::kValidation, "not an alpha x beta grid");
    }
    const auto c = grid.best_coords();
    return InterventionConfig{layer, c[0], c[1], Order::kStandard, refusal, harm};
}

OrderResult ablate_order(const Evaluator& eval, const InterventionConfig& cfg) {
    InterventionConfig c = cfg;
    OrderResult out;
    c.order = Order::kStandard;
    out.standard_rate = eval.rate(c);
    c.order = Order::kReversed;
    out.reversed_rate = eval.rate(c);
    return out;
}

LayerCalibration calibrate_layer(const Evaluator& eval, const ActivationBundle& refusal_bundle,
                                 const ActivationBundle& harm_bundle, std::size_t layer, const PipelineOptions& opts) {
    LayerCalibration out;
    out.refusal = extract_direction(refusal_bundle, layer, ContrastKind::kRefusal, opts.retain, opts.probe).direction;
    out.harm = extract_direction(harm_bundle, layer, ContrastKind::kHarm, opts.retain, opts.probe).direction;
    out.grid = grid_search(eval, out.refusal, out.harm, layer, opts.alphas, beta_grid(refusal_bundle, layer, opts.bhats));
    out.best = best_config(out.grid, out.refusal, out.harm, layer);
    return out;
}

SweepResult ablate_layers(const Evaluator& eval, const ActivationBundle& refusal_bundle,
                          const ActivationBundle& harm_bundle, const std::vector<std::size_t>& layers,
                          const PipelineOptions& opts) {
    if (layers.empty()) fail(ErrorCode::kEmptyInput, "no layers to sweep");
    std::vector<double> values;
    std::vector<double> rates;
    for (auto l : layers) {
        values.push_back(static_cast<double>(l));
        rates.push_back(calibrate_layer(eval, refusal_bundle, harm_bundle, l, opts).grid.best_rate);
    }
    return one_axis("layer", std::move(values), std::move(rates));
}

SweepResult ablate_retention(const Evaluator& eval, const ActivationBundle& refusal_bundle,
                             const ActivationBundle& harm_bundle, std::size_t layer, const std::vector<double>& rhos,
                             const PipelineOptions& opts) {
    if (rhos.empty()) fail(ErrorCode::kEmptyInput, "no retention fractions to sweep");
    std::vector<double> rates;
    for (double rho : rhos) {
        PipelineOptions o = opts;
        o.retain = rho;
        rates.push_back(calibrate_layer(eval, refusal_bundle, harm_bundle, layer, o).grid.best_rate);
    }
    return one_axis("retain", rhos, std::move(rates));
}

SweepResult ablate_calibration_size(const Evaluator& eval, const std::vector<std::size_t>& sizes,
                                    std::uint64_t bundle_seed, std::size_t layer, const PipelineOptions& opts) {
    if (sizes.empty()) fail(ErrorCode::kEmptyInput, "no calibration sizes to sweep");
    std::vector<double> values;
    std::vector<double> rates;
    for (auto n : sizes) {
        const auto ref = generate_synthetic_bundle(eval.model(), n, ContrastKind::kRefusal, bundle_seed);
        const auto harm = generate_synthetic_bundle(eval.model(), n, ContrastKind::kHarm, bundle_seed);
        values.push_back(static_cast<double>(n));
        rates.push_back(calibrate_layer(eval, ref, harm, layer, opts).grid.best_rate);
    }
    return one_axis("n_pairs", std::move(values), std::move(rates));
}

}  // namespace dirsteer
