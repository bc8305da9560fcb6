#include "dirsteer/direction_extraction.hpp"

#include <fmt/format.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dirsteer/error.hpp"

namespace dirsteer {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_probe_inputs(const Matrix& x, std::span<const std::uint8_t> labels) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
        fail(ErrorCode::kShapeMismatch, fmt::format("{} rows but {} labels", x.rows(), labels.size()));
    }
    if (!x.allFinite()) fail(ErrorCode::kNonFinite, "probe inputs contain non-finite values");
    std::size_t pos = 0;
    for (auto y : labels) {
        if (y > 1) fail(ErrorCode::kValidation, "labels must be 0 or 1");
        pos += y;
    }
    if (pos == 0 || pos == labels.size()) fail(ErrorCode::kSingleClass, "probe needs both classes");
}

double accuracy(const LinearModel& model, const Matrix& x, std::span<const std::uint8_t> labels) {
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        correct += model.predict(x.row(i).transpose()) == (labels[static_cast<std::size_t>(i)] == 1);
    }
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

}  // namespace

void validate_direction(const DirectionVector& dir, double norm_tol) {
    const auto d = dir.hidden_dim();
    if (d == 0) fail(ErrorCode::kInvalidDirection, "empty direction");
    if (dir.mask.size() != d) fail(ErrorCode::kShapeMismatch, fmt::format("mask has {} entries, values {}", dir.mask.size(), d));
    if (!dir.values.allFinite()) fail(ErrorCode::kNonFinite, "direction has non-finite values");
    if (std::abs(dir.values.norm() - 1.0) > norm_tol) {
        fail(ErrorCode::kInvalidDirection, fmt::format("direction norm {} is not 1", dir.values.norm()));
    }
    std::size_t count = 0;
    for (std::size_t j = 0; j < d; ++j) {
        if (dir.mask[j] > 1) fail(ErrorCode::kValidation, "mask entries must be 0 or 1");
        count += dir.mask[j];
        if (dir.mask[j] == 0 && dir.values[static_cast<Eigen::Index>(j)] != 0.0) {
            fail(ErrorCode::kInvalidDirection, fmt::format("value {} is outside the mask", j));
        }
    }
    if (count == 0 || count != dir.retained_count) {
        fail(ErrorCode::kValidation, fmt::format("retained_count {} but mask keeps {}", dir.retained_count, count));
    }
}

Matrix difference_matrix(const ContrastSet& cs) {
    if (cs.positive.rows() != cs.negative.rows() || cs.positive.cols() != cs.negative.cols()) {
        fail(ErrorCode::kShapeMismatch, fmt::format("contrast matrices {}x{} vs {}x{}", cs.positive.rows(),
                                                    cs.positive.cols(), cs.negative.rows(), cs.negative.cols()));
    }
    return cs.positive - cs.negative;
}

Vector raw_direction(const Matrix& diff) {
    if (diff.size() == 0) fail(ErrorCode::kEmptyInput, "difference matrix is empty");
    if (!diff.allFinite()) fail(ErrorCode::kNonFinite, "difference matrix has non-finite values");
    if (diff.norm() <= 1e-9) fail(ErrorCode::kDegenerateMatrix, "difference matrix is (numerically) zero");

    Eigen::BDCSVD<Matrix> svd(diff, Eigen::ComputeThinV);
    Vector v = svd.matrixV().col(0);
    v.normalize();
    const Vector mean_row = diff.colwise().mean().transpose();
    if (mean_row.dot(v) < 0) v = -v;
    return v;
}

LinearModel fit_logistic(const Matrix& x, std::span<const std::uint8_t> labels, const ProbeOptions& opts) {
    check_probe_inputs(x, labels);
    const auto n = static_cast<double>(x.rows());
    Vector y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = labels[static_cast<std::size_t>(i)];

    LinearModel model{Vector::Zero(x.cols()), 0.0};
    Vector residual(x.rows());
    for (int it = 0; it < opts.iterations; ++it) {
        const Vector z = x * model.weights;
        for (Eigen::Index i = 0; i < x.rows(); ++i) residual[i] = sigmoid(z[i] + model.bias) - y[i];
        const Vector grad_w = x.transpose() * residual / n + 2.0 * opts.l2 * model.weights;
        const double grad_b = residual.sum() / n;
        model.weights -= opts.learning_rate * grad_w;
        model.bias -= opts.learning_rate * grad_b;
    }
    return model;
}

std::vector<int> stratified_folds(std::span<const std::uint8_t> labels, int folds, std::uint64_t seed) {
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<int> fold(labels.size(), 0);
    int next[2] = {0, 0};
    for (auto i : order) {
        const int c = labels[i];
        fold[i] = next[c];
        next[c] = (next[c] + 1) % folds;
    }
    return fold;
}

ProbeResult train_probe(const Matrix& x, std::span<const std::uint8_t> labels, const ProbeOptions& opts) {
    check_probe_inputs(x, labels);
    if (x.rows() < 10) fail(ErrorCode::kInsufficientData, fmt::format("probe needs >= 10 rows, got {}", x.rows()));

    ProbeResult result;
    const LinearModel full = fit_logistic(x, labels, opts);
    result.weights = full.weights;
    result.bias = full.bias;
    result.train_accuracy = accuracy(full, x, labels);

    const auto fold = stratified_folds(labels, opts.folds, opts.cv_seed);
    std::size_t correct = 0;
    for (int f = 0; f < opts.folds; ++f) {
        std::vector<Eigen::Index> train_rows;
        std::vector<Eigen::Index> test_rows;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            (fold[i] == f ? test_rows : train_rows).push_back(static_cast<Eigen::Index>(i));
        }
        if (test_rows.empty()) continue;
        std::vector<std::uint8_t> train_labels;
        for (auto i : train_rows) train_labels.push_back(labels[static_cast<std::size_t>(i)]);
        const Matrix train_x = x(train_rows, Eigen::all);
        const LinearModel model = fit_logistic(train_x, train_labels, opts);
        for (auto i : test_rows) correct += model.predict(x.row(i).transpose()) == (labels[static_cast<std::size_t>(i)] == 1);
    }
    result.cv_accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    return result;
}

std::size_t retained_count_for(double retain, std::size_t dim) {
    if (!(retain > 0.0) || retain > 1.0) fail(ErrorCode::kOutOfRange, fmt::format("retain {} not in (0, 1]", retain));
    const double raw = std::ceil(retain * static_cast<double>(dim) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, dim);
}

std::vector<std::uint8_t> importance_mask(const Vector& weights, double retain) {
    const auto d = static_cast<std::size_t>(weights.size());
    if (d == 0) fail(ErrorCode::kEmptyInput, "no weights");
    if (!weights.allFinite()) fail(ErrorCode::kNonFinite, "weights contain non-finite values");
    const std::size_t keep = retained_count_for(retain, d);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(weights[static_cast<Eigen::Index>(a)]) > std::abs(weights[static_cast<Eigen::Index>(b)]);
    });
    std::vector<std::uint8_t> mask(d, 0);
    for (std::size_t k = 0; k < keep; ++k) mask[order[k]] = 1;
    return mask;
}

Vector sparsify_direction(const Vector& raw, std::span<const std::uint8_t> mask) {
    if (mask.size() != static_cast<std::size_t>(raw.size())) {
        fail(ErrorCode::kShapeMismatch, fmt::format("mask has {} entries, vector {}", mask.size(), raw.size()));
    }
    Vector out = raw;
    bool any = false;
    for (std::size_t j = 0; j < mask.size(); ++j) {
        if (mask[j] == 0) out[static_cast<Eigen::Index>(j)] = 0.0;
        any = any || mask[j] != 0;
    }
    if (!any) fail(ErrorCode::kDegenerateMask, "mask keeps no entries");
    const double norm = out.norm();
    if (norm <= 1e-9) fail(ErrorCode::kDegenerateMask, "masked direction has zero norm");
    return out / norm;
}

Extraction extract_direction(const ActivationBundle& bundle, std::size_t layer, ContrastKind kind, double retain,
                             const ProbeOptions& opts) {
    // Fail on a bad retain before doing any work.
    (void)retained_count_for(retain, bundle.hidden_dim);

    const ContrastSet cs = make_contrast_set(bundle, layer, kind);
    const Vector raw = raw_direction(difference_matrix(cs));

    Matrix x(cs.positive.rows() + cs.negative.rows(), cs.positive.cols());
    x << cs.positive, cs.negative;
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(x.rows()), 0);
    std::fill_n(labels.begin(), cs.positive.rows(), std::uint8_t{1});

    Extraction out;
    out.probe = train_probe(x, labels, opts);
    auto& dir = out.direction;
    dir.mask = importance_mask(out.probe.weights, retain);
    dir.values = sparsify_direction(raw, dir.mask);
    dir.kind = kind;
    dir.layer = layer;
    dir.retain = retain;
    dir.retained_count = static_cast<std::size_t>(std::count(dir.mask.begin(), dir.mask.end(), std::uint8_t{1}));
    dir.provenance = fmt::format("bundle=sha256:{};model={};layer={};kind={};retain={};pairs={}",
                                 bundle_digest(bundle), bundle.model_id, layer, to_string(kind), retain,
                                 cs.positive.rows());
    return out;
}

}  // namespace dirsteer
