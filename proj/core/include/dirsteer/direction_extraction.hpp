#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dirsteer/activation_store.hpp"

namespace dirsteer {

/// A unit direction in activation space plus the neuron mask it was
/// restricted to. values_j == 0 wherever mask_j == 0.
struct DirectionVector {
    Vector values;
    std::vector<std::uint8_t> mask;
    ContrastKind kind = ContrastKind::kRefusal;
    std::size_t layer = 0;
    double retain = 1.0;
    std::size_t retained_count = 0;
    std::string provenance;

    std::size_t hidden_dim() const noexcept { return static_cast<std::size_t>(values.size()); }
};

/// Checks unit norm (within tol), support inside the mask, and
/// retained_count == popcount(mask) >= 1.
void validate_direction(const DirectionVector& dir, double norm_tol = 1e-6);

/// Logistic-regression probe settings. Defaults are the library defaults
/// used everywhere else (full-batch GD, zero init, no standardisation).
struct ProbeOptions {
    double learning_rate = 0.1;
    int iterations = 500;
    double l2 = 1e-3;
    int folds = 5;
    std::uint64_t cv_seed = 42;
};

struct LinearModel {
    Vector weights;
    double bias = 0.0;

    bool predict(const Eigen::Ref<const Vector>& x) const { return x.dot(weights) + bias > 0.0; }
};

struct ProbeResult {
    Vector weights;
    double bias = 0.0;
    double train_accuracy = 0.0;
    double cv_accuracy = 0.0;
};

/// positive - negative, row-wise.
Matrix difference_matrix(const ContrastSet& cs);

/// Top right singular vector of D, oriented so mean_row(D) . v >= 0.
Vector raw_direction(const Matrix& diff);

/// Minimises mean cross-entropy + l2 * ||w||^2 (bias unpenalised).
LinearModel fit_logistic(const Matrix& x, std::span<const std::uint8_t> labels, const ProbeOptions& opts = {});

/// Fold index per row: rows shuffled with opts.cv_seed, then dealt
/// round-robin within each class.
std::vector<int> stratified_folds(std::span<const std::uint8_t> labels, int folds, std::uint64_t seed);

ProbeResult train_probe(const Matrix& x, std::span<const std::uint8_t> labels, const ProbeOptions& opts = {});

/// ceil(retain * d), snapped against representation error so 0.3 * 10 == 3.
std::size_t retained_count_for(double retain, std::size_t dim);

/// Keeps the ceil(retain * d) entries with the largest |w_j|; ties go to the
/// lower index.
std::vector<std::uint8_t> importance_mask(const Vector& weights, double retain);

Vector sparsify_direction(const Vector& raw, std::span<const std::uint8_t> mask);

struct Extraction {
    DirectionVector direction;
    ProbeResult probe;
};

/// contrast set -> difference matrix -> SVD direction -> probe -> mask -> sparsify.
Extraction extract_direction(const ActivationBundle& bundle, std::size_t layer, ContrastKind kind, double retain,
                             const ProbeOptions& opts = {});

inline constexpr std::string_view kDirectionFormatVersion = "1";

/// JSON text; values printed with 17 significant digits.
std::string direction_to_json(const DirectionVector& dir);

/// Parses, checks the mask, and re-normalises values. Rejects vectors whose
/// norm is off by more than 1e-4 (kInvalidDirection).
DirectionVector direction_from_json(std::string_view text);

void write_direction(const DirectionVector& dir, const std::filesystem::path& path);
DirectionVector read_direction(const std::filesystem::path& path);

}  // namespace dirsteer
