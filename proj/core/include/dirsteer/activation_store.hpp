#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dirsteer {

// Row = prompt, column = neuron. Row-major so a layer file is one memcpy.
using LayerMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ContrastKind { kRefusal, kHarm };

std::string_view to_string(ContrastKind kind) noexcept;
ContrastKind parse_contrast_kind(std::string_view text);

/// (positive_row, negative_row)
using RowPair = std::pair<std::size_t, std::size_t>;

/// Layer-indexed activations for a labelled prompt set.
///
/// labels[i] == 1 marks the positive class. Which class that is
/// (benign for refusal bundles, harmful for harm bundles) is recorded in
/// positive_means so that "positive - negative" is always the contrast.
struct ActivationBundle {
    std::string model_id;
    std::size_t num_layers = 0;
    std::size_t hidden_dim = 0;
    std::vector<std::uint8_t> labels;
    std::optional<std::vector<RowPair>> pairing;
    std::vector<LayerMatrix> layers;
    std::string token_policy;
    std::string positive_means;
    // Free-form key/value provenance (seed, tool version, ...). Round-trips.
    std::map<std::string, std::string> provenance;

    std::size_t num_rows() const noexcept { return labels.size(); }

    bool operator==(const ActivationBundle&) const;
};

/// Throws Error if any invariant is violated: shapes, N >= 2, finiteness,
/// both labels present, pairing indices in range and unique.
void validate_bundle(const ActivationBundle& bundle);

inline constexpr std::string_view kBundleFormatVersion = "1";
inline constexpr std::string_view kBundleDtype = "f32le";

std::string layer_file_name(std::size_t layer);

void write_bundle(const ActivationBundle& bundle, const std::filesystem::path& dir);
ActivationBundle read_bundle(const std::filesystem::path& dir);

/// SHA-256 over the bundle's canonical content (metadata + raw layer bytes).
std::string bundle_digest(const ActivationBundle& bundle);

/// Positive/negative activations at one layer. For kRefusal row i of both
/// matrices comes from one twin pair.
struct ContrastSet {
    Matrix positive;
    Matrix negative;
    ContrastKind kind = ContrastKind::kRefusal;
};

ContrastSet make_contrast_set(const ActivationBundle& bundle, std::size_t layer, ContrastKind kind);

/// One layer of the bundle as doubles.
Matrix layer_as_double(const ActivationBundle& bundle, std::size_t layer);

/// Mean Euclidean row norm at a layer (scale reference for the steering grid).
double mean_row_norm(const ActivationBundle& bundle, std::size_t layer);

}  // namespace dirsteer
