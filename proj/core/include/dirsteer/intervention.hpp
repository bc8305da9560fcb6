#pragma once

#include <cstddef>
#include <filesystem>
#include <string_view>

#include "dirsteer/direction_extraction.hpp"

namespace dirsteer {

enum class Order { kStandard, kReversed };

std::string_view to_string(Order order) noexcept;
Order parse_order(std::string_view text);

struct InterventionConfig {
    std::size_t layer = 0;
    double alpha = 0.0;
    double beta = 0.0;
    Order order = Order::kStandard;
    DirectionVector refusal;
    DirectionVector harm;
};

/// Kinds, matching dims, unit vectors, alpha/beta >= 0.
void validate_config(const InterventionConfig& cfg);

/// h - alpha (h.v) v
Vector project_out(const Vector& h, const Vector& v, double alpha);
/// h - beta u
Vector steer(const Vector& h, const Vector& u, double beta);

/// standard: steer(project_out(h, v, alpha), u, beta)
/// reversed: project_out(steer(h, u, beta), v, alpha)
Vector dbdi_transform(const Vector& h, const InterventionConfig& cfg);

/// Row-wise dbdi_transform without per-row validation. cfg must already be
/// valid. Same arithmetic as dbdi_transform, so results match bit for bit.
void dbdi_transform_rows(Matrix& rows, const InterventionConfig& cfg);

/// Config file: {"layer", "alpha", "beta", "order", "refusal": path, "harm": path}.
/// Relative direction paths resolve against the config file's directory.
InterventionConfig read_intervention_config(const std::filesystem::path& path);
void write_intervention_config(const InterventionConfig& cfg, const std::filesystem::path& path,
                               const std::filesystem::path& refusal_file, const std::filesystem::path& harm_file);

}  // namespace dirsteer
