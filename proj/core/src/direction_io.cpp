#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dirsteer/direction_extraction.hpp"
#include "dirsteer/error.hpp"

namespace dirsteer {

namespace {

using nlohmann::json;

template <typename T>
T field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) fail(ErrorCode::kBadFormat, fmt::format("direction missing key '{}'", key));
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::kBadFormat, fmt::format("direction key '{}' has wrong type", key));
    }
}

}  // namespace

std::string direction_to_json(const DirectionVector& dir) {
    validate_direction(dir);
    // Written by hand so every value carries 17 significant digits.
    std::string out = "{\n";
    out += fmt::format("  \"format_version\": \"{}\",\n", kDirectionFormatVersion);
    out += fmt::format("  \"kind\": \"{}\",\n", to_string(dir.kind));
    out += fmt::format("  \"layer\": {},\n", dir.layer);
    out += fmt::format("  \"hidden_dim\": {},\n", dir.hidden_dim());
    out += fmt::format("  \"retain\": {:.17g},\n", dir.retain);
    out += fmt::format("  \"retained_count\": {},\n", dir.retained_count);
    out += "  \"values\": [";
    for (Eigen::Index j = 0; j < dir.values.size(); ++j) {
        out += fmt::format("{}{:.17g}", j ? ", " : "", dir.values[j]);
    }
    out += "],\n  \"mask\": [";
    for (std::size_t j = 0; j < dir.mask.size(); ++j) out += fmt::format("{}{}", j ? ", " : "", dir.mask[j]);
    out += "],\n";
    out += fmt::format("  \"provenance\": {}\n", json(dir.provenance).dump());
    out += "}\n";
    return out;
}

DirectionVector direction_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::kBadFormat, fmt::format("direction is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) fail(ErrorCode::kBadFormat, "direction JSON must be an object");
    if (field<std::string>(j, "format_version") != kDirectionFormatVersion) {
        fail(ErrorCode::kBadFormat, "unsupported direction format_version");
    }

    DirectionVector dir;
    dir.kind = parse_contrast_kind(field<std::string>(j, "kind"));
    dir.layer = field<std::size_t>(j, "layer");
    dir.retain = field<double>(j, "retain");
    dir.retained_count = field<std::size_t>(j, "retained_count");
    dir.provenance = field<std::string>(j, "provenance");
    const auto d = field<std::size_t>(j, "hidden_dim");
    const auto values = field<std::vector<double>>(j, "values");
    dir.mask = field<std::vector<std::uint8_t>>(j, "mask");
    if (values.size() != d || dir.mask.size() != d) {
        fail(ErrorCode::kShapeMismatch,
             fmt::format("hidden_dim {} but {} values and {} mask entries", d, values.size(), dir.mask.size()));
    }
    dir.values = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(d));
    if (!dir.values.allFinite()) fail(ErrorCode::kNonFinite, "direction has non-finite values");

    const double norm = dir.values.norm();
    if (std::abs(norm - 1.0) > 1e-4) {
        fail(ErrorCode::kInvalidDirection, fmt::format("direction norm {} deviates from 1 by more than 1e-4", norm));
    }
    dir.values /= norm;
    validate_direction(dir);
    return dir;
}

void write_direction(const DirectionVector& dir, const std::filesystem::path& path) {
    const std::string text = direction_to_json(dir);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, fmt::format("cannot open {} for writing", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(ErrorCode::kIo, fmt::format("write to {} failed", path.string()));
}

DirectionVector read_direction(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) {
        fail(ErrorCode::kMissingFile, fmt::format("direction file {} not found", path.string()));
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return direction_from_json(buf.str());
}

}  // namespace dirsteer
