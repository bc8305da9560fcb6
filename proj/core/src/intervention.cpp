#include "dirsteer/intervention.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "dirsteer/error.hpp"

namespace dirsteer {

namespace {

using nlohmann::json;

constexpr double kUnitTol = 1e-6;

void check_unit(const Vector& v, const char* what) {
    if (v.size() == 0 || !v.allFinite() || std::abs(v.norm() - 1.0) > kUnitTol) {
        fail(ErrorCode::kInvalidDirection, fmt::format("{} must be a finite unit vector (norm {})", what, v.norm()));
    }
}

void check_same_dim(const Vector& h, const Vector& v) {
    if (h.size() != v.size()) fail(ErrorCode::kShapeMismatch, fmt::format("dimension {} vs {}", h.size(), v.size()));
}

// Plain left-to-right loops: the same arithmetic regardless of how the
// caller's vector is laid out.
double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector project_out_unchecked(const Vector& h, const Vector& v, double alpha) {
    const double c = alpha * dot(h, v);
    Vector out(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) out[i] = h[i] - c * v[i];
    return out;
}

Vector steer_unchecked(const Vector& h, const Vector& u, double beta) {
    Vector out(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) out[i] = h[i] - beta * u[i];
    return out;
}

Vector transform_unchecked(const Vector& h, const InterventionConfig& cfg) {
    if (cfg.order == Order::kStandard) {
        return steer_unchecked(project_out_unchecked(h, cfg.refusal.values, cfg.alpha), cfg.harm.values, cfg.beta);
    }
    return project_out_unchecked(steer_unchecked(h, cfg.harm.values, cfg.beta), cfg.refusal.values, cfg.alpha);
}

template <typename T>
T field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) fail(ErrorCode::kBadFormat, fmt::format("config missing key '{}'", key));
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::kBadFormat, fmt::format("config key '{}' has wrong type", key));
    }
}

}  // namespace

std::string_view to_string(Order order) noexcept { return order == Order::kStandard ? "standard" : "reversed"; }

Order parse_order(std::string_view text) {
    if (text == "standard") return Order::kStandard;
    if (text == "reversed") return Order::kReversed;
    fail(ErrorCode::kValidation, fmt::format("unknown order '{}' (expected standard|reversed)", text));
}

void validate_config(const InterventionConfig& cfg) {
    if (cfg.refusal.kind != ContrastKind::kRefusal) fail(ErrorCode::kValidation, "refusal direction has kind harm");
    if (cfg.harm.kind != ContrastKind::kHarm) fail(ErrorCode::kValidation, "harm direction has kind refusal");
    if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) fail(ErrorCode::kOutOfRange, fmt::format("alpha {} < 0", cfg.alpha));
    if (!(cfg.beta >= 0.0) || !std::isfinite(cfg.beta)) fail(ErrorCode::kOutOfRange, fmt::format("beta {} < 0", cfg.beta));
    check_unit(cfg.refusal.values, "refusal direction");
    check_unit(cfg.harm.values, "harm direction");
    if (cfg.refusal.hidden_dim() != cfg.harm.hidden_dim()) {
        fail(ErrorCode::kShapeMismatch, fmt::format("refusal dim {} vs harm dim {}", cfg.refusal.hidden_dim(),
                                                    cfg.harm.hidden_dim()));
    }
}

Vector project_out(const Vector& h, const Vector& v, double alpha) {
    check_unit(v, "projection direction");
    check_same_dim(h, v);
    if (!h.allFinite()) fail(ErrorCode::kNonFinite, "hidden state has non-finite values");
    return project_out_unchecked(h, v, alpha);
}

Vector steer(const Vector& h, const Vector& u, double beta) {
    check_unit(u, "steering direction");
    check_same_dim(h, u);
    return steer_unchecked(h, u, beta);
}

Vector dbdi_transform(const Vector& h, const InterventionConfig& cfg) {
    validate_config(cfg);
    check_same_dim(h, cfg.refusal.values);
    return transform_unchecked(h, cfg);
}

void dbdi_transform_rows(Matrix& rows, const InterventionConfig& cfg) {
    if (rows.cols() != static_cast<Eigen::Index>(cfg.refusal.hidden_dim())) {
        fail(ErrorCode::kShapeMismatch, fmt::format("rows have {} columns, directions {}", rows.cols(),
                                                    cfg.refusal.hidden_dim()));
    }
    Vector h(rows.cols());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        h = rows.row(i).transpose();
        rows.row(i) = transform_unchecked(h, cfg).transpose();
    }
}

InterventionConfig read_intervention_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(std::filesystem::exists(path) ? ErrorCode::kIo : ErrorCode::kMissingFile,
             fmt::format("cannot open config {}", path.string()));
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::kBadFormat, fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) fail(ErrorCode::kBadFormat, "config JSON must be an object");

    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    InterventionConfig cfg;
    cfg.layer = field<std::size_t>(j, "layer");
    cfg.alpha = field<double>(j, "alpha");
    cfg.beta = field<double>(j, "beta");
    cfg.order = j.contains("order") ? parse_order(field<std::string>(j, "order")) : Order::kStandard;
    cfg.refusal = read_direction(resolve(field<std::string>(j, "refusal")));
    cfg.harm = read_direction(resolve(field<std::string>(j, "harm")));
    validate_config(cfg);
    return cfg;
}

void write_intervention_config(const InterventionConfig& cfg, const std::filesystem::path& path,
                               const std::filesystem::path& refusal_file, const std::filesystem::path& harm_file) {
    validate_config(cfg);
    json j;
    j["layer"] = cfg.layer;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["order"] = std::string(to_string(cfg.order));
    j["refusal"] = refusal_file.generic_string();
    j["harm"] = harm_file.generic_string();
    const std::string text = j.dump(2) + "\n";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, fmt::format("cannot open {} for writing", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(ErrorCode::kIo, fmt::format("write to {} failed", path.string()));
}

}  // namespace dirsteer
