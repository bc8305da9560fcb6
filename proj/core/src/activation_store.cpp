#include "dirsteer/activation_store.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "dirsteer/digest.hpp"
#include "dirsteer/error.hpp"

namespace dirsteer {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ContrastKind kind) noexcept {
    return kind == ContrastKind::kRefusal ? "refusal" : "harm";
}

ContrastKind parse_contrast_kind(std::string_view text) {
    if (text == "refusal") return ContrastKind::kRefusal;
    if (text == "harm") return ContrastKind::kHarm;
    fail(ErrorCode::kValidation, fmt::format("unknown kind '{}' (expected refusal|harm)", text));
}

bool ActivationBundle::operator==(const ActivationBundle& other) const {
    if (model_id != other.model_id || num_layers != other.num_layers || hidden_dim != other.hidden_dim ||
        labels != other.labels || pairing != other.pairing || token_policy != other.token_policy ||
        positive_means != other.positive_means || provenance != other.provenance ||
        layers.size() != other.layers.size()) {
        return false;
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& a = layers[l];
        const auto& b = other.layers[l];
        if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
        if (std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) != 0) {
            return false;
        }
    }
    return true;
}

void validate_bundle(const ActivationBundle& b) {
    if (b.num_layers < 1) fail(ErrorCode::kValidation, "num_layers must be >= 1");
    if (b.hidden_dim < 1) fail(ErrorCode::kValidation, "hidden_dim must be >= 1");
    const std::size_t n = b.num_rows();
    if (n < 2) fail(ErrorCode::kInsufficientData, fmt::format("bundle needs >= 2 rows, has {}", n));
    if (b.layers.size() != b.num_layers) {
        fail(ErrorCode::kShapeMismatch,
             fmt::format("expected {} layer matrices, got {}", b.num_layers, b.layers.size()));
    }
    bool has_pos = false;
    bool has_neg = false;
    for (auto label : b.labels) {
        if (label > 1) fail(ErrorCode::kValidation, "labels must be 0 or 1");
        (label == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) fail(ErrorCode::kSingleClass, "labels need at least one positive and one negative row");

    for (std::size_t l = 0; l < b.layers.size(); ++l) {
        const auto& m = b.layers[l];
        if (static_cast<std::size_t>(m.rows()) != n || static_cast<std::size_t>(m.cols()) != b.hidden_dim) {
            fail(ErrorCode::kShapeMismatch, fmt::format("layer {} is {}x{}, expected {}x{}", l, m.rows(),
                                                        m.cols(), n, b.hidden_dim));
        }
        if (!m.allFinite()) fail(ErrorCode::kNonFinite, fmt::format("layer {} has non-finite values", l));
    }

    if (b.pairing) {
        std::vector<bool> used(n, false);
        for (const auto& [p, q] : *b.pairing) {
            if (p >= n || q >= n) fail(ErrorCode::kOutOfRange, fmt::format("pair ({}, {}) out of range", p, q));
            if (p == q || used[p] || used[q]) {
                fail(ErrorCode::kValidation, fmt::format("row reused in pairing at ({}, {})", p, q));
            }
            used[p] = used[q] = true;
        }
    }
}

std::string layer_file_name(std::size_t layer) { return fmt::format("layer_{:02d}.f32", layer); }

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void to_little_endian(std::vector<char>& bytes) {
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i + 4 <= bytes.size(); i += 4) std::reverse(bytes.begin() + i, bytes.begin() + i + 4);
    }
}

std::vector<char> layer_bytes(const LayerMatrix& m) {
    std::vector<char> bytes(sizeof(float) * static_cast<std::size_t>(m.size()));
    std::memcpy(bytes.data(), m.data(), bytes.size());
    to_little_endian(bytes);
    return bytes;
}

json manifest_json(const ActivationBundle& b) {
    json j;
    j["format_version"] = std::string(kBundleFormatVersion);
    j["model_id"] = b.model_id;
    j["num_layers"] = b.num_layers;
    j["hidden_dim"] = b.hidden_dim;
    j["num_rows"] = b.num_rows();
    j["labels"] = json::array();
    for (auto label : b.labels) j["labels"].push_back(static_cast<int>(label));
    if (b.pairing) {
        j["pairing"] = json::array();
        for (const auto& [p, q] : *b.pairing) j["pairing"].push_back({p, q});
    } else {
        j["pairing"] = nullptr;
    }
    j["token_policy"] = b.token_policy;
    j["positive_means"] = b.positive_means;
    j["dtype"] = std::string(kBundleDtype);
    j["layer_files"] = json::array();
    for (std::size_t l = 0; l < b.num_layers; ++l) j["layer_files"].push_back(layer_file_name(l));
    j["provenance"] = json::object();
    for (const auto& [k, v] : b.provenance) j["provenance"][k] = v;
    return j;
}

void write_file(const fs::path& path, const char* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
    out.write(data, static_cast<std::streamsize>(size));
    out.flush();
    if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

template <typename T>
T require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(ErrorCode::kBadFormat, fmt::format("manifest missing key '{}'", key));
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::kBadFormat, fmt::format("manifest key '{}' has wrong type", key));
    }
}

}  // namespace

void write_bundle(const ActivationBundle& bundle, const fs::path& dir) {
    validate_bundle(bundle);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) fail(ErrorCode::kIo, "cannot create directory " + dir.string());

    for (std::size_t l = 0; l < bundle.num_layers; ++l) {
        auto bytes = layer_bytes(bundle.layers[l]);
        write_file(dir / layer_file_name(l), bytes.data(), bytes.size());
    }
    const std::string text = manifest_json(bundle).dump(2) + "\n";
    write_file(dir / "manifest.json", text.data(), text.size());
}

ActivationBundle read_bundle(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::is_regular_file(manifest_path)) fail(ErrorCode::kMissingFile, manifest_path.string() + " not found");

    json j;
    {
        std::ifstream in(manifest_path, std::ios::binary);
        if (!in) fail(ErrorCode::kIo, "cannot open " + manifest_path.string());
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            fail(ErrorCode::kBadFormat, std::string("manifest is not valid JSON: ") + e.what());
        }
    }
    if (!j.is_object()) fail(ErrorCode::kBadFormat, "manifest must be a JSON object");

    const auto version = require<std::string>(j, "format_version");
    if (version != kBundleFormatVersion) fail(ErrorCode::kBadFormat, "unsupported format_version " + version);
    const auto dtype = require<std::string>(j, "dtype");
    if (dtype != kBundleDtype) fail(ErrorCode::kBadFormat, "unsupported dtype " + dtype);

    ActivationBundle b;
    b.model_id = require<std::string>(j, "model_id");
    b.num_layers = require<std::size_t>(j, "num_layers");
    b.hidden_dim = require<std::size_t>(j, "hidden_dim");
    const auto num_rows = require<std::size_t>(j, "num_rows");
    b.token_policy = require<std::string>(j, "token_policy");
    if (auto it = j.find("positive_means"); it != j.end() && it->is_string()) b.positive_means = it->get<std::string>();
    if (auto it = j.find("provenance"); it != j.end() && it->is_object()) {
        for (const auto& [k, v] : it->items()) {
            if (v.is_string()) b.provenance[k] = v.get<std::string>();
        }
    }

    const auto labels = require<std::vector<int>>(j, "labels");
    if (labels.size() != num_rows) {
        fail(ErrorCode::kShapeMismatch, fmt::format("{} labels for {} rows", labels.size(), num_rows));
    }
    for (int label : labels) {
        if (label != 0 && label != 1) fail(ErrorCode::kValidation, "labels must be 0 or 1");
        b.labels.push_back(static_cast<std::uint8_t>(label));
    }

    if (auto it = j.find("pairing"); it != j.end() && !it->is_null()) {
        std::vector<RowPair> pairs;
        try {
            for (const auto& p : *it) {
                if (!p.is_array() || p.size() != 2) fail(ErrorCode::kBadFormat, "pairing entries must be [i, j]");
                pairs.emplace_back(p[0].get<std::size_t>(), p[1].get<std::size_t>());
            }
        } catch (const json::exception&) {
            fail(ErrorCode::kBadFormat, "pairing must be a list of index pairs");
        }
        b.pairing = std::move(pairs);
    }

    const auto files = require<std::vector<std::string>>(j, "layer_files");
    if (files.size() != b.num_layers) {
        fail(ErrorCode::kShapeMismatch, fmt::format("{} layer files for {} layers", files.size(), b.num_layers));
    }
    const std::size_t expected = num_rows * b.hidden_dim * sizeof(float);
    for (const auto& name : files) {
        if (name.empty() || fs::path(name).has_parent_path() || name == "." || name == "..") {
            fail(ErrorCode::kBadFormat, "layer file name must be a plain file name: " + name);
        }
        const fs::path path = dir / name;
        if (!fs::is_regular_file(path)) fail(ErrorCode::kMissingFile, path.string() + " not found");
        const auto size = fs::file_size(path);
        if (size != expected) {
            fail(ErrorCode::kShapeMismatch,
                 fmt::format("{} holds {} bytes, expected {} ({}x{} f32)", name, size, expected, num_rows, b.hidden_dim));
        }
        std::vector<char> bytes(expected);
        std::ifstream in(path, std::ios::binary);
        if (!in.read(bytes.data(), static_cast<std::streamsize>(expected))) fail(ErrorCode::kIo, "read failed: " + path.string());
        to_little_endian(bytes);  // involution: LE on disk -> native
        LayerMatrix m(static_cast<Eigen::Index>(num_rows), static_cast<Eigen::Index>(b.hidden_dim));
        std::memcpy(m.data(), bytes.data(), expected);
        if (!m.allFinite()) fail(ErrorCode::kNonFinite, name + " contains non-finite values");
        b.layers.push_back(std::move(m));
    }

    validate_bundle(b);
    return b;
}

std::string bundle_digest(const ActivationBundle& bundle) {
    Sha256 h;
    h.update(manifest_json(bundle).dump());
    for (const auto& m : bundle.layers) {
        auto bytes = layer_bytes(m);
        h.update(std::as_bytes(std::span(bytes.data(), bytes.size())));
    }
    return h.hex();
}

ContrastSet make_contrast_set(const ActivationBundle& bundle, std::size_t layer, ContrastKind kind) {
    if (layer >= bundle.num_layers) {
        fail(ErrorCode::kOutOfRange, fmt::format("layer {} out of range [0, {})", layer, bundle.num_layers));
    }
    const auto& m = bundle.layers[layer];
    std::vector<std::size_t> pos_rows;
    std::vector<std::size_t> neg_rows;

    if (kind == ContrastKind::kRefusal) {
        if (!bundle.pairing) fail(ErrorCode::kMissingPairing, "refusal contrast needs twin pairing");
        for (const auto& [p, q] : *bundle.pairing) {
            if (p >= bundle.num_rows() || q >= bundle.num_rows()) {
                fail(ErrorCode::kOutOfRange, fmt::format("pair ({}, {}) out of range", p, q));
            }
            if (bundle.labels[p] != 1 || bundle.labels[q] != 0) {
                fail(ErrorCode::kValidation, fmt::format("pair ({}, {}) must join a positive row to a negative row", p, q));
            }
            pos_rows.push_back(p);
            neg_rows.push_back(q);
        }
        if (pos_rows.empty()) fail(ErrorCode::kMissingPairing, "pairing is empty");
    } else {
        for (std::size_t i = 0; i < bundle.num_rows(); ++i) (bundle.labels[i] == 1 ? pos_rows : neg_rows).push_back(i);
        const auto count = std::min(pos_rows.size(), neg_rows.size());
        if (count == 0) fail(ErrorCode::kSingleClass, "harm contrast needs both classes");
        pos_rows.resize(count);
        neg_rows.resize(count);
    }

    ContrastSet cs;
    cs.kind = kind;
    cs.positive.resize(static_cast<Eigen::Index>(pos_rows.size()), m.cols());
    cs.negative.resize(static_cast<Eigen::Index>(neg_rows.size()), m.cols());
    for (std::size_t i = 0; i < pos_rows.size(); ++i) {
        cs.positive.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(pos_rows[i])).cast<double>();
        cs.negative.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(neg_rows[i])).cast<double>();
    }
    return cs;
}

Matrix layer_as_double(const ActivationBundle& bundle, std::size_t layer) {
    if (layer >= bundle.num_layers) {
        fail(ErrorCode::kOutOfRange, fmt::format("layer {} out of range [0, {})", layer, bundle.num_layers));
    }
    return bundle.layers[layer].cast<double>();
}

double mean_row_norm(const ActivationBundle& bundle, std::size_t layer) {
    const Matrix m = layer_as_double(bundle, layer);
    return m.rowwise().norm().mean();
}

}  // namespace dirsteer
