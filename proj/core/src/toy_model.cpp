#include "dirsteer/toy_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dirsteer/digest.hpp"
#include "dirsteer/error.hpp"

namespace dirsteer {

namespace {

std::mt19937_64 seeded_rng(std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
    std::normal_distribution<double> n01;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * n01(rng);
    return m;
}

void check_spec(const ToyModelSpec& s) {
    if (s.num_layers == 0 || s.hidden_dim == 0 || s.num_topics == 0 || s.num_intents == 0 || s.support == 0) {
        fail(ErrorCode::kValidation, "toy model sizes must be positive");
    }
    if ((s.num_topics + s.num_intents + 2) * s.support > s.hidden_dim) {
        fail(ErrorCode::kValidation, fmt::format("{} planted vectors with support {} do not fit in d={}",
                                                 s.num_topics + s.num_intents + 2, s.support, s.hidden_dim));
    }
    for (auto l : {s.detect_layer, s.exec_layer, s.sustain_layer, s.readout_layer}) {
        if (l >= s.num_layers) fail(ErrorCode::kOutOfRange, fmt::format("layer {} >= num_layers {}", l, s.num_layers));
    }
    if (s.detect_layer == s.exec_layer || s.detect_layer == s.sustain_layer || s.exec_layer == s.sustain_layer) {
        fail(ErrorCode::kValidation, "detect, exec and sustain layers must differ");
    }
}

Vector sigmoid(const Vector& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

Vector gate(const ToyModel& m, const Matrix& h) {
    const auto& s = m.spec;
    const Vector harm = h * m.u_harm;
    const Vector intent = (h * m.intents.transpose()).cwiseAbs().rowwise().maxCoeff();
    const Vector a = sigmoid((s.harm_sharpness * (harm.array() - s.harm_center)).matrix());
    const Vector b = sigmoid((s.intent_sharpness * (intent.array() - s.intent_center)).matrix());
    return a.cwiseProduct(b);
}

void apply_layer(const ToyModel& m, std::size_t l, Matrix& h) {
    const auto& s = m.spec;
    if (l == s.detect_layer) {
        const Matrix z = (s.detect_sharpness * ((h * m.topics.transpose()).array() - s.detect_center)).matrix();
        const Vector fire = (1.0 + (-z.array()).exp()).inverse().rowwise().maxCoeff();
        h += s.detect_gain * fire * m.u_harm.transpose();
    } else if (l == s.exec_layer) {
        h += s.exec_gain * gate(m, h) * m.v_ref.transpose();
    } else if (l == s.sustain_layer) {
        h += s.sustain_gain * gate(m, h) * m.v_ref.transpose();
    } else {
        const Matrix t = (h * m.u[l].transpose()).array().tanh().matrix();
        h += s.background * t * m.w[l].transpose();
    }
}

Vector score(const ToyModel& m, const Matrix& h) { return (h * m.readout).array() - m.spec.threshold; }

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

LayerMatrix to_float(const Matrix& m) { return m.cast<float>(); }

}  // namespace

ToyModel build_toy_model(const ToyModelSpec& spec) {
    check_spec(spec);
    const auto d = static_cast<Eigen::Index>(spec.hidden_dim);
    const std::size_t n_vec = spec.num_topics + spec.num_intents + 2;
    auto rng = seeded_rng(spec.seed, 0x70796d6f64656cULL);

    std::vector<std::size_t> perm(spec.hidden_dim);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    // Disjoint random supports, Gaussian entries, then Gram-Schmidt.
    std::normal_distribution<double> n01;
    Matrix basis = Matrix::Zero(d, static_cast<Eigen::Index>(n_vec));
    for (std::size_t j = 0; j < n_vec; ++j) {
        for (std::size_t k = 0; k < spec.support; ++k) {
            basis(static_cast<Eigen::Index>(perm[j * spec.support + k]), static_cast<Eigen::Index>(j)) = n01(rng);
        }
    }
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        for (Eigen::Index i = 0; i < j; ++i) basis.col(j) -= basis.col(i).dot(basis.col(j)) * basis.col(i);
        basis.col(j).normalize();
    }

    ToyModel m;
    m.spec = spec;
    const auto kt = static_cast<Eigen::Index>(spec.num_topics);
    const auto ki = static_cast<Eigen::Index>(spec.num_intents);
    m.topics = basis.leftCols(kt).transpose();
    m.intents = basis.middleCols(kt, ki).transpose();
    m.u_harm = basis.col(kt + ki);
    m.v_ref = basis.col(kt + ki + 1);
    m.readout = m.v_ref;
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.hidden_dim));
    for (std::size_t l = 0; l < spec.num_layers; ++l) {
        m.w.push_back(gaussian(rng, d, d, scale));
        m.u.push_back(gaussian(rng, d, d, scale));
    }
    return m;
}

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

SyntheticInput make_input(const ToyModel& model, std::uint64_t stream, std::size_t index, InputKind kind) {
    const auto& s = model.spec;
    auto rng = seeded_rng(stream, index);
    SyntheticInput in;
    in.kind = kind;
    in.base = gaussian(rng, static_cast<Eigen::Index>(s.hidden_dim), 1, s.noise);
    in.topic = std::uniform_int_distribution<std::size_t>(0, s.num_topics - 1)(rng);
    in.intent = std::uniform_int_distribution<std::size_t>(0, s.num_intents - 1)(rng);
    in.sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;

    in.embedding = in.base;
    if (kind != InputKind::kNeutral) in.embedding += model.topics.row(static_cast<Eigen::Index>(in.topic)).transpose();
    if (kind == InputKind::kHarmful) {
        in.embedding += s.intent_scale * in.sign * model.intents.row(static_cast<Eigen::Index>(in.intent)).transpose();
    }
    return in;
}

Matrix make_inputs(const ToyModel& model, std::uint64_t stream, std::size_t count, InputKind kind) {
    Matrix x(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(model.spec.hidden_dim));
    for (std::size_t i = 0; i < count; ++i) {
        x.row(static_cast<Eigen::Index>(i)) = make_input(model, stream, i, kind).embedding.transpose();
    }
    return x;
}

ForwardResult forward(const ToyModel& model, const Matrix& x, const std::optional<Hook>& hook) {
    const auto& s = model.spec;
    if (x.cols() != static_cast<Eigen::Index>(s.hidden_dim)) {
        fail(ErrorCode::kShapeMismatch, fmt::format("inputs have {} columns, model d={}", x.cols(), s.hidden_dim));
    }
    if (hook && hook->layer >= s.num_layers) {
        fail(ErrorCode::kOutOfRange, fmt::format("hook layer {} >= num_layers {}", hook->layer, s.num_layers));
    }
    ForwardResult out;
    Matrix h = x;
    for (std::size_t l = 0; l < s.num_layers; ++l) {
        apply_layer(model, l, h);
        if (hook && hook->layer == l && hook->fn) hook->fn(h);
        if (l == s.readout_layer) out.scores = score(model, h);
        out.hiddens.push_back(h);
    }
    return out;
}

SingleForward forward(const ToyModel& model, const SyntheticInput& x, const std::optional<Hook>& hook) {
    const ForwardResult r = forward(model, Matrix(x.embedding.transpose()), hook);
    SingleForward out;
    out.score = r.scores[0];
    out.hiddens.resize(static_cast<Eigen::Index>(model.spec.num_layers), static_cast<Eigen::Index>(model.spec.hidden_dim));
    for (std::size_t l = 0; l < r.hiddens.size(); ++l) out.hiddens.row(static_cast<Eigen::Index>(l)) = r.hiddens[l].row(0);
    return out;
}

Trace trace(const ToyModel& model, const Matrix& x) {
    ForwardResult r = forward(model, x);
    return Trace{std::move(r.scores), std::move(r.hiddens)};
}

Vector resume_scores(const ToyModel& model, const Trace& tr, std::size_t layer, const RowHook& fn) {
    const auto& s = model.spec;
    if (layer >= s.num_layers) fail(ErrorCode::kOutOfRange, fmt::format("hook layer {} >= num_layers {}", layer, s.num_layers));
    // Nothing after the readout can change the score.
    if (layer > s.readout_layer) return tr.scores;
    Matrix h = tr.hiddens[layer];
    if (fn) fn(h);
    for (std::size_t l = layer + 1; l <= s.readout_layer; ++l) apply_layer(model, l, h);
    return score(model, h);
}

ActivationBundle generate_synthetic_bundle(const ToyModel& model, std::size_t n_pairs, ContrastKind kind,
                                           std::uint64_t seed) {
    if (n_pairs < 2) fail(ErrorCode::kInsufficientData, fmt::format("need >= 2 pairs, got {}", n_pairs));
    const auto& s = model.spec;
    const auto n = static_cast<Eigen::Index>(n_pairs);

    Matrix x(2 * n, static_cast<Eigen::Index>(s.hidden_dim));
    ActivationBundle b;
    b.labels.assign(2 * n_pairs, 0);
    std::fill_n(b.labels.begin(), n_pairs, std::uint8_t{1});
    if (kind == ContrastKind::kRefusal) {
        const auto stream = derive_stream(seed, 1);
        x << make_inputs(model, stream, n_pairs, InputKind::kBenignTwin),
            make_inputs(model, stream, n_pairs, InputKind::kHarmful);
        b.positive_means = "benign";
        std::vector<RowPair> pairs;
        for (std::size_t i = 0; i < n_pairs; ++i) pairs.emplace_back(i, n_pairs + i);
        b.pairing = std::move(pairs);
    } else {
        x << make_inputs(model, derive_stream(seed, 2), n_pairs, InputKind::kHarmful),
            make_inputs(model, derive_stream(seed, 3), n_pairs, InputKind::kNeutral);
        b.positive_means = "harmful";
    }

    const ForwardResult r = forward(model, x);
    b.model_id = fmt::format("toy-L{}-d{}-seed{}", s.num_layers, s.hidden_dim, s.seed);
    b.num_layers = s.num_layers;
    b.hidden_dim = s.hidden_dim;
    b.token_policy = "single-vector";
    for (const auto& h : r.hiddens) b.layers.push_back(to_float(h));
    b.provenance = {{"generator", "toy"},
                    {"kind", std::string(to_string(kind))},
                    {"model_seed", std::to_string(s.seed)},
                    {"n_pairs", std::to_string(n_pairs)},
                    {"seed", std::to_string(seed)},
                    {"tool_version", std::string(tool_version())}};
    validate_bundle(b);
    return b;
}

DirectionVector truth_direction(const ToyModel& model, ContrastKind kind) {
    DirectionVector d;
    d.kind = kind;
    d.values = kind == ContrastKind::kRefusal ? model.v_ref : model.u_harm;
    d.layer = kind == ContrastKind::kRefusal ? model.spec.exec_layer : model.spec.detect_layer;
    d.mask.assign(model.spec.hidden_dim, 1);
    d.retain = 1.0;
    d.retained_count = model.spec.hidden_dim;
    d.provenance = fmt::format("toy-truth;model_seed={}", model.spec.seed);
    return d;
}

PlantedBundle make_planted_bundle(const PlantedSpec& spec) {
    if (spec.num_layers == 0 || spec.hidden_dim == 0) fail(ErrorCode::kValidation, "planted bundle sizes must be positive");
    if (spec.n_per_class < 1) fail(ErrorCode::kInsufficientData, "need at least one row per class");
    const auto d = static_cast<Eigen::Index>(spec.hidden_dim);
    const auto n = static_cast<Eigen::Index>(spec.n_per_class);
    auto rng = seeded_rng(spec.seed, 0x706c616e746564ULL);

    Vector w;
    if (spec.direction) {
        w = *spec.direction;
        if (w.size() != d) fail(ErrorCode::kShapeMismatch, "planted direction has the wrong dimension");
        if (!w.allFinite() || w.norm() <= 1e-12) fail(ErrorCode::kInvalidDirection, "planted direction is zero");
        w.normalize();
    } else {
        w = gaussian(rng, d, 1, 1.0);
        w.normalize();
    }

    PlantedBundle out;
    auto& b = out.bundle;
    b.model_id = "planted";
    b.num_layers = spec.num_layers;
    b.hidden_dim = spec.hidden_dim;
    b.token_policy = "single-vector";
    b.positive_means = "positive";
    b.labels.assign(2 * spec.n_per_class, 0);
    std::fill_n(b.labels.begin(), spec.n_per_class, std::uint8_t{1});
    std::vector<RowPair> pairs;
    for (std::size_t i = 0; i < spec.n_per_class; ++i) pairs.emplace_back(i, spec.n_per_class + i);
    b.pairing = std::move(pairs);
    b.provenance = {{"generator", "planted"}, {"seed", std::to_string(spec.seed)}, {"snr", fmt::format("{}", spec.snr)}};

    for (std::size_t l = 0; l < spec.num_layers; ++l) {
        Matrix h = gaussian(rng, 2 * n, d, 1.0);
        if (std::find(spec.signal_layers.begin(), spec.signal_layers.end(), l) != spec.signal_layers.end()) {
            h.topRows(n).rowwise() += (0.5 * spec.snr * w).transpose();
            h.bottomRows(n).rowwise() -= (0.5 * spec.snr * w).transpose();
        }
        b.layers.push_back(to_float(h));
    }
    validate_bundle(b);
    out.direction = w;
    return out;
}

}  // namespace dirsteer
