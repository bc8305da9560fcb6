#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "dirsteer/calibration.hpp"
#include "dirsteer/digest.hpp"
#include "dirsteer/error.hpp"
#include "dirsteer/layer_selection.hpp"

namespace dirsteer::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Provenance = std::vector<std::pair<std::string, std::string>>;

std::uint64_t parse_seed(std::string_view text, const char* source) {
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        fail(ErrorCode::kUsage, fmt::format("{} '{}' is not an unsigned integer", source, text));
    }
    return value;
}

std::uint64_t env_seed() {
    const char* env = std::getenv("DIRSTEER_SEED");
    return env ? parse_seed(env, "DIRSTEER_SEED") : 0;
}

void require_input(const fs::path& p) {
    if (!fs::exists(p)) fail(ErrorCode::kMissingFile, fmt::format("input {} does not exist", p.string()));
}

// Checked up front so a long run never fails at the last step.
void require_output(const fs::path& p) {
    const fs::path parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
    if (!fs::is_directory(parent)) fail(ErrorCode::kIo, fmt::format("output directory {} does not exist", parent.string()));
}

// For directory outputs: "out/" and "out" both need only the parent to exist.
void require_output_dir(fs::path p) {
    if (!p.has_filename()) p = p.parent_path();
    require_output(p);
}

std::string input_hash(const fs::path& p) { return fmt::format("{}=sha256:{}", p.generic_string(), sha256_path(p)); }

std::string csv_provenance(const Provenance& prov) {
    std::string line = "#";
    for (const auto& [k, v] : prov) line += fmt::format(" {}={}", k, v);
    return line + "\n";
}

json json_provenance(const Provenance& prov) {
    json j = json::object();
    for (const auto& [k, v] : prov) j[k] = v;
    return j;
}

Provenance base_provenance(std::uint64_t seed) {
    return {{"tool", "dirsteer"}, {"version", std::string(tool_version())}, {"seed", std::to_string(seed)}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, fmt::format("cannot open {} for writing", path.string()));
    out << text;
    if (!out) fail(ErrorCode::kIo, fmt::format("write to {} failed", path.string()));
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
    } else {
        write_text(out_path, text);
    }
}

std::string num(double x) { return fmt::format("{}", x); }

std::string sweep_csv(const SweepResult& r, const Provenance& prov) {
    std::string text = csv_provenance(prov);
    for (const auto& a : r.axes) text += a.name + ",";
    text += "rate\n";
    std::vector<std::size_t> idx(r.axes.size(), 0);
    for (double rate : r.rates) {
        for (std::size_t a = 0; a < idx.size(); ++a) text += num(r.axes[a].values[idx[a]]) + ",";
        text += num(rate) + "\n";
        for (std::size_t a = idx.size(); a-- > 0;) {
            if (++idx[a] < r.axes[a].values.size()) break;
            idx[a] = 0;
        }
    }
    text += "best,";
    for (double c : r.best_coords()) text += num(c) + ",";
    return text + num(r.best_rate) + "\n";
}

std::string sweep_json(const SweepResult& r, const Provenance& prov) {
    json j;
    j["provenance"] = json_provenance(prov);
    j["axes"] = json::array();
    for (const auto& a : r.axes) j["axes"].push_back({{"name", a.name}, {"values", a.values}});
    j["cells"] = json::array();
    std::vector<std::size_t> idx(r.axes.size(), 0);
    for (double rate : r.rates) {
        json cell;
        for (std::size_t a = 0; a < idx.size(); ++a) cell[r.axes[a].name] = r.axes[a].values[idx[a]];
        cell["rate"] = rate;
        j["cells"].push_back(cell);
        for (std::size_t a = idx.size(); a-- > 0;) {
            if (++idx[a] < r.axes[a].values.size()) break;
            idx[a] = 0;
        }
    }
    json best;
    const auto coords = r.best_coords();
    for (std::size_t a = 0; a < coords.size(); ++a) best[r.axes[a].name] = coords[a];
    best["rate"] = r.best_rate;
    j["best"] = best;
    return j.dump(2) + "\n";
}

std::string render_sweep(const SweepResult& r, const Provenance& prov, const std::string& format) {
    return format == "json" ? sweep_json(r, prov) : sweep_csv(r, prov);
}

std::uint64_t bundle_model_seed(const ActivationBundle& b, const std::optional<std::uint64_t>& override_seed) {
    if (override_seed) return *override_seed;
    const auto it = b.provenance.find("model_seed");
    if (it == b.provenance.end()) {
        fail(ErrorCode::kValidation, "bundle does not record a toy model seed; pass --model-seed");
    }
    return parse_seed(it->second, "bundle model_seed");
}

ToyModel toy(std::uint64_t model_seed) {
    ToyModelSpec spec;
    spec.seed = model_seed;
    return build_toy_model(spec);
}

struct Common {
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
    std::string out;

    std::uint64_t resolved_seed() const { return seed ? *seed : env_seed(); }
};

void add_seed(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Seed (default: $DIRSTEER_SEED or 0)");
}

void add_format(CLI::App* cmd, Common& c) {
    cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

// ---- synth

struct SynthArgs {
    Common c;
    std::optional<std::uint64_t> model_seed;
    std::size_t pairs = 100;
    std::string kind;
    std::string dump_truth;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const auto seed = a.c.resolved_seed();
    const auto kind = parse_contrast_kind(a.kind);
    require_output_dir(a.c.out);
    if (!a.dump_truth.empty()) require_output(a.dump_truth);

    const ToyModel model = toy(a.model_seed.value_or(seed));
    const auto bundle = generate_synthetic_bundle(model, a.pairs, kind, seed);
    write_bundle(bundle, a.c.out);
    if (!a.dump_truth.empty()) write_direction(truth_direction(model, kind), a.dump_truth);
    out << fmt::format("wrote {} ({} rows, {} layers, d={})\n", a.c.out, bundle.num_rows(), bundle.num_layers,
                       bundle.hidden_dim);
    return 0;
}

// ---- extract

struct ExtractArgs {
    Common c;
    std::string bundle;
    std::size_t layer = 0;
    std::string kind;
    double retain = 0.5;
};

int cmd_extract(const ExtractArgs& a, std::ostream& out) {
    const auto seed = a.c.resolved_seed();
    require_input(a.bundle);
    require_output(a.c.out);
    const auto bundle = read_bundle(a.bundle);
    auto ex = extract_direction(bundle, a.layer, parse_contrast_kind(a.kind), a.retain);
    ex.direction.provenance += fmt::format(";seed={};version={};input={}", seed, tool_version(), input_hash(a.bundle));
    write_direction(ex.direction, a.c.out);
    out << fmt::format("layer={} kind={} retained={} train_accuracy={} cv_accuracy={}\n", a.layer, a.kind,
                       ex.direction.retained_count, ex.probe.train_accuracy, ex.probe.cv_accuracy);
    return 0;
}

// ---- select-layer

struct SelectArgs {
    Common c;
    std::string bundle;
    std::string kind = "refusal";
    std::vector<std::size_t> layers;
};

int cmd_select(const SelectArgs& a, std::ostream& out) {
    const auto seed = a.c.resolved_seed();
    require_input(a.bundle);
    if (!a.c.out.empty()) require_output(a.c.out);
    const auto bundle = read_bundle(a.bundle);
    std::optional<std::vector<std::size_t>> layers;
    if (!a.layers.empty()) layers = a.layers;
    const auto scores = score_layers(bundle, parse_contrast_kind(a.kind), layers);
    const auto selected = select_layer(scores);

    Provenance prov = base_provenance(seed);
    prov.emplace_back("kind", a.kind);
    prov.emplace_back("inputs", input_hash(a.bundle));
    std::string text;
    if (a.c.format == "json") {
        json j;
        j["provenance"] = json_provenance(prov);
        j["scores"] = json::array();
        for (const auto& s : scores) j["scores"].push_back({{"layer", s.layer}, {"accuracy", s.accuracy}});
        j["selected"] = selected;
        text = j.dump(2) + "\n";
    } else {
        text = csv_provenance(prov) + "layer,accuracy\n";
        for (const auto& s : scores) text += fmt::format("{},{}\n", s.layer, num(s.accuracy));
        text += fmt::format("selected,{}\n", selected);
    }
    emit(text, a.c.out, out);
    return 0;
}

// ---- grid-search

struct GridArgs {
    Common c;
    std::optional<std::uint64_t> model_seed;
    std::string bundle;
    std::string refusal;
    std::string harm;
    std::optional<std::size_t> layer;
    std::vector<double> alphas = default_alpha_grid();
    std::vector<double> bhats = default_bhat_grid();
    std::size_t n_eval = kDefaultEvalSize;
    std::string config_out;
};

int cmd_grid(const GridArgs& a, std::ostream& out) {
    const auto seed = a.c.resolved_seed();
    for (const auto& p : {a.bundle, a.refusal, a.harm}) require_input(p);
    if (!a.c.out.empty()) require_output(a.c.out);
    if (!a.config_out.empty()) require_output(a.config_out);

    const auto bundle = read_bundle(a.bundle);
    const auto refusal = read_direction(a.refusal);
    const auto harm = read_direction(a.harm);
    const std::size_t layer = a.layer.value_or(refusal.layer);
    const auto model_seed = bundle_model_seed(bundle, a.model_seed);
    const ToyModel model = toy(model_seed);
    const Evaluator eval(model, a.n_eval, seed);
    const auto grid = grid_search(eval, refusal, harm, layer, a.alphas, beta_grid(bundle, layer, a.bhats));

    Provenance prov = base_provenance(seed);
    prov.emplace_back("model_seed", std::to_string(model_seed));
    prov.emplace_back("layer", std::to_string(layer));
    prov.emplace_back("n_eval", std::to_string(a.n_eval));
    prov.emplace_back("inputs", fmt::format("{},{},{}", input_hash(a.bundle), input_hash(a.refusal), input_hash(a.harm)));
    emit(render_sweep(grid, prov, a.c.format), a.c.out, out);

    if (!a.config_out.empty()) {
        const auto cfg = best_config(grid, refusal, harm, layer);
        const fs::path base = fs::absolute(a.config_out).parent_path();
        write_intervention_config(cfg, a.config_out, fs::proximate(fs::absolute(a.refusal), base),
                                  fs::proximate(fs::absolute(a.harm), base));
        // Carry the model seed along so `intervene` can rebuild the model.
        std::ifstream in(a.config_out);
        json j = json::parse(in);
        in.close();
        j["model_seed"] = model_seed;
        write_text(a.config_out, j.dump(2) + "\n");
    }
    return 0;
}

// ---- intervene

struct IntervArgs {
    Common c;
    std::optional<std::uint64_t> model_seed;
    std::string config;
    std::string order;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::size_t n_eval = kDefaultEvalSize;
    std::string bundle;
    std::string out_bundle;
};

int cmd_intervene(const IntervArgs& a, std::ostream& out) {
    const auto seed = a.c.resolved_seed();
    require_input(a.config);
    if (!a.c.out.empty()) require_output(a.c.out);
    if (!a.bundle.empty()) require_input(a.bundle);
    if (!a.out_bundle.empty()) require_output_dir(a.out_bundle);
    if (a.bundle.empty() != a.out_bundle.empty()) fail(ErrorCode::kUsage, "--bundle and --out-bundle go together");

    InterventionConfig cfg = read_intervention_config(a.config);
    if (!a.order.empty()) cfg.order = parse_order(a.order);
    if (a.alpha) cfg.alpha = *a.alpha;
    if (a.beta) cfg.beta = *a.beta;
    validate_config(cfg);

    Provenance prov = base_provenance(seed);
    if (!a.bundle.empty()) {
        auto bundle = read_bundle(a.bundle);
        if (cfg.layer >= bundle.num_layers) fail(ErrorCode::kOutOfRange, "config layer outside the bundle");
        Matrix h = layer_as_double(bundle, cfg.layer);
        dbdi_transform_rows(h, cfg);
        bundle.layers[cfg.layer] = h.cast<float>();
        bundle.provenance["intervention"] = fmt::format("layer={};order={};alpha={};beta={}", cfg.layer,
                                                        to_string(cfg.order), cfg.alpha, cfg.beta);
        bundle.provenance["source"] = input_hash(a.bundle);
        write_bundle(bundle, a.out_bundle);
    }

    std::optional<std::uint64_t> model_seed = a.model_seed;
    if (!model_seed) {
        std::ifstream in(a.config);
        const json j = json::parse(in, nullptr, false);
        if (j.is_object() && j.contains("model_seed") && j["model_seed"].is_number_unsigned()) {
            model_seed = j["model_seed"].get<std::uint64_t>();
        }
    }
    if (!model_seed) {
        if (!a.bundle.empty()) return 0;
        fail(ErrorCode::kValidation, "config does not record a toy model seed; pass --model-seed");
    }

    const ToyModel model = toy(*model_seed);
    const Evaluator eval(model, a.n_eval, seed);
    const double rate = eval.rate(cfg);
    prov.emplace_back("model_seed", std::to_string(*model_seed));
    prov.emplace_back("n_eval", std::to_string(a.n_eval));
    prov.emplace_back("inputs", input_hash(a.config));

    std::string text;
    if (a.c.format == "json") {
        json j;
        j["provenance"] = json_provenance(prov);
        j["layer"] = cfg.layer;
        j["order"] = std::string(to_string(cfg.order));
        j["alpha"] = cfg.alpha;
        j["beta"] = cfg.beta;
        j["baseline_rate"] = eval.baseline();
        j["rate"] = rate;
        text = j.dump(2) + "\n";
    } else {
        text = csv_provenance(prov) + "layer,order,alpha,beta,baseline_rate,rate\n" +
               fmt::format("{},{},{},{},{},{}\n", cfg.layer, to_string(cfg.order), num(cfg.alpha), num(cfg.beta),
                           num(eval.baseline()), num(rate));
    }
    emit(text, a.c.out, out);
    return 0;
}

// ---- ablate

struct AblateArgs {
    Common c;
    std::string which;
    std::size_t pairs = 100;
    std::size_t n_eval = kDefaultEvalSize;
    double retain = 0.5;
    std::optional<std::size_t> layer;
    std::vector<double> alphas = default_alpha_grid();
    std::vector<double> bhats = default_bhat_grid();
    std::vector<std::size_t> layers;
    std::vector<double> rhos{0.01, 0.1, 0.25, 0.5, 0.75, 1.0};
    std::vector<std::size_t> sizes{10, 30, 50, 100};
};

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
    const auto seed = a.c.resolved_seed();
    if (!a.c.out.empty()) require_output(a.c.out);

    const ToyModel model = toy(seed);
    const auto ref = generate_synthetic_bundle(model, a.pairs, ContrastKind::kRefusal, seed);
    const auto harm = generate_synthetic_bundle(model, a.pairs, ContrastKind::kHarm, seed);
    const Evaluator eval(model, a.n_eval, seed);
    const std::size_t layer = a.layer ? *a.layer : select_layer(score_layers(ref, ContrastKind::kRefusal));
    PipelineOptions opts;
    opts.retain = a.retain;
    opts.alphas = a.alphas;
    opts.bhats = a.bhats;

    Provenance prov = base_provenance(seed);
    prov.emplace_back("ablation", a.which);
    prov.emplace_back("pairs", std::to_string(a.pairs));
    prov.emplace_back("n_eval", std::to_string(a.n_eval));
    prov.emplace_back("layer", std::to_string(layer));

    if (a.which == "order") {
        const auto cal = calibrate_layer(eval, ref, harm, layer, opts);
        const auto r = ablate_order(eval, cal.best);
        const bool std_best = r.standard_rate >= r.reversed_rate;
        std::string text;
        if (a.c.format == "json") {
            json j;
            j["provenance"] = json_provenance(prov);
            j["alpha"] = cal.best.alpha;
            j["beta"] = cal.best.beta;
            j["cells"] = {{{"order", "standard"}, {"rate", r.standard_rate}},
                          {{"order", "reversed"}, {"rate", r.reversed_rate}}};
            j["best"] = {{"order", std_best ? "standard" : "reversed"},
                         {"rate", std_best ? r.standard_rate : r.reversed_rate}};
            text = j.dump(2) + "\n";
        } else {
            text = csv_provenance(prov) + "order,alpha,beta,rate\n";
            text += fmt::format("standard,{},{},{}\n", num(cal.best.alpha), num(cal.best.beta), num(r.standard_rate));
            text += fmt::format("reversed,{},{},{}\n", num(cal.best.alpha), num(cal.best.beta), num(r.reversed_rate));
            text += fmt::format("best,{},{}\n", std_best ? "standard" : "reversed",
                                num(std_best ? r.standard_rate : r.reversed_rate));
        }
        emit(text, a.c.out, out);
        return 0;
    }

    SweepResult r;
    if (a.which == "layers") {
        std::vector<std::size_t> layers = a.layers;
        if (layers.empty()) {
            for (std::size_t l = 0; l < model.spec.num_layers; ++l) layers.push_back(l);
        }
        r = ablate_layers(eval, ref, harm, layers, opts);
    } else if (a.which == "retention") {
        r = ablate_retention(eval, ref, harm, layer, a.rhos, opts);
    } else {
        r = ablate_calibration_size(eval, a.sizes, seed, layer, opts);
    }
    emit(render_sweep(r, prov, a.c.format), a.c.out, out);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Refusal/harm direction extraction and two-step steering on layered activations", "dirsteer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a toy-model activation bundle");
    add_seed(s, synth.c);
    s->add_option("--model-seed", synth.model_seed, "Toy model seed (default: --seed)");
    s->add_option("--pairs", synth.pairs, "Number of pairs")->capture_default_str();
    s->add_option("--kind", synth.kind, "refusal|harm")->required()->check(CLI::IsMember({"refusal", "harm"}));
    s->add_option("--out", synth.c.out, "Bundle directory")->required();
    s->add_option("--dump-truth", synth.dump_truth, "Write the planted direction as JSON");

    ExtractArgs extract;
    auto* e = app.add_subcommand("extract", "Extract a sparsified direction from a bundle");
    add_seed(e, extract.c);
    e->add_option("--bundle", extract.bundle, "Bundle directory")->required();
    e->add_option("--layer", extract.layer, "Layer")->required();
    e->add_option("--kind", extract.kind, "refusal|harm")->required()->check(CLI::IsMember({"refusal", "harm"}));
    e->add_option("--retain", extract.retain, "Fraction of neurons kept, (0, 1]")->capture_default_str();
    e->add_option("--out", extract.c.out, "Direction JSON file")->required();

    SelectArgs select;
    auto* sl = app.add_subcommand("select-layer", "Score every layer and pick the critical one");
    add_seed(sl, select.c);
    add_format(sl, select.c);
    sl->add_option("--bundle", select.bundle, "Bundle directory")->required();
    sl->add_option("--kind", select.kind, "refusal|harm")->check(CLI::IsMember({"refusal", "harm"}))->capture_default_str();
    sl->add_option("--layers", select.layers, "Candidate layers, comma separated")->delimiter(',');
    sl->add_option("--out", select.c.out, "Output file (default stdout)");

    GridArgs grid;
    auto* g = app.add_subcommand("grid-search", "Alpha x beta grid on the toy model");
    add_seed(g, grid.c);
    add_format(g, grid.c);
    g->add_option("--model-seed", grid.model_seed, "Toy model seed (default: recorded in the bundle)");
    g->add_option("--bundle", grid.bundle, "Refusal bundle (sets the beta scale)")->required();
    g->add_option("--refusal", grid.refusal, "Refusal direction JSON")->required();
    g->add_option("--harm", grid.harm, "Harm direction JSON")->required();
    g->add_option("--layer", grid.layer, "Intervention layer (default: the refusal direction's layer)");
    g->add_option("--alphas", grid.alphas, "Alpha values")->delimiter(',');
    g->add_option("--bhats", grid.bhats, "Beta values relative to the mean hidden norm")->delimiter(',');
    g->add_option("--n-eval", grid.n_eval, "Held-out harmful inputs")->capture_default_str();
    g->add_option("--out", grid.c.out, "Heatmap file (default stdout)");
    g->add_option("--config-out", grid.config_out, "Write the best config as JSON");

    IntervArgs interv;
    auto* iv = app.add_subcommand("intervene", "Apply a config to the toy model or a bundle");
    add_seed(iv, interv.c);
    add_format(iv, interv.c);
    iv->add_option("--model-seed", interv.model_seed, "Toy model seed (default: recorded in the config)");
    iv->add_option("--config", interv.config, "Intervention config JSON")->required();
    iv->add_option("--order", interv.order, "standard|reversed")->check(CLI::IsMember({"standard", "reversed"}));
    iv->add_option("--alpha", interv.alpha, "Override alpha");
    iv->add_option("--beta", interv.beta, "Override beta");
    iv->add_option("--n-eval", interv.n_eval, "Held-out harmful inputs")->capture_default_str();
    iv->add_option("--bundle", interv.bundle, "Transform this bundle's layer instead");
    iv->add_option("--out-bundle", interv.out_bundle, "Where to write the transformed bundle");
    iv->add_option("--out", interv.c.out, "Result file (default stdout)");

    AblateArgs ablate;
    auto* ab = app.add_subcommand("ablate", "Ablation sweeps on the toy model");
    add_seed(ab, ablate.c);
    add_format(ab, ablate.c);
    ab->add_option("which", ablate.which, "order|layers|retention|calib-size")
        ->required()
        ->check(CLI::IsMember({"order", "layers", "retention", "calib-size"}));
    ab->add_option("--pairs", ablate.pairs, "Calibration pairs")->capture_default_str();
    ab->add_option("--n-eval", ablate.n_eval, "Held-out harmful inputs")->capture_default_str();
    ab->add_option("--retain", ablate.retain, "Fraction of neurons kept")->capture_default_str();
    ab->add_option("--layer", ablate.layer, "Intervention layer (default: selected)");
    ab->add_option("--alphas", ablate.alphas, "Alpha values")->delimiter(',');
    ab->add_option("--bhats", ablate.bhats, "Beta values relative to the mean hidden norm")->delimiter(',');
    ab->add_option("--layers", ablate.layers, "Layers for the layer sweep")->delimiter(',');
    ab->add_option("--rhos", ablate.rhos, "Retention fractions")->delimiter(',');
    ab->add_option("--sizes", ablate.sizes, "Calibration sizes")->delimiter(',');
    ab->add_option("--out", ablate.c.out, "Output file (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        if (ex.get_exit_code() == 0) return app.exit(ex, out, err);
        err << "dirsteer: " << ex.what() << "\n\n";
        const auto parsed = app.get_subcommands();
        err << (parsed.empty() ? app.help() : parsed.front()->help());
        return 1;
    }

    try {
        if (s->parsed()) return cmd_synth(synth, out);
        if (e->parsed()) return cmd_extract(extract, out);
        if (sl->parsed()) return cmd_select(select, out);
        if (g->parsed()) return cmd_grid(grid, out);
        if (iv->parsed()) return cmd_intervene(interv, out);
        if (ab->parsed()) return cmd_ablate(ablate, out);
    } catch (const Error& ex) {
        err << "dirsteer: " << ex.what() << "\n";
        if (ex.code() == ErrorCode::kUsage) err << app.help();
        return is_io_error(ex.code()) ? 2 : 1;
    } catch (const fs::filesystem_error& ex) {
        err << "dirsteer: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        err << "dirsteer: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace dirsteer::cli
