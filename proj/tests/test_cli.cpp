#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = dirsteer::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    return files;
}

// Run the whole pipeline into `dir` with small grids so it stays quick.
void pipeline(const fs::path& dir, const std::string& seed) {
    const auto p = [&](const char* name) { return (dir / name).string(); };
    ASSERT_EQ(cli({"synth", "--seed", seed, "--pairs", "60", "--kind", "refusal", "--out", p("ref")}).code, 0);
    ASSERT_EQ(cli({"synth", "--seed", seed, "--pairs", "60", "--kind", "harm", "--out", p("harm")}).code, 0);
    ASSERT_EQ(cli({"select-layer", "--bundle", p("ref"), "--kind", "refusal", "--out", p("layers.csv")}).code, 0);
    ASSERT_EQ(cli({"extract", "--seed", seed, "--bundle", p("ref"), "--layer", "5", "--kind", "refusal", "--out",
                   p("v.json")})
                  .code,
              0);
    ASSERT_EQ(
        cli({"extract", "--seed", seed, "--bundle", p("harm"), "--layer", "5", "--kind", "harm", "--out", p("u.json")})
            .code,
        0);
    ASSERT_EQ(cli({"grid-search", "--seed", seed, "--bundle", p("ref"), "--refusal", p("v.json"), "--harm",
                   p("u.json"), "--alphas", "0,0.75,1.5", "--bhats", "0,0.25,0.5", "--n-eval", "50", "--out",
                   p("grid.csv"), "--config-out", p("best.json")})
                  .code,
              0);
    ASSERT_EQ(cli({"intervene", "--seed", seed, "--config", p("best.json"), "--n-eval", "50", "--out",
                   p("standard.csv")})
                  .code,
              0);
    ASSERT_EQ(cli({"intervene", "--seed", seed, "--config", p("best.json"), "--order", "reversed", "--n-eval", "50",
                   "--out", p("reversed.csv")})
                  .code,
              0);
    ASSERT_EQ(cli({"intervene", "--seed", seed, "--config", p("best.json"), "--bundle", p("ref"), "--out-bundle",
                   p("ref_steered"), "--out", p("bundle.csv")})
                  .code,
              0);
    ASSERT_EQ(cli({"ablate", "order", "--seed", seed, "--pairs", "30", "--n-eval", "40", "--alphas", "0,1", "--bhats",
                   "0,0.25", "--out", p("order.csv")})
                  .code,
              0);
    ASSERT_EQ(cli({"ablate", "layers", "--seed", seed, "--pairs", "30", "--n-eval", "40", "--layers", "0,5,7",
                   "--alphas", "0,1", "--bhats", "0,0.25", "--format", "json", "--out", p("layers.json")})
                  .code,
              0);
    ASSERT_EQ(cli({"ablate", "retention", "--seed", seed, "--pairs", "30", "--n-eval", "40", "--layer", "5", "--rhos",
                   "0.1,1", "--alphas", "0,1", "--bhats", "0,0.25", "--out", p("retention.csv")})
                  .code,
              0);
    ASSERT_EQ(cli({"ablate", "calib-size", "--seed", seed, "--n-eval", "40", "--layer", "5", "--sizes", "10,20",
                   "--alphas", "0,1", "--bhats", "0,0.25", "--out", p("size.csv")})
                  .code,
              0);
}

std::string last_line(const std::string& s) {
    std::string t = s;
    while (!t.empty() && t.back() == '\n') t.pop_back();
    return t.substr(t.find_last_of('\n') + 1);
}

}  // namespace

TEST(Cli, PipelineProducesExpectedResults) {
    TempDir tmp("cli");
    pipeline(tmp.path(), "7");
    EXPECT_EQ(last_line(slurp(tmp.path() / "layers.csv")), "selected,5");
    const auto standard = slurp(tmp.path() / "standard.csv");
    EXPECT_NE(standard.find("layer,order,alpha,beta,baseline_rate,rate"), std::string::npos);
    EXPECT_TRUE(fs::exists(tmp.path() / "ref_steered"));
    EXPECT_EQ(slurp(tmp.path() / "v.json").find("\"format_version\""), 4u);
}

TEST(Cli, RerunsAreByteIdentical) {
    TempDir tmp("cli");
    pipeline(tmp.path(), "3");
    const auto first = snapshot(tmp.path());
    fs::remove_all(tmp.path());
    fs::create_directories(tmp.path());
    pipeline(tmp.path(), "3");
    const auto second = snapshot(tmp.path());
    ASSERT_EQ(first.size(), second.size());
    EXPECT_GE(first.size(), 20u);
    for (const auto& [name, content] : first) EXPECT_TRUE(content == second.at(name)) << name;
}

TEST(Cli, SeedFromEnvironment) {
    TempDir tmp("cli");
    ::setenv("DIRSTEER_SEED", "11", 1);
    const int code = cli({"synth", "--pairs", "5", "--kind", "harm", "--out", (tmp.path() / "env").string()}).code;
    ::unsetenv("DIRSTEER_SEED");
    ASSERT_EQ(code, 0);
    ASSERT_EQ(cli({"synth", "--seed", "11", "--pairs", "5", "--kind", "harm", "--out", (tmp.path() / "flag").string()})
                  .code,
              0);
    ASSERT_EQ(cli({"synth", "--seed", "12", "--pairs", "5", "--kind", "harm", "--out", (tmp.path() / "other").string()})
                  .code,
              0);
    EXPECT_EQ(snapshot(tmp.path() / "env"), snapshot(tmp.path() / "flag"));
    EXPECT_NE(snapshot(tmp.path() / "env"), snapshot(tmp.path() / "other"));
}

TEST(Cli, InputsAreNotModified) {
    TempDir tmp("cli");
    const auto ref = (tmp.path() / "ref").string();
    ASSERT_EQ(cli({"synth", "--pairs", "20", "--kind", "refusal", "--out", ref}).code, 0);
    const auto before = snapshot(ref);
    const auto v = (tmp.path() / "v.json").string();
    ASSERT_EQ(cli({"extract", "--bundle", ref, "--layer", "5", "--kind", "refusal", "--out", v}).code, 0);
    ASSERT_EQ(cli({"select-layer", "--bundle", ref}).code, 0);
    EXPECT_EQ(snapshot(ref), before);
}

TEST(Cli, UsageErrorsExitOne) {
    TempDir tmp("cli");
    auto r = cli({"extract", "--layer", "1", "--kind", "refusal", "--out", (tmp.path() / "x.json").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--bundle"), std::string::npos);
    EXPECT_EQ(cli({"frobnicate"}).code, 1);
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"synth", "--pairs", "5", "--kind", "sideways", "--out", (tmp.path() / "b").string()}).code, 1);
    r = cli({"extract", "--bundle", (tmp.path() / "missing").string(), "--layer", "1", "--kind", "refusal", "--out",
             (tmp.path() / "x.json").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
    EXPECT_FALSE(fs::exists(tmp.path() / "x.json"));
}

TEST(Cli, ValidationErrorsExitOne) {
    TempDir tmp("cli");
    const auto ref = (tmp.path() / "ref").string();
    ASSERT_EQ(cli({"synth", "--pairs", "20", "--kind", "refusal", "--out", ref}).code, 0);
    EXPECT_EQ(cli({"extract", "--bundle", ref, "--layer", "9", "--kind", "refusal", "--out",
                   (tmp.path() / "v.json").string()})
                  .code,
              1);
    EXPECT_EQ(cli({"extract", "--bundle", ref, "--layer", "2", "--kind", "refusal", "--retain", "0", "--out",
                   (tmp.path() / "v.json").string()})
                  .code,
              1);
}

TEST(Cli, IoErrorsExitTwo) {
    TempDir tmp("cli");
    const auto ref = (tmp.path() / "ref").string();
    ASSERT_EQ(cli({"synth", "--pairs", "20", "--kind", "refusal", "--out", ref}).code, 0);
    const auto nowhere = (tmp.path() / "no" / "such" / "v.json").string();
    const auto r = cli({"extract", "--bundle", ref, "--layer", "5", "--kind", "refusal", "--out", nowhere});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(cli({"synth", "--pairs", "5", "--kind", "harm", "--out", (tmp.path() / "no" / "b").string()}).code, 2);
}

TEST(Cli, HelpExitsZero) {
    const auto r = cli({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("grid-search"), std::string::npos);
}
