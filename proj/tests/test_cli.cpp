#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "czgrid/experiments.hpp"

using namespace czgrid;
using nlohmann::json;

namespace {

std::vector<json> records(const std::string& jsonl) {
    std::vector<json> out;
    std::istringstream in(jsonl);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
}

std::vector<json> of_type(const std::vector<json>& recs, const std::string& type) {
    std::vector<json> out;
    for (const auto& r : recs) {
        if (r.at("type") == type) out.push_back(r);
    }
    return out;
}

struct BinaryRun {
    int status = -1;
    std::string out;
};

BinaryRun run_binary(const std::string& args) {
    BinaryRun r;
    const std::string cmd = std::string(CZGRID_BIN) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    for (std::size_t got; (got = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, got);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

ExperimentConfig quick() {
    ExperimentConfig c;
    c.trials = 100;
    return c;
}

std::filesystem::path temp_dir() {
    const auto d = std::filesystem::temp_directory_path() / ("czgrid_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
}

}  // namespace

TEST(Config, ParsesKeyValueLinesWithComments) {
    ExperimentConfig c;
    apply_config_text(c, "# experiment\n n = 2\nj-lo=-6   # finer\n\nalpha_grid = 0.5, 0.25\nj_list = -3\n");
    EXPECT_EQ(c.n, 2);
    EXPECT_EQ(c.j_lo, -6);
    EXPECT_EQ(c.alpha_grid, (std::vector<double>{0.5, 0.25}));
    EXPECT_EQ(c.j_list, (std::vector<int>{-3}));
    apply_setting(c, "trials", "7");
    EXPECT_EQ(c.trials, std::optional<std::int64_t>(7));
}

TEST(Config, RejectsBadInput) {
    ExperimentConfig c;
    EXPECT_THROW(apply_config_text(c, "what = 1\n"), ConfigError);
    EXPECT_THROW(apply_config_text(c, "n = two\n"), ConfigError);
    EXPECT_THROW(apply_config_text(c, "n = 1.5\n"), ConfigError);
    EXPECT_THROW(apply_config_text(c, "n\n"), ConfigError);
    EXPECT_THROW(apply_config_text(c, "p_list = 1.5,,2\n"), ConfigError);
    EXPECT_THROW(apply_config_file(c, "/nonexistent/czgrid.cfg"), ConfigError);
    try {
        apply_config_text(c, "n = 1\nbogus = 3\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);  // line number
    }
}

TEST(Config, EnvironmentFileFlagPriority) {
    const auto dir = temp_dir();
    const auto file = dir / "prio.cfg";
    std::ofstream(file) << "seed = 20\n";

    ::setenv("CZGRID_SEED", "10", 1);
    ExperimentConfig env;
    apply_environment(env);
    EXPECT_EQ(env.seed, 10u);
    apply_config_file(env, file.string());
    EXPECT_EQ(env.seed, 20u);
    ::setenv("CZGRID_SEED", "junk", 1);
    ExperimentConfig bad;
    EXPECT_THROW(apply_environment(bad), ConfigError);
    ::unsetenv("CZGRID_SEED");

    // the binary: flag beats file beats environment
    const BinaryRun a = run_binary("counterexample --config " + file.string() + " --seed 30");
    const BinaryRun b = run_binary("counterexample --seed 30");
    ASSERT_EQ(a.status, 0);
    EXPECT_EQ(records(a.out)[0]["config"]["seed"], 30);
    EXPECT_EQ(records(b.out)[0]["config"]["seed"], 30);
    const BinaryRun c = run_binary("counterexample --config " + file.string());
    EXPECT_EQ(records(c.out)[0]["config"]["seed"], 20);
    const BinaryRun d = run_binary("counterexample");
    EXPECT_EQ(records(d.out)[0]["config"]["seed"], 1);
    std::filesystem::remove_all(dir);
}

TEST(Config, EnvironmentSeedReachesTheBinary) {
    ::setenv("CZGRID_SEED", "44", 1);
    const BinaryRun r = run_binary("counterexample");
    ::unsetenv("CZGRID_SEED");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(records(r.out)[0]["config"]["seed"], 44);
}

TEST(Validate, InconsistentSettingsExitOne) {
    ExperimentConfig c;
    c.j_lo = 3;
    c.j_hi = 1;
    EXPECT_THROW(validate(c), ConfigError);
    const CommandResult r = run_command("grid", c);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_FALSE(r.message.empty());
    EXPECT_TRUE(r.jsonl.empty());

    ExperimentConfig t;
    t.trials = 0;
    EXPECT_EQ(run_command("maximal", t).exit_code, 1);
    ExperimentConfig n;
    n.n = 0;
    EXPECT_EQ(run_command("czdecomp", n).exit_code, 1);
    ExperimentConfig b;
    b.b_list = {1.5};
    EXPECT_EQ(run_command("maximal", b).exit_code, 1);
    EXPECT_EQ(run_command("nonsense", ExperimentConfig{}).exit_code, 1);
}

TEST(Binary, UsageErrorsExitOne) {
    EXPECT_EQ(run_binary("").status, 1);
    EXPECT_EQ(run_binary("grid --n x").status, 1);
    EXPECT_EQ(run_binary("grid --bogus 3").status, 1);
    EXPECT_EQ(run_binary("grid --j-lo 2 --j-hi 1").status, 1);
    EXPECT_EQ(run_binary("grid --config /nonexistent/file").status, 1);
    EXPECT_EQ(run_binary("counterexample --n 2").status, 1);
}

TEST(Commands, GridDefaultsPass) {
    const CommandResult r = run_command("grid", quick());
    ASSERT_EQ(r.exit_code, 0) << r.message;
    const auto recs = records(r.jsonl);
    EXPECT_EQ(recs.front()["type"], "header");
    EXPECT_EQ(recs.front()["schema"], "czgrid.v1");
    EXPECT_EQ(recs.back()["type"], "summary");
    EXPECT_FALSE(of_type(recs, "chain").empty());
    EXPECT_FALSE(of_type(recs, "locate").empty());
    for (const auto& p : of_type(recs, "property")) EXPECT_TRUE(p["pass"].get<bool>()) << p.dump();
    EXPECT_FALSE(r.csv.empty());
}

TEST(Commands, MaximalDefaultsPass) {
    const CommandResult r = run_command("maximal", quick());
    ASSERT_EQ(r.exit_code, 0) << r.message;
    const auto recs = records(r.jsonl);
    EXPECT_EQ(of_type(recs, "distributional_batches").size(), 1u);
    EXPECT_EQ(recs.back()["type"], "summary");
    EXPECT_TRUE(recs.back()["pass"].get<bool>());
}

TEST(Commands, EveryCommandEndsWithASummary) {
    for (const char* cmd : {"grid", "maximal", "czdecomp", "counterexample"}) {
        const auto recs = records(run_command(cmd, quick()).jsonl);
        ASSERT_GE(recs.size(), 2u) << cmd;
        EXPECT_EQ(recs.front()["command"], cmd);
        EXPECT_EQ(recs.back()["type"], "summary") << cmd;
        EXPECT_EQ(recs.back()["pass"], true) << cmd;
        EXPECT_EQ(of_type(recs, "summary").size(), 1u) << cmd;
    }
}

TEST(Commands, CzdecompDefaultsPass) {
    const CommandResult r = run_command("czdecomp", quick());
    ASSERT_EQ(r.exit_code, 0) << r.message;
    const json s = records(r.jsonl).back();
    EXPECT_EQ(s["violations"], 0);
    EXPECT_EQ(s["constant"], 3.0);
    EXPECT_EQ(s["constant_2n"], 2.0);
    EXPECT_LE(s["max_good_sup_over_alpha"].get<double>(), 3.0);
}

TEST(Commands, CounterexampleRowsFollowTheList) {
    ExperimentConfig c;
    const CommandResult r = run_command("counterexample", c);
    ASSERT_EQ(r.exit_code, 0) << r.message;
    const auto rows = of_type(records(r.jsonl), "counterexample");
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& row : rows) EXPECT_LE(row["relative_error"].get<double>(), 1e-9);

    c.j_list = {-7};
    const CommandResult one = run_command("counterexample", c);
    EXPECT_EQ(of_type(records(one.jsonl), "counterexample").size(), 1u);
    // csv: header plus one row
    EXPECT_EQ(std::count(one.csv.begin(), one.csv.end(), '\n'), 2);
}

TEST(Commands, CoarseQuadratureIsAnAssertionFailure) {
    ExperimentConfig c;
    c.quadrature_points = 2;
    const CommandResult r = run_command("counterexample", c);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_FALSE(r.jsonl.empty());
}

TEST(Commands, ShallowGridIsAConfigError) {
    ExperimentConfig c;
    c.counterexample_j_lo = -10;
    EXPECT_EQ(run_command("counterexample", c).exit_code, 1);
}

TEST(Determinism, RerunsAreByteIdentical) {
    for (const char* cmd : {"grid", "maximal", "czdecomp", "counterexample"}) {
        ExperimentConfig c = quick();
        c.seed = 77;
        const CommandResult a = run_command(cmd, c), b = run_command(cmd, c);
        EXPECT_EQ(a.jsonl, b.jsonl) << cmd;
        EXPECT_EQ(a.csv, b.csv) << cmd;
    }
    ExperimentConfig c = quick();
    c.seed = 78;
    ExperimentConfig d = quick();
    d.seed = 79;
    EXPECT_NE(run_command("maximal", c).jsonl, run_command("maximal", d).jsonl);
}

TEST(Outputs, WritesJsonlAndCsvFiles) {
    const auto dir = temp_dir();
    const auto path = dir / "run.jsonl";
    const BinaryRun r = run_binary("counterexample --out " + path.string());
    ASSERT_EQ(r.status, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream j(path), c(dir / "run.csv");
    ASSERT_TRUE(j && c);
    std::stringstream js, cs;
    js << j.rdbuf();
    cs << c.rdbuf();
    EXPECT_EQ(js.str(), run_command("counterexample", ExperimentConfig{}).jsonl);
    EXPECT_EQ(cs.str().substr(0, cs.str().find('\n')),
              "ell,level,pairing,pairing_numeric,relative_error,h1_upper,h1d_lower");
    EXPECT_THROW(write_outputs(CommandResult{}, (dir / "missing" / "x.jsonl").string()), ConfigError);
    std::filesystem::remove_all(dir);
}
