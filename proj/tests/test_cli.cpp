#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "irmx/cli.hpp"

using namespace irmx::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("irmx_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

int run_tool(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + IRMX_BIN + std::string(" ") + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config text parsing") {
    const KeyValues kv = parse_config_text("# comment\n\nexperiment = sem\n  envs=0.2,2 ; 0.2,1  \nlr = 1e-3");
    REQUIRE(kv.size() == 3);
    CHECK(kv[0] == std::pair<std::string, std::string>{"experiment", "sem"});
    CHECK(kv[1].second == "0.2,2 ; 0.2,1");
    CHECK_THROWS_AS(parse_config_text("experiment sem"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("= 3"), ConfigError);
}

TEST_CASE("defaults, file values, IRMX_OUT and flags layer in order") {
    const KeyValues file = parse_config_text("experiment = sem\nenvs = 0.2, 2\nout_dir = from_file\nseeds = 4");
    RunConfig c = resolve_config(file, {}, nullptr);
    CHECK(c.envs.size() == 1);
    CHECK(c.envs[0].label == "0.2,2");
    CHECK(c.envs[0].values == std::vector<double>{0.2, 2.0});
    CHECK(c.out_dir == "from_file");
    CHECK(c.seeds == std::vector<std::uint64_t>{4});
    CHECK(c.iterations == 20000);

    c = resolve_config(file, {}, "from_env");
    CHECK(c.out_dir == "from_env");
    c = resolve_config(file, {{"out_dir", "from_flag"}, {"seeds", "1,2"}}, "from_env");
    CHECK(c.out_dir == "from_flag");
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
    c = resolve_config(file, {{"experiment", "check"}}, nullptr);
    CHECK(c.experiment == "check");
}

TEST_CASE("bad keys and values are config errors") {
    RunConfig c = default_config("sem");
    CHECK_THROWS_AS(apply_key(c, "learning_rate", "1"), ConfigError);
    CHECK_THROWS_AS(apply_key(c, "lr", "fast"), ConfigError);
    CHECK_THROWS_AS(apply_key(c, "seeds", "-1"), ConfigError);
    CHECK_THROWS_AS(apply_key(c, "method", "IRMv2"), ConfigError);
    CHECK_THROWS_AS(apply_key(c, "optimizer", "sgd"), ConfigError);
    CHECK_THROWS_AS(default_config("plot"), ConfigError);
    CHECK_THROWS_AS(resolve_config({}, {}, nullptr), ConfigError);
    apply_key(c, "alpha_min_grid", "0.9");
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("method grids for the default SEM ranges") {
    const RunConfig c = default_config("sem");
    CHECK(method_grid(c, parse_method("ERM")).size() == 1);
    CHECK(method_grid(c, parse_method("IRMv1")).size() == 2);
    CHECK(method_grid(c, parse_method("v-IRMv1")).size() == 6);
    CHECK(method_grid(c, parse_method("mm-IRMv1")).size() == 6);
    const auto g = method_grid(c, parse_method("mm-IRMv1"));
    CHECK(g[0].loss == irmx::LossKind::SquaredError);
    CHECK(g[0].iterations == 20000);
    CHECK(g[0].learning_rate == 1e-3);
}

TEST_CASE("reals print with 17 significant digits") {
    CHECK(format_real(0.2) == "0.20000000000000001");
    CHECK(format_real(1.0) == "1");
    CHECK(std::stod(format_real(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("check passes by default and fails with the injected Jensen bug") {
    const fs::path ok = scratch("check_ok"), bad = scratch("check_bad");
    CHECK(run_tool("check --out_dir " + ok.string()) == kOk);
    CHECK(fs::exists(ok / "check_results.json"));
    CHECK_FALSE(fs::exists(ok / "check_counterexample.json"));

    CHECK(run_tool("check --inject_bug jensen --out_dir " + bad.string()) == kPropertyFailure);
    const auto cex = nlohmann::json::parse(slurp(bad / "check_counterexample.json"));
    REQUIRE(cex.is_array());
    REQUIRE(cex.size() == 1);
    CHECK(cex[0]["property"] == "jensen (flipped)");
    CHECK(cex[0]["j_penalty"].get<double>() > cex[0]["irmv1_penalty"].get<double>());
}

TEST_CASE("config and I/O problems exit with 2") {
    CHECK(run_tool("sem --no_such_key 3") == kConfigError);
    CHECK(run_tool("sem --lr abc") == kConfigError);
    CHECK(run_tool("--config /nonexistent/irmx.cfg") == kConfigError);
    CHECK(run_tool("") == kConfigError);
    const fs::path file = scratch("not_a_dir");
    std::ofstream(file) << "x";
    CHECK(run_tool("check --out_dir " + (file / "sub").string()) == kConfigError);
}

TEST_CASE("sem writes one row per method and seed, byte-identical on re-run") {
    const fs::path a = scratch("sem_a"), b = scratch("sem_b");
    const std::string args = "sem --envs 0.2,2 --iterations 300 --seeds 0,1,2 --n_per_env 200";
    REQUIRE(run_tool(args + " --out_dir " + a.string()) == kOk);
    REQUIRE(run_tool(args + " --out_dir " + b.string()) == kOk);
    const std::string csv = slurp(a / "sem_results.csv");
    CHECK(csv == slurp(b / "sem_results.csv"));
    CHECK(slurp(a / "sem_summary.json") == slurp(b / "sem_summary.json"));
    const auto rows = lines(csv);
    REQUIRE(rows.size() == 13);
    CHECK(rows[0] == "method,env_set,seed,lambda,alpha_min,gamma,causal_err,noncausal_err");
    CHECK(rows[1].rfind("ERM,\"0.2,2\",0,", 0) == 0);
    const auto summary = nlohmann::json::parse(slurp(a / "sem_summary.json"));
    CHECK(summary["env_sets"][0]["methods"].size() == 4);
}

TEST_CASE("all seeds diverging exits with 3 and flags the rows") {
    const fs::path out = scratch("sem_div");
    CHECK(run_tool("sem --envs 0.2,2 --method IRMv1 --optimizer gd --lr 10 --iterations 200 --seeds 0,1 --out_dir " +
                   out.string()) == kAllSeedsDiverged);
    const auto rows = lines(slurp(out / "sem_results.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[1] == "IRMv1,\"0.2,2\",0,nan,nan,nan,nan,nan");
}

TEST_CASE("IRMX_OUT redirects output when no flag is given") {
    const fs::path cfg_dir = scratch("cfg"), target = scratch("env_out");
    fs::create_directories(cfg_dir);
    std::ofstream(cfg_dir / "run.cfg") << "experiment = check\nout_dir = " << (cfg_dir / "ignored").string() << "\n";
    CHECK(run_tool("--config " + (cfg_dir / "run.cfg").string(), "IRMX_OUT=" + target.string()) == kOk);
    CHECK(fs::exists(target / "check_results.json"));
    CHECK_FALSE(fs::exists(cfg_dir / "ignored"));
}

TEST_CASE("cls writes one row per method and seed, byte-identical on re-run") {
    const fs::path a = scratch("cls_a"), b = scratch("cls_b");
    const std::string args =
        "cls --iterations 150 --n_per_env 200 --alpha_min_grid -0.5 --gamma_grid 0.5 --hidden 4";
    REQUIRE(run_tool(args + " --out_dir " + a.string()) == kOk);
    REQUIRE(run_tool(args + " --out_dir " + b.string()) == kOk);
    const std::string csv = slurp(a / "cls_results.csv");
    CHECK(csv == slurp(b / "cls_results.csv"));
    CHECK(slurp(a / "cls_summary.json") == slurp(b / "cls_summary.json"));
    const auto rows = lines(csv);
    REQUIRE(rows.size() == 13);
    CHECK(rows[0] == "method,seed,test_acc,test_ece,test_ace");
    CHECK(rows[4].rfind("IRMv1,0,", 0) == 0);
}

TEST_CASE("trace writes the last logged iterations for three methods") {
    const fs::path a = scratch("trace_a"), b = scratch("trace_b");
    const std::string args = "trace --iterations 150 --n_per_env 200 --alpha_min_grid -0.5 --gamma_grid 0.5 --hidden 4";
    REQUIRE(run_tool(args + " --out_dir " + a.string()) == kOk);
    REQUIRE(run_tool(args + " --out_dir " + b.string()) == kOk);
    const std::string csv = slurp(a / "trace.csv");
    CHECK(csv == slurp(b / "trace.csv"));
    const auto rows = lines(csv);
    REQUIRE(rows.size() == 151);
    CHECK(rows[0] == "method,seed,iter,train_J,test_acc,test_ece,test_ace");
    CHECK(rows[1].rfind("IRMv1,0,101,", 0) == 0);
    CHECK(rows[150].rfind("mm-IRMv1,0,150,", 0) == 0);
    CHECK(run_tool("trace --iterations 40 --tail 50 --out_dir " + a.string()) == kConfigError);
}

}
