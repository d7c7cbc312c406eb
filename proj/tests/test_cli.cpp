#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef LATNKM_CLI_PATH
#error "LATNKM_CLI_PATH must point at the built CLI binary"
#endif

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LATNKM_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    CliResult res;
    std::FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) res.output += buf.data();
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string tmp_path(const std::string& name) { return "/tmp/" + name; }

}  // namespace

TEST_CASE("cli: no subcommand or bad flag is a usage error") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("eval --no-such-flag").exit_code == 2);
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("cli: config errors exit with 2") {
    CHECK(run_cli("eval --rank 0").exit_code == 2);
    CHECK(run_cli("eval --mode bogus").exit_code == 2);
    CHECK(run_cli("eval --hessian bogus").exit_code == 2);
    // T=0 without fixed hyperparameters.
    CHECK(run_cli("eval --vi-rounds 0").exit_code == 2);
}

TEST_CASE("cli: data errors exit with 3") {
    CHECK(run_cli("eval --dataset /nonexistent.csv").exit_code == 3);

    const std::string bad = tmp_path("latnkm_cli_bad.csv");
    {
        std::ofstream out(bad);
        out << "a,y\n1,2\nx,4\n";
    }
    CHECK(run_cli("eval --dataset " + bad).exit_code == 3);
    std::remove(bad.c_str());
}

TEST_CASE("cli: synth writes the cubic CSV pair") {
    const std::string prefix = tmp_path("latnkm_cli_synth");
    const CliResult res = run_cli("synth --seed 5 --out " + prefix);
    CHECK(res.exit_code == 0);
    const std::string train = slurp(prefix + "_train.csv");
    const std::string test = slurp(prefix + "_test.csv");
    CHECK(train.rfind("x,y\n", 0) == 0);
    CHECK(std::count(train.begin(), train.end(), '\n') == 21);  // header + 20 rows
    CHECK(std::count(test.begin(), test.end(), '\n') == 101);

    const CliResult again = run_cli("synth --seed 5 --out " + prefix);
    CHECK(again.exit_code == 0);
    CHECK(slurp(prefix + "_train.csv") == train);  // deterministic
    std::remove((prefix + "_train.csv").c_str());
    std::remove((prefix + "_test.csv").c_str());
}

TEST_CASE("cli: eval on the cubic task writes text and JSON reports") {
    const std::string prefix = tmp_path("latnkm_cli_eval");
    const std::string args =
        "eval --dataset synthetic-cubic --rank 2 --local-dim 4 --hessian last --mode lla "
        "--beta 0.111111 --epochs 8 --vi-rounds 2 --seed 1 --out " +
        prefix;
    const CliResult res = run_cli(args);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("rmse") != std::string::npos);
    const std::string jtext = slurp(prefix + ".json");
    CHECK(jtext.find("\"mean\"") != std::string::npos);

    const CliResult again = run_cli(args);
    CHECK(again.exit_code == 0);
    CHECK(slurp(prefix + ".json") == jtext);  // end-to-end determinism
    std::remove((prefix + ".txt").c_str());
    std::remove((prefix + ".json").c_str());
}

TEST_CASE("cli: fit writes an artifact the library can reload") {
    const std::string artifact = tmp_path("latnkm_cli_artifact.json");
    const CliResult res = run_cli(
        "fit --dataset synthetic-cubic --rank 2 --local-dim 3 --hessian last --beta 0.111111 "
        "--epochs 6 --vi-rounds 1 --seed 2 --out " +
        artifact);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("wrote artifact") != std::string::npos);
    const std::string jtext = slurp(artifact);
    CHECK(jtext.find("latnkm-artifact") != std::string::npos);
    std::remove(artifact.c_str());
}

TEST_CASE("cli: config file plus flag override") {
    const std::string cfg_path = tmp_path("latnkm_cli_cfg.json");
    {
        std::ofstream out(cfg_path);
        out << R"({"dataset":"synthetic-cubic","rank":2,"local_dim":4,"hessian":"last",)"
            << R"("mode":"lla","epochs":8,"vi_rounds":2,"fixed_beta":0.111111,"seed":9})";
    }
    const std::string prefix = tmp_path("latnkm_cli_cfgout");
    const CliResult res =
        run_cli("eval --config " + cfg_path + " --epochs 5 --out " + prefix);
    CHECK(res.exit_code == 0);
    const std::string jtext = slurp(prefix + ".json");
    CHECK(jtext.find("\"epochs\": 5") != std::string::npos);  // flag beats the file
    CHECK(jtext.find("\"seed\": 9") != std::string::npos);    // file value retained
    std::remove(cfg_path.c_str());
    std::remove((prefix + ".txt").c_str());
    std::remove((prefix + ".json").c_str());
}

TEST_CASE("cli: cv and sweep-hessian write grid tables") {
    const std::string cv_prefix = tmp_path("latnkm_cli_cv");
    const CliResult cv = run_cli(
        "cv --dataset synthetic-cubic --local-dim 3 --hessian last --beta 0.111111 --epochs 5 "
        "--vi-rounds 1 --seed 1 --rank-grid 1,2 --folds 3 --out " +
        cv_prefix);
    CHECK(cv.exit_code == 0);
    CHECK(cv.output.find("best:") != std::string::npos);
    CHECK(slurp(cv_prefix + ".json").find("latnkm-cv") != std::string::npos);
    std::remove((cv_prefix + ".txt").c_str());
    std::remove((cv_prefix + ".json").c_str());

    const std::string sw_prefix = tmp_path("latnkm_cli_sweep");
    const CliResult sw = run_cli(
        "sweep-hessian --dataset synthetic-cubic --rank 2 --local-dim 3 --beta 0.111111 "
        "--epochs 5 --vi-rounds 1 --seed 1 --threshold-grid 0,0.5 --out " +
        sw_prefix);
    CHECK(sw.exit_code == 0);
    CHECK(sw.output.find("variant") != std::string::npos);
    CHECK(slurp(sw_prefix + ".json").find("latnkm-sweep") != std::string::npos);
    std::remove((sw_prefix + ".txt").c_str());
    std::remove((sw_prefix + ".json").c_str());
}
