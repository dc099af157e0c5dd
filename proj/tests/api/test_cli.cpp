// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include "argsplat/argsplat.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int
run(const std::string &args) {
    const std::string cmd = std::string(ARGSPLAT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status      = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path
freshDir(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / ("argsplat_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string
slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("two gaussians simplify to one merge record") {
    const fs::path dir = freshDir("two");
    REQUIRE(run("ingest --synthetic 2 --out " + dir.string()) == 0);
    REQUIRE(run("simplify --target 1 --out " + dir.string()) == 0);
    argsplat_sequence *seq = nullptr;
    REQUIRE(argsplat_sequence_load((dir / "sequence.args").c_str(), &seq) == ARGSPLAT_OK);
    CHECK(argsplat_sequence_size(seq) == 1);
    argsplat_sequence_free(seq);
    fs::remove_all(dir);
}

TEST_CASE("causal mask text is lower triangular") {
    const fs::path dir = freshDir("causal");
    REQUIRE(run("ingest --synthetic 2 --out " + dir.string()) == 0);
    REQUIRE(run("simplify --out " + dir.string()) == 0);
    REQUIRE(run("tokenize --out " + dir.string()) == 0);
    REQUIRE(run("masks --variant causal --out " + dir.string()) == 0);
    CHECK(slurp(dir / "mask_causal.txt") == "100\n110\n111\n");
    CHECK(fs::exists(dir / "decode_cost_causal.csv"));
    fs::remove_all(dir);
}

TEST_CASE("usage errors and bad inputs map to distinct exit codes") {
    const fs::path dir = freshDir("codes");
    CHECK(run("simplify --no-such-flag --out " + dir.string()) == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("simplify --input /nonexistent.argx --out " + dir.string()) == 3);
    REQUIRE(run("ingest --synthetic 4 --out " + dir.string()) == 0);
    CHECK(run("simplify --target 9 --out " + dir.string()) == 5);
    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "no-such-key=1\n";
    }
    CHECK(run("simplify --config " + (dir / "bad.cfg").string() + " --out " + dir.string()) == 2);
    const std::string threads = "ARGS_THREADS=zero " + std::string(ARGSPLAT_CLI_PATH) + " render --out " +
                                dir.string() + " >/dev/null 2>&1";
    const int status = std::system(threads.c_str());
    CHECK((WIFEXITED(status) && WEXITSTATUS(status) == 2));
    fs::remove_all(dir);
}

TEST_CASE("config values apply unless a flag overrides them") {
    const fs::path dir = freshDir("config");
    REQUIRE(run("ingest --synthetic 10 --out " + dir.string()) == 0);
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "# comment\n--target=4\nbeta = 0.5\n";
    }
    REQUIRE(run("simplify --config " + (dir / "run.cfg").string() + " --out " + dir.string()) == 0);
    argsplat_sequence *seq = nullptr;
    REQUIRE(argsplat_sequence_load((dir / "sequence.args").c_str(), &seq) == ARGSPLAT_OK);
    CHECK(argsplat_sequence_size(seq) == 6);
    argsplat_sequence_free(seq);
    REQUIRE(run("simplify --config " + (dir / "run.cfg").string() + " --target 7 --out " + dir.string()) == 0);
    REQUIRE(argsplat_sequence_load((dir / "sequence.args").c_str(), &seq) == ARGSPLAT_OK);
    CHECK(argsplat_sequence_size(seq) == 3);
    argsplat_sequence_free(seq);
    fs::remove_all(dir);
}

TEST_CASE("verify exits cleanly with an empty failure list") {
    const fs::path dir = freshDir("verify");
    REQUIRE(run("verify --out " + dir.string()) == 0);
    const std::string json = slurp(dir / "verify.json");
    CHECK(json.find("\"failures\": 0") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("pipeline output equals the stages run one by one") {
    const fs::path a    = freshDir("pipe_a");
    const fs::path b    = freshDir("pipe_b");
    const std::string s = " --seed 5 --views 2 --size 24x24 --levels 100,50";
    REQUIRE(run("pipeline --synthetic 40 --out " + a.string() + s) == 0);

    const std::string o = " --seed 5 --out " + b.string();
    REQUIRE(run("ingest --synthetic 40" + o) == 0);
    REQUIRE(run("simplify --target 1" + o) == 0);
    REQUIRE(run("expand" + o) == 0);
    REQUIRE(run("hierarchy" + o) == 0);
    REQUIRE(run("tokenize" + o) == 0);
    REQUIRE(run("masks --variant all" + o) == 0);
    REQUIRE(run("render --views 2 --size 24x24" + o) == 0);
    REQUIRE(run("metrics --views 2 --size 24x24 --levels 100,50" + o) == 0);

    std::size_t compared = 0;
    for (const auto &entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a);
        INFO(rel.string());
        REQUIRE(fs::exists(b / rel));
        CHECK(slurp(entry.path()) == slurp(b / rel));
        ++compared;
    }
    CHECK(compared >= 15);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("re-running a stage reproduces its outputs") {
    const fs::path dir  = freshDir("idem");
    const std::string o = " --seed 3 --out " + dir.string();
    REQUIRE(run("ingest --synthetic 30" + o) == 0);
    const std::vector<std::string> stages = {"simplify --target 1", "expand", "hierarchy", "tokenize",
                                             "masks", "render --views 2 --size 16x16",
                                             "metrics --views 2 --size 16x16 --levels 100,50"};
    for (const std::string &stage : stages) {
        INFO(stage);
        REQUIRE(run(stage + o) == 0);
        std::map<std::string, std::string> before;
        for (const auto &e : fs::recursive_directory_iterator(dir))
            if (e.is_regular_file()) before[e.path().string()] = slurp(e.path());
        REQUIRE(run(stage + o) == 0);
        for (const auto &[path, bytes] : before) CHECK(slurp(path) == bytes);
    }
    fs::remove_all(dir);
}
