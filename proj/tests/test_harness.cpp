#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "gwflip/harness.hpp"
#include "support.hpp"

using namespace gwflip;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / ("gwflip_harness_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GWFLIP_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') quoted = !quoted;
        else if (c == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else cur += c;
    }
    out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("RunReport JSON keys") {
    RunReport r;
    r.sdp_value = 3.0;
    r.rounded_value = 2.0;
    r.flipped_value = 2.5;
    r.gain = 0.5;
    r.s_size = 4;
    r.flip_count = 1;
    r.sdp_seed = 7;
    r.rounding_seed = 9;
    r.converged = true;
    const auto j = to_json(r);
    for (const char* key : {"sdp_value", "rounded_value", "flipped_value", "gain", "s_size", "flip_count", "seeds",
                            "converged", "rho_window_fraction", "generator"})
        CHECK(j.contains(key));
    CHECK(j["seeds"]["rounding"] == 9);
    CHECK(!j.contains("polished_value"));
}

TEST_CASE("verification JSON") {
    const std::vector<CheckResult> checks{{"a", true, {{"k", 1.5}}, ""}, {"b", false, {}, "x=1"}};
    const auto j = verification_to_json(checks, {});
    CHECK(j["pass"] == false);
    CHECK(j["checks"].size() == 2);
    CHECK(j["checks"][0]["constants"]["k"] == 1.5);
    CHECK(j["checks"][1]["worst_case"] == "x=1");
}

TEST_CASE("solve_instance") {
    SolveOptions opts;
    opts.trials = 50;
    opts.oracle = true;
    const auto out = solve_instance(testsupport::triangle(), opts);
    CHECK(out.best_value == 2.0);
    REQUIRE(out.oracle);
    CHECK(out.report["oracle"]["ratio_vs_opt"] == 1.0);
    CHECK(out.report["trials"].size() == 50);
    CHECK(out.report["best"]["assignment"].size() == 3);
    CHECK(solve_instance(testsupport::triangle(), opts).report.dump() == out.report.dump());
    opts.trials = 0;
    CHECK_THROWS_AS(solve_instance(testsupport::triangle(), opts), InputError);
}

TEST_CASE("experiment spec parsing") {
    const auto spec = experiment_spec_from_json(nlohmann::json::parse(R"({
        "generator": {"n": [20], "d": [3], "instances": 2, "sign_bias": 0.5,
                      "weights": {"law": "uniform", "lo": 0.5, "hi": 2}},
        "trials": 4, "epsilon_C": 3, "triangle_mode": "none", "seed": 11, "output": {"csv": "out.csv"}})"),
                                                "/base");
    CHECK(spec.trials == 4);
    CHECK(spec.triangle_mode == TriangleMode::none);
    CHECK(spec.csv == fs::path("/base/out.csv"));
    CHECK(spec.generator->weights.kind == WeightLaw::Kind::uniform);

    const auto bad = [](const char* text) {
        return experiment_spec_from_json(nlohmann::json::parse(text));
    };
    CHECK_THROWS_AS(bad(R"({"trials": 3})"), InputError);
    CHECK_THROWS_AS(bad(R"({"generator": {"n": [20], "d": [3]}, "trials": 0})"), InputError);
    CHECK_THROWS_AS(bad(R"({"generator": {"n": [5], "d": [3]}})"), InputError);
    CHECK_THROWS_AS(bad(R"({"generator": {"n": [20], "d": [3]}, "triangle_mode": "x"})"), InputError);
    CHECK_THROWS_AS(bad(R"({"files": ["/definitely/not/here.txt"]})"), InputError);
    CHECK_THROWS_AS(bad(R"({"generator": {"n": "20", "d": [3]}})"), InputError);
    CHECK_THROWS_AS(load_experiment_spec("/definitely/not/here.json"), InputError);
}

TEST_CASE("experiment CSV shape, invariants and determinism") {
    ExperimentSpec spec;
    GeneratorParams g;
    g.n_list = {24};
    g.d_list = {3, 5, 8};
    g.instances = 2;
    spec.generator = g;
    spec.trials = 5;
    spec.seed = 3;

    const auto one = run_experiment(spec, 1);
    const auto three = run_experiment(spec, 3);
    std::ostringstream a, b;
    write_experiment_csv(one, a);
    write_experiment_csv(three, b);
    CHECK(a.str() == b.str());

    std::istringstream in(a.str());
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# ", 0) == 0);
    std::getline(in, line);
    const auto header = split(line);
    REQUIRE(header.size() == 20);
    std::size_t trials = 0, summaries = 0;
    while (std::getline(in, line)) {
        const auto f = split(line);
        REQUIRE(f.size() == header.size());
        if (f[0] == "trial") {
            ++trials;
            const double rounded = std::stod(f[7]), flipped = std::stod(f[8]), rho = std::stod(f[12]);
            CHECK(flipped >= rounded);
            CHECK(rho >= 0.0);
            CHECK(rho <= 1.0);
        } else if (f[0] == "summary") {
            ++summaries;
            CHECK(std::stod(f[9]) >= 0.0);
            CHECK(std::stoul(f[18]) == 10);
        }
    }
    CHECK(trials == 3 * 2 * 5);
    CHECK(summaries == 3);
}

TEST_CASE("experiment records failed instances and continues") {
    const auto dir = scratch_dir();
    write_file(dir / "good.txt", "3 3\n0 1 -1 1\n0 2 -1 1\n1 2 -1 1\n");
    write_file(dir / "bad.txt", "3 3\n0 1 -1 1\n0 2 -1 0\n1 2 -1 1\n");
    write_file(dir / "spec.json", R"({"files": ["good.txt", "bad.txt"], "trials": 3, "seed": 1})");
    const auto spec = load_experiment_spec(dir / "spec.json");
    const auto res = run_experiment(spec, 2);
    REQUIRE(res.rows.size() == 4);
    CHECK(res.rows[3].error.find("line 3") != std::string::npos);
    std::ostringstream csv;
    write_experiment_csv(res, csv);
    CHECK(csv.str().find("\nerror,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("CLI exit codes and determinism") {
    const auto dir = scratch_dir();
    const auto tri = (dir / "tri.txt").string();
    write_file(tri, "3 3\n0 1 -1 1\n0 2 -1 1\n1 2 -1 1\n");
    write_file(dir / "c30.txt", write_instance(testsupport::cycle(30)));

    CHECK(run_cli("solve " + tri + " --trials 50 --oracle --seed 4 --json " + (dir / "a.json").string()) == 0);
    CHECK(run_cli("solve " + tri + " --trials 50 --oracle --seed 4 --json " + (dir / "b.json").string()) == 0);
    CHECK(read_file(dir / "a.json") == read_file(dir / "b.json"));
    const auto j = nlohmann::json::parse(read_file(dir / "a.json"));
    CHECK(j["best"]["value"] == 2.0);
    CHECK(j["oracle"]["ratio_vs_opt"] == 1.0);

    CHECK(run_cli("solve " + (dir / "missing.txt").string()) == 3);
    CHECK(run_cli("oracle " + (dir / "c30.txt").string()) == 3);
    CHECK(run_cli("oracle " + tri) == 0);
    CHECK(run_cli("solve " + tri + " --triangle-mode bogus") == 3);
    CHECK(run_cli("frobnicate") == 3);
    CHECK(run_cli("gen --n 5 --d 3") == 3);
    CHECK(run_cli("gen --n 10 --d 3 --seed 2 --out " + (dir / "g.txt").string()) == 0);
    CHECK(parse_instance(read_file(dir / "g.txt")).max_degree() == 3);
    CHECK(run_cli("verify --samples 20000 --json " + (dir / "v.json").string()) == 0);
    CHECK(nlohmann::json::parse(read_file(dir / "v.json"))["pass"] == true);
    fs::remove_all(dir);
}
