// gwflip: command-line front end.
//
// Exit codes: 0 success, 2 verification failure, 3 input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gwflip/harness.hpp"
#include "gwflip/instance.hpp"
#include "gwflip/numerics.hpp"
#include "gwflip/oracle.hpp"

namespace {

constexpr int kExitVerify = 2;
constexpr int kExitInput = 3;

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw gwflip::InputError("cannot write '" + path + "'");
    out << text;
}

gwflip::WeightLaw parse_weight_law(const std::string& text) {
    if (text == "unit") return gwflip::WeightLaw::unit();
    double lo = 0.0, hi = 0.0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "uniform:%lf,%lf%c", &lo, &hi, &tail) == 2 && lo > 0.0 && hi >= lo)
        return gwflip::WeightLaw::uniform(lo, hi);
    throw gwflip::InputError("weights must be 'unit' or 'uniform:LO,HI' with 0 < LO <= HI");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Max-2LIN / Max-Cut: SDP + hyperplane rounding + candidate flips"};
    app.require_subcommand(1);
    app.set_version_flag("--version", gwflip::kVersion);

    // solve
    std::string solve_path, solve_json, triangle_mode = "neighborhood";
    gwflip::SolveOptions solve_opts;
    auto* solve = app.add_subcommand("solve", "run the pipeline on an instance file");
    solve->add_option("instance", solve_path, "instance file")->required();
    solve->add_option("--trials", solve_opts.trials, "rounding trials")->check(CLI::PositiveNumber);
    solve->add_option("--seed", solve_opts.seed, "base seed");
    solve->add_option("--epsilon-C", solve_opts.epsilon_constant, "constant C in eps")->check(CLI::PositiveNumber);
    solve->add_option("--triangle-mode", triangle_mode, "none, neighborhood or all")
        ->check(CLI::IsMember({"none", "neighborhood", "all"}));
    solve->add_option("--rank", solve_opts.sdp.rank, "embedding rank (0: default)")->check(CLI::NonNegativeNumber);
    solve->add_option("--tol", solve_opts.sdp.constraint_tol, "triangle constraint tolerance")->check(CLI::PositiveNumber);
    solve->add_flag("--oracle", solve_opts.oracle, "also compute the exact optimum");
    solve->add_option("--oracle-cap", solve_opts.oracle_cap, "largest n for the oracle");
    solve->add_flag("--polish", solve_opts.polish, "greedy 1-opt after flipping (reported separately)");
    solve->add_option("--json", solve_json, "write the JSON report here ('-' for stdout)");

    // oracle
    std::string oracle_path, oracle_json;
    gwflip::VertexId oracle_cap = gwflip::kDefaultOracleCap;
    auto* oracle = app.add_subcommand("oracle", "exact optimum by enumeration");
    oracle->add_option("instance", oracle_path, "instance file")->required();
    oracle->add_option("--cap", oracle_cap, "largest n to enumerate");
    oracle->add_option("--json", oracle_json, "write the JSON result here ('-' for stdout)");

    // verify
    gwflip::VerifyOptions verify_opts;
    std::string verify_json;
    auto* verify = app.add_subcommand("verify", "run the numerics checks");
    verify->add_option("--seed", verify_opts.seed, "base seed");
    verify->add_option("--taus", verify_opts.gap_taus, "truncation indices for the gap at x = 1")->delimiter(',');
    verify->add_option("--samples", verify_opts.local_gain_samples, "Monte-Carlo samples per local-gain run");
    verify->add_option("--json", verify_json, "write the JSON report here ('-' for stdout)");

    // experiment
    std::string spec_path, experiment_csv;
    unsigned workers = 1;
    auto* experiment = app.add_subcommand("experiment", "run an experiment spec and write CSV");
    experiment->add_option("spec", spec_path, "experiment spec (JSON)")->required();
    experiment->add_option("--csv", experiment_csv, "output CSV (overrides the spec; '-' for stdout)");
    experiment->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

    // gen
    gwflip::VertexId gen_n = 0;
    int gen_d = 0;
    double sign_bias = 1.0;
    std::uint64_t gen_seed = 0;
    std::string weights = "unit", gen_out = "-";
    auto* gen = app.add_subcommand("gen", "generate a random regular instance");
    gen->add_option("--n", gen_n, "vertices")->required();
    gen->add_option("--d", gen_d, "degree")->required();
    gen->add_option("--sign-bias", sign_bias, "probability of b = -1")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--weights", weights, "unit or uniform:LO,HI");
    gen->add_option("--seed", gen_seed, "seed");
    gen->add_option("--out", gen_out, "output path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*solve) {
            solve_opts.sdp.triangle_mode = gwflip::triangle_mode_from_string(triangle_mode);
            const auto inst = gwflip::read_instance_file(solve_path);
            const auto out = gwflip::solve_instance(inst, solve_opts);
            std::cout << "best value " << out.best_value << "\n"
                      << "sdp value " << out.sdp_value << "\n"
                      << "ratio vs sdp " << out.report["best"]["ratio_vs_sdp"].get<double>() << "\n";
            if (out.oracle)
                std::cout << "opt " << out.oracle->opt << "\n"
                          << "ratio vs opt " << out.report["oracle"]["ratio_vs_opt"].get<double>() << "\n";
            if (!solve_json.empty()) write_text(solve_json, out.report.dump(2) + "\n");
        } else if (*oracle) {
            const auto inst = gwflip::read_instance_file(oracle_path);
            const auto res = gwflip::brute_force_opt(inst, oracle_cap);
            std::cout << "opt " << res.opt << "\n";
            if (!oracle_json.empty()) {
                const nlohmann::json j{{"opt", res.opt}, {"enumerated", res.enumerated}, {"argmax", res.argmax.labels()}};
                write_text(oracle_json, j.dump(2) + "\n");
            }
        } else if (*verify) {
            const auto checks = gwflip::run_verification(verify_opts);
            bool all = true;
            for (const auto& c : checks) {
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name;
                if (!c.pass) std::cout << "  [" << c.worst_case << "]";
                std::cout << "\n";
                all = all && c.pass;
            }
            if (!verify_json.empty())
                write_text(verify_json, gwflip::verification_to_json(checks, verify_opts).dump(2) + "\n");
            return all ? 0 : kExitVerify;
        } else if (*experiment) {
            auto spec = gwflip::load_experiment_spec(spec_path);
            if (!experiment_csv.empty()) spec.csv = experiment_csv;
            const auto result = gwflip::run_experiment(spec, workers);
            std::ostringstream csv;
            gwflip::write_experiment_csv(result, csv);
            write_text(spec.csv.empty() ? std::string("-") : spec.csv.string(), csv.str());
            std::size_t failed = 0;
            for (const auto& r : result.rows) failed += r.error.empty() ? 0 : 1;
            if (failed > 0) std::cerr << failed << " instance(s) failed; see error rows\n";
        } else if (*gen) {
            const auto inst = gwflip::gen_random_regular(gen_n, gen_d, sign_bias, parse_weight_law(weights), gen_seed);
            write_text(gen_out, gwflip::write_instance(inst));
        }
    } catch (const gwflip::InstanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const gwflip::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const gwflip::OracleRefused& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
