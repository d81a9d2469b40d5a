#pragma once

// Experiment runner and report serialization shared by the CLI and tests.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gwflip/instance.hpp"
#include "gwflip/localsearch.hpp"
#include "gwflip/numerics.hpp"
#include "gwflip/oracle.hpp"
#include "gwflip/sdp.hpp"

namespace gwflip {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCsvFormat = "gwflip-experiment-csv v1";

/// Bad user input (spec, flags, files). The CLI maps it to exit code 3.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const RunReport& r);
nlohmann::json to_json(const SdpReport& r);
nlohmann::json to_json(const CheckResult& r);
nlohmann::json verification_to_json(const std::vector<CheckResult>& checks, const VerifyOptions& opts);

// ---------------------------------------------------------------------------
// solve

struct SolveOptions {
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    double epsilon_constant = 2.0;
    SdpConfig sdp;
    bool oracle = false;
    VertexId oracle_cap = kDefaultOracleCap;
    bool polish = false;
};

struct SolveOutcome {
    nlohmann::json report;
    Assignment best;
    double best_value = 0.0;
    double sdp_value = 0.0;
    std::optional<OracleResult> oracle;
};

/// Solves the relaxation once (SDP seed = opts.seed), then runs `trials`
/// roundings from the trial seed stream of opts.seed. With opts.oracle the
/// instance is also solved exactly; OracleRefused propagates.
SolveOutcome solve_instance(const Max2LinInstance& inst, const SolveOptions& opts);

// ---------------------------------------------------------------------------
// experiments

struct GeneratorParams {
    std::vector<VertexId> n_list;
    std::vector<int> d_list;
    int instances = 1;  // per (n, d)
    double sign_bias = 1.0;
    WeightLaw weights;
};

struct ExperimentSpec {
    std::vector<std::filesystem::path> files;  // used when non-empty
    std::optional<GeneratorParams> generator;
    std::size_t trials = 1;
    double epsilon_constant = 2.0;
    TriangleMode triangle_mode = TriangleMode::neighborhood;
    int rank = 0;
    double constraint_tol = 1e-6;
    std::uint64_t seed = 0;
    bool polish = false;
    std::filesystem::path csv;  // may be empty

    /// Throws InputError on counts < 1, missing files, or no source.
    void validate() const;
};

/// Relative paths in the spec are resolved against `base_dir`.
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct ExperimentRow {
    std::size_t instance_index = 0;
    std::string instance;
    VertexId n = 0;
    int d = 0;
    std::size_t trial = 0;
    RunReport report;
    std::string error;  // non-empty: the row failed and `report` is unset
};

struct ExperimentSummary {
    int d = 0;
    std::size_t count = 0;
    double mean_gain = 0.0;
    double mean_rho_window = 0.0;
    double rounded_ratio = 0.0;
    double flipped_ratio = 0.0;
    double rounded_ratio_sd = 0.0;
    double flipped_ratio_sd = 0.0;
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;  // sorted by (instance_index, trial)
    std::vector<ExperimentSummary> summaries;  // sorted by d
};

/// Each instance (SDP solve plus its trials) is one task in a pool of
/// `workers` threads. Seeds depend only on the spec, so output does not
/// depend on the worker count.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned workers = 1);

/// Ratios in the CSV use the SDP value as denominator.
void write_experiment_csv(const ExperimentResult& result, std::ostream& out);

}  // namespace gwflip
