#include "gwflip/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "gwflip/rng.hpp"

namespace gwflip {

using nlohmann::json;

namespace {

constexpr std::uint64_t kGenStream = 0x67656eULL;
constexpr std::uint64_t kSdpStream = 0x736470ULL;
constexpr std::uint64_t kRoundStream = 0x726e64ULL;

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

WeightLaw weight_law_from_json(const json& j) {
    const auto law = get_or<std::string>(j, "law", "unit");
    if (law == "unit") return WeightLaw::unit();
    if (law == "uniform") {
        const double lo = get_or(j, "lo", 1.0);
        const double hi = get_or(j, "hi", 1.0);
        if (!(lo > 0.0) || !(hi >= lo)) throw InputError("uniform weight law needs 0 < lo <= hi");
        return WeightLaw::uniform(lo, hi);
    }
    throw InputError("unknown weight law '" + law + "'");
}

struct InstanceTask {
    std::string name;
    std::filesystem::path file;
    VertexId n = 0;
    int d = 0;
    std::uint64_t gen_seed = 0;
};

std::vector<InstanceTask> plan_instances(const ExperimentSpec& spec) {
    std::vector<InstanceTask> tasks;
    if (!spec.files.empty()) {
        for (const auto& f : spec.files) tasks.push_back({f.generic_string(), f, 0, 0, 0});
        return tasks;
    }
    const auto& g = *spec.generator;
    for (int d : g.d_list)
        for (VertexId n : g.n_list)
            for (int k = 0; k < g.instances; ++k) {
                const auto idx = static_cast<std::uint64_t>(tasks.size());
                tasks.push_back({"regular-n" + std::to_string(n) + "-d" + std::to_string(d) + "-" + std::to_string(k),
                                 {}, n, d, derive_seed(spec.seed, kGenStream, idx)});
            }
    return tasks;
}

std::vector<ExperimentRow> run_instance(const ExperimentSpec& spec, const InstanceTask& task, std::size_t index) {
    ExperimentRow proto;
    proto.instance_index = index;
    proto.instance = task.name;
    proto.n = task.n;
    proto.d = task.d;
    try {
        const Max2LinInstance inst =
            task.file.empty() ? gen_random_regular(task.n, task.d, spec.generator->sign_bias, spec.generator->weights,
                                                   task.gen_seed)
                              : read_instance_file(task.file.string());
        proto.n = inst.num_vertices();
        proto.d = inst.max_degree();

        SdpConfig cfg;
        cfg.rank = spec.rank;
        cfg.triangle_mode = spec.triangle_mode;
        cfg.constraint_tol = spec.constraint_tol;
        cfg.seed = derive_seed(spec.seed, kSdpStream, index);
        const SdpResult sdp = solve_sdp(inst, cfg);
        const Epsilon eps = default_epsilon(inst.max_degree(), spec.epsilon_constant);
        const std::uint64_t base = derive_seed(spec.seed, kRoundStream, index);

        std::vector<ExperimentRow> rows;
        for (std::size_t k = 0; k < spec.trials; ++k) {
            ExperimentRow row = proto;
            row.trial = k;
            row.report = run_once(inst, sdp, trial_seed(base, k), eps, RunOptions{spec.polish}).report;
            rows.push_back(std::move(row));
        }
        return rows;
    } catch (const std::exception& e) {
        proto.error = e.what();
        return {proto};
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON

json to_json(const RunReport& r) {
    json j{{"sdp_value", r.sdp_value},
           {"rounded_value", r.rounded_value},
           {"flipped_value", r.flipped_value},
           {"gain", r.gain},
           {"guaranteed_gain", r.guaranteed_gain},
           {"s_size", r.s_size},
           {"flip_count", r.flip_count},
           {"rho_window_fraction", r.rho_window_fraction},
           {"seeds", {{"sdp", r.sdp_seed}, {"rounding", r.rounding_seed}}},
           {"converged", r.converged},
           {"epsilon", r.epsilon},
           {"generator", r.generator}};
    if (r.polished) j["polished_value"] = r.polished_value;
    return j;
}

json to_json(const SdpReport& r) {
    return {{"objective", r.objective},
            {"max_violation", r.max_violation},
            {"outer_iterations", r.outer_iterations},
            {"inner_iterations", r.inner_iterations},
            {"converged", r.converged},
            {"working_set", r.working_set},
            {"seed", r.seed}};
}

json to_json(const CheckResult& r) {
    json constants = json::object();
    for (const auto& [k, v] : r.constants) constants[k] = v;
    return {{"name", r.name}, {"pass", r.pass}, {"constants", constants}, {"worst_case", r.worst_case}};
}

json verification_to_json(const std::vector<CheckResult>& checks, const VerifyOptions& opts) {
    json list = json::array();
    bool all = true;
    for (const auto& c : checks) {
        list.push_back(to_json(c));
        all = all && c.pass;
    }
    return {{"version", kVersion},
            {"generator", kGeneratorName},
            {"seed", opts.seed},
            {"gap_taus", opts.gap_taus},
            {"pass", all},
            {"checks", list}};
}

// ---------------------------------------------------------------------------
// solve

SolveOutcome solve_instance(const Max2LinInstance& inst, const SolveOptions& opts) {
    if (opts.trials < 1) throw InputError("--trials must be >= 1");
    SdpConfig cfg = opts.sdp;
    cfg.seed = opts.seed;
    const SdpResult sdp = solve_sdp(inst, cfg);
    const Epsilon eps = default_epsilon(inst.max_degree(), opts.epsilon_constant);
    BestOf best = best_of(inst, sdp, opts.trials, opts.seed, eps, RunOptions{opts.polish});

    SolveOutcome out;
    out.sdp_value = sdp.report.objective;
    out.best_value = best.best_value;
    out.best = best.best;

    json trials = json::array();
    for (const auto& r : best.reports) trials.push_back(to_json(r));
    json sdp_json = to_json(sdp.report);
    sdp_json["triangle_mode"] = std::string(to_string(cfg.triangle_mode));
    sdp_json["rank"] = sdp.embedding.rank();

    out.report = {{"version", kVersion},
                  {"generator", kGeneratorName},
                  {"n", inst.num_vertices()},
                  {"m", inst.num_edges()},
                  {"d", inst.max_degree()},
                  {"total_weight", inst.total_weight()},
                  {"epsilon", {{"value", eps.value}, {"C", eps.constant}}},
                  {"seed", opts.seed},
                  {"polish", opts.polish},
                  {"sdp", sdp_json},
                  {"trials", trials},
                  {"best",
                   {{"value", best.best_value},
                    {"trial", best.best_trial},
                    {"ratio_vs_sdp", sdp.report.objective > 0.0 ? best.best_value / sdp.report.objective : 0.0},
                    {"assignment", best.best.labels()}}}};
    if (opts.oracle) {
        out.oracle = brute_force_opt(inst, opts.oracle_cap);
        out.report["oracle"] = {{"opt", out.oracle->opt},
                                {"enumerated", out.oracle->enumerated},
                                {"ratio_vs_opt", ratio(*out.oracle, best.best_value)}};
    }
    return out;
}

// ---------------------------------------------------------------------------
// experiments

void ExperimentSpec::validate() const {
    if (trials < 1) throw InputError("experiment: trials must be >= 1");
    if (!(epsilon_constant > 0.0)) throw InputError("experiment: epsilon_C must be > 0");
    if (!(constraint_tol > 0.0)) throw InputError("experiment: tol must be > 0");
    if (rank < 0) throw InputError("experiment: rank must be >= 0");
    if (!files.empty()) {
        for (const auto& f : files)
            if (!std::filesystem::is_regular_file(f)) throw InputError("experiment: no such instance file: " + f.string());
        return;
    }
    if (!generator) throw InputError("experiment: need either 'files' or 'generator'");
    const auto& g = *generator;
    if (g.n_list.empty() || g.d_list.empty()) throw InputError("experiment: generator needs non-empty n and d lists");
    if (g.instances < 1) throw InputError("experiment: generator instances must be >= 1");
    for (int d : g.d_list)
        for (VertexId n : g.n_list)
            if (d < 1 || n < 2 || d >= n || (static_cast<long>(n) * d) % 2 != 0)
                throw InputError("experiment: infeasible regular graph n=" + std::to_string(n) + ", d=" + std::to_string(d));
    if (!(g.sign_bias >= 0.0 && g.sign_bias <= 1.0)) throw InputError("experiment: sign_bias must lie in [0, 1]");
}

ExperimentSpec experiment_spec_from_json(const json& j, const std::filesystem::path& base_dir) {
    const auto resolve = [&](std::filesystem::path p) { return p.is_relative() && !base_dir.empty() ? base_dir / p : p; };
    ExperimentSpec spec;
    try {
        if (j.contains("files"))
            for (const auto& f : j.at("files")) spec.files.push_back(resolve(f.get<std::string>()));
        if (j.contains("generator")) {
            const auto& g = j.at("generator");
            GeneratorParams p;
            p.n_list = g.at("n").get<std::vector<VertexId>>();
            p.d_list = g.at("d").get<std::vector<int>>();
            p.instances = get_or(g, "instances", 1);
            p.sign_bias = get_or(g, "sign_bias", 1.0);
            if (g.contains("weights")) p.weights = weight_law_from_json(g.at("weights"));
            spec.generator = p;
        }
        const long trials = get_or(j, "trials", 1L);
        if (trials < 1) throw InputError("experiment: trials must be >= 1");
        spec.trials = static_cast<std::size_t>(trials);
        spec.epsilon_constant = get_or(j, "epsilon_C", 2.0);
        spec.triangle_mode = triangle_mode_from_string(get_or<std::string>(j, "triangle_mode", "neighborhood"));
        spec.rank = get_or(j, "rank", 0);
        spec.constraint_tol = get_or(j, "tol", 1e-6);
        spec.seed = get_or<std::uint64_t>(j, "seed", 0);
        spec.polish = get_or(j, "polish", false);
        if (j.contains("output") && j.at("output").contains("csv"))
            spec.csv = resolve(j.at("output").at("csv").get<std::string>());
    } catch (const json::exception& e) {
        throw InputError(std::string("experiment spec: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("experiment spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open experiment spec: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("experiment spec " + path.string() + ": " + e.what());
    }
    return experiment_spec_from_json(j, path.parent_path());
}

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned workers) {
    spec.validate();
    const auto tasks = plan_instances(spec);
    std::vector<std::vector<ExperimentRow>> per_task(tasks.size());

    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) per_task[t] = run_instance(spec, tasks[t], t);
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(tasks.size())));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    ExperimentResult out;
    for (auto& rows : per_task)
        for (auto& r : rows) out.rows.push_back(std::move(r));
    std::sort(out.rows.begin(), out.rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
        return std::tie(a.instance_index, a.trial) < std::tie(b.instance_index, b.trial);
    });

    std::map<int, std::vector<const ExperimentRow*>> by_d;
    for (const auto& r : out.rows)
        if (r.error.empty()) by_d[r.d].push_back(&r);
    for (const auto& [d, rows] : by_d) {
        ExperimentSummary s;
        s.d = d;
        s.count = rows.size();
        std::vector<double> rr, fr;
        for (const auto* r : rows) {
            s.mean_gain += r->report.gain;
            s.mean_rho_window += r->report.rho_window_fraction;
            const double denom = r->report.sdp_value;
            rr.push_back(denom > 0.0 ? r->report.rounded_value / denom : 0.0);
            fr.push_back(denom > 0.0 ? r->report.flipped_value / denom : 0.0);
        }
        const auto count = static_cast<double>(rows.size());
        s.mean_gain /= count;
        s.mean_rho_window /= count;
        const auto mean_sd = [&](const std::vector<double>& v, double& mean, double& sd) {
            mean = 0.0;
            for (double x : v) mean += x;
            mean /= count;
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            sd = v.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
        };
        mean_sd(rr, s.rounded_ratio, s.rounded_ratio_sd);
        mean_sd(fr, s.flipped_ratio, s.flipped_ratio_sd);
        out.summaries.push_back(s);
    }
    return out;
}

void write_experiment_csv(const ExperimentResult& result, std::ostream& out) {
    out << "# " << kCsvFormat << " (gwflip " << kVersion << ", " << kGeneratorName << "); ratios are value / sdp_value\n";
    out << "kind,instance,n,d,trial,seed,sdp_value,rounded_value,flipped_value,gain,s_size,flip_count,"
           "rho_window_fraction,converged,rounded_ratio,flipped_ratio,rounded_ratio_sd,flipped_ratio_sd,count,error\n";
    for (const auto& r : result.rows) {
        if (!r.error.empty()) {
            out << "error," << csv_quote(r.instance) << ',' << r.n << ',' << r.d << ",,,,,,,,,,,,,,,," << csv_quote(r.error)
                << '\n';
            continue;
        }
        const auto& p = r.report;
        const double denom = p.sdp_value;
        out << "trial," << csv_quote(r.instance) << ',' << r.n << ',' << r.d << ',' << r.trial << ',' << p.rounding_seed
            << ',' << fmt(p.sdp_value) << ',' << fmt(p.rounded_value) << ',' << fmt(p.flipped_value) << ','
            << fmt(p.gain) << ',' << p.s_size << ',' << p.flip_count << ',' << fmt(p.rho_window_fraction) << ','
            << (p.converged ? 1 : 0) << ',' << fmt(denom > 0.0 ? p.rounded_value / denom : 0.0) << ','
            << fmt(denom > 0.0 ? p.flipped_value / denom : 0.0) << ",,,,\n";
    }
    for (const auto& s : result.summaries) {
        out << "summary,," << ',' << s.d << ",,,,,," << fmt(s.mean_gain) << ",,," << fmt(s.mean_rho_window) << ",,"
            << fmt(s.rounded_ratio) << ',' << fmt(s.flipped_ratio) << ',' << fmt(s.rounded_ratio_sd) << ','
            << fmt(s.flipped_ratio_sd) << ',' << s.count << ",\n";
    }
}

}  // namespace gwflip
