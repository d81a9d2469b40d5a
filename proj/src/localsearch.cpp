#include "gwflip/localsearch.hpp"

#include <cmath>
#include <stdexcept>

#include "gwflip/numerics.hpp"
#include "gwflip/rng.hpp"

namespace gwflip {

Epsilon default_epsilon(int degree, double constant) {
    if (degree < 1) throw std::invalid_argument("epsilon: degree must be >= 1");
    if (!(constant > 0.0)) throw std::invalid_argument("epsilon: constant must be > 0");
    const double d = std::max(degree, 2);
    return {1.0 / (constant * d * std::sqrt(std::log(d))), constant, degree};
}

std::size_t CandidateAnalysis::flip_count() const {
    std::size_t n = 0;
    for (const auto& c : candidates) n += c.flip ? 1 : 0;
    return n;
}

double CandidateAnalysis::guaranteed_gain() const {
    double total = 0.0;
    for (const auto& c : candidates)
        if (c.flip) total += c.violated_weight - c.other_weight;
    return total;
}

CandidateAnalysis analyze_candidates(const Max2LinInstance& inst, const Eigen::VectorXd& projections,
                                     const Assignment& x, double eps) {
    const auto n = static_cast<Eigen::Index>(inst.num_vertices());
    if (projections.size() != n || x.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("candidate analysis: dimension mismatch");
    if (!(eps > 0.0)) throw std::invalid_argument("candidate analysis: epsilon must be > 0");

    const auto in_band = [&](VertexId v) { return std::abs(projections(v)) < eps; };
    CandidateAnalysis out;
    out.epsilon = eps;
    for (VertexId i = 0; i < n; ++i) {
        if (!in_band(i)) continue;
        CandidateInfo info;
        info.vertex = i;
        const int xi = x[static_cast<std::size_t>(i)];
        for (const auto& nb : inst.neighbors(i)) {
            info.incident_weight += nb.weight;
            if (in_band(nb.vertex)) {
                info.in_band.push_back(nb.vertex);
                info.other_weight += nb.weight;
            } else if (nb.sign * xi * projections(nb.vertex) <= -eps) {
                info.violated.push_back(nb.vertex);
                info.violated_weight += nb.weight;
            } else {
                info.satisfied.push_back(nb.vertex);
                info.other_weight += nb.weight;
            }
        }
        info.local_gain = std::max(0.0, 2.0 * info.violated_weight - info.incident_weight);
        info.flip = info.violated_weight > info.other_weight;
        out.candidates.push_back(std::move(info));
    }
    return out;
}

CandidateAnalysis analyze_candidates(const Max2LinInstance& inst, const SdpEmbedding& emb, const GaussianSample& g,
                                     const Assignment& x, const Epsilon& eps) {
    if (emb.num_vertices() != inst.num_vertices()) throw std::invalid_argument("embedding does not match instance");
    return analyze_candidates(inst, project(emb, g), x, eps.value);
}

FlipOutcome apply_flips(const Max2LinInstance& inst, const Assignment& x, const CandidateAnalysis& analysis) {
    FlipOutcome out{x, 0.0};
    for (const auto& c : analysis.candidates)
        if (c.flip) out.x.flip(static_cast<std::size_t>(c.vertex));
    out.gain = evaluate(inst, out.x) - evaluate(inst, x);
    return out;
}

Assignment greedy_polish(const Max2LinInstance& inst, Assignment x) {
    bool improved = true;
    while (improved) {
        improved = false;
        for (VertexId i = 0; i < inst.num_vertices(); ++i) {
            double delta = 0.0;
            const int xi = x[static_cast<std::size_t>(i)];
            for (const auto& nb : inst.neighbors(i))
                delta += (xi * x[static_cast<std::size_t>(nb.vertex)] == nb.sign) ? -nb.weight : nb.weight;
            if (delta > 0.0) {
                x.flip(static_cast<std::size_t>(i));
                improved = true;
            }
        }
    }
    return x;
}

double rho_window_fraction(const Max2LinInstance& inst, const SdpEmbedding& emb, double half_width) {
    if (inst.total_weight() <= 0.0) return 0.0;
    const double center = rho_star<double>();
    double inside = 0.0;
    for (const auto& e : inst.edges()) {
        const double r = e.sign * emb.vectors.row(e.i).dot(emb.vectors.row(e.j));
        if (r >= center - half_width && r <= center + half_width) inside += e.weight;
    }
    return inside / inst.total_weight();
}

RunOutcome run_once(const Max2LinInstance& inst, const SdpResult& sdp, std::uint64_t rounding_seed, const Epsilon& eps,
                    const RunOptions& opts) {
    const auto& emb = sdp.embedding;
    if (emb.num_vertices() != inst.num_vertices()) throw std::invalid_argument("embedding does not match instance");
    const auto g = sample_gaussian(emb.rank(), rounding_seed);
    const Eigen::VectorXd proj = project(emb, g);
    Assignment rounded = hyperplane_round(emb, g);
    const auto analysis = analyze_candidates(inst, proj, rounded, eps.value);
    auto flipped = apply_flips(inst, rounded, analysis);

    RunReport r;
    r.sdp_value = sdp_objective(inst, emb);
    r.rounded_value = evaluate(inst, rounded);
    r.flipped_value = evaluate(inst, flipped.x);
    r.gain = r.flipped_value - r.rounded_value;
    r.guaranteed_gain = analysis.guaranteed_gain();
    r.s_size = analysis.candidates.size();
    r.flip_count = analysis.flip_count();
    r.rho_window_fraction = rho_window_fraction(inst, emb);
    r.sdp_seed = sdp.report.seed;
    r.rounding_seed = rounding_seed;
    r.converged = sdp.report.converged;
    r.epsilon = eps.value;
    r.generator = std::string(kGeneratorName);
    if (opts.polish) {
        r.polished = true;
        r.polished_value = evaluate(inst, greedy_polish(inst, flipped.x));
    }
    return {std::move(r), std::move(rounded), std::move(flipped.x)};
}

RunOutcome run_once(const Max2LinInstance& inst, const SdpConfig& cfg, std::uint64_t rounding_seed, const Epsilon& eps,
                    const RunOptions& opts) {
    return run_once(inst, solve_sdp(inst, cfg), rounding_seed, eps, opts);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t k) {
    return derive_seed(base_seed, 0x747269616cULL, k);
}

BestOf best_of(const Max2LinInstance& inst, const SdpResult& sdp, std::size_t trials, std::uint64_t base_seed,
               const Epsilon& eps, const RunOptions& opts) {
    if (trials < 1) throw std::invalid_argument("best_of needs at least one trial");
    BestOf out;
    out.reports.reserve(trials);
    for (std::size_t k = 0; k < trials; ++k) {
        auto run = run_once(inst, sdp, trial_seed(base_seed, k), eps, opts);
        Assignment candidate = opts.polish ? greedy_polish(inst, run.flipped) : std::move(run.flipped);
        const double value = opts.polish ? run.report.polished_value : run.report.flipped_value;
        if (k == 0 || value > out.best_value) {
            out.best_value = value;
            out.best = std::move(candidate);
            out.best_trial = k;
        }
        out.reports.push_back(std::move(run.report));
    }
    return out;
}

}  // namespace gwflip
