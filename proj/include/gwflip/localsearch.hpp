#pragma once

// Candidate-set local improvement on top of hyperplane rounding.
//
// After rounding, vertices whose projection falls in the band (-eps, eps) are
// candidates. For a candidate i, its neighbors split into
//   A_i: neighbors that are themselves candidates,
//   B_i: neighbors whose constraint with i is violated with margin eps,
//   C_i: neighbors whose constraint with i is satisfied with margin eps,
// and i is flipped when the B-weight strictly exceeds the A+C weight. B and C
// neighbors are never candidates, so each flip gains at least
// w(B_i) - w(A_i) - w(C_i) regardless of the other flips.

#include <cstdint>
#include <string>
#include <vector>

#include "gwflip/instance.hpp"
#include "gwflip/rounding.hpp"
#include "gwflip/sdp.hpp"

namespace gwflip {

struct Epsilon {
    double value;
    double constant;  // C
    int degree;       // d as given; the formula uses max(d, 2)
};

/// eps = 1 / (C d' sqrt(ln d')) with d' = max(d, 2).
Epsilon default_epsilon(int degree, double constant = 2.0);

struct CandidateInfo {
    VertexId vertex;
    std::vector<VertexId> in_band;    // A_i
    std::vector<VertexId> violated;   // B_i
    std::vector<VertexId> satisfied;  // C_i
    double incident_weight = 0.0;     // W_i
    double violated_weight = 0.0;     // w(B_i)
    double other_weight = 0.0;        // w(A_i) + w(C_i)
    double local_gain = 0.0;          // (2 w(B_i) - W_i)_+
    bool flip = false;
};

struct CandidateAnalysis {
    double epsilon = 0.0;
    std::vector<CandidateInfo> candidates;  // sorted by vertex

    std::size_t flip_count() const;
    /// Sum over flipped candidates of w(B_i) - w(A_i) - w(C_i).
    double guaranteed_gain() const;
};

/// `x` must be the rounding of `emb` by `g`; it is passed in so tests can
/// construct configurations directly.
CandidateAnalysis analyze_candidates(const Max2LinInstance& inst, const SdpEmbedding& emb, const GaussianSample& g,
                                     const Assignment& x, const Epsilon& eps);

/// Same analysis from precomputed projections <g, v_i>.
CandidateAnalysis analyze_candidates(const Max2LinInstance& inst, const Eigen::VectorXd& projections,
                                     const Assignment& x, double eps);

struct FlipOutcome {
    Assignment x;
    double gain = 0.0;  // evaluate(x') - evaluate(x)
};

FlipOutcome apply_flips(const Max2LinInstance& inst, const Assignment& x, const CandidateAnalysis& analysis);

/// Plain 1-opt: flip any vertex with a strictly positive gain until none is
/// left. Not part of the measured algorithm; reported separately.
Assignment greedy_polish(const Max2LinInstance& inst, Assignment x);

/// Weighted fraction of edges with b_ij <v_i, v_j> within `half_width` of rho*.
double rho_window_fraction(const Max2LinInstance& inst, const SdpEmbedding& emb, double half_width = 0.01);

struct RunReport {
    double sdp_value = 0.0;
    double rounded_value = 0.0;
    double flipped_value = 0.0;
    double gain = 0.0;
    double guaranteed_gain = 0.0;
    std::size_t s_size = 0;
    std::size_t flip_count = 0;
    double rho_window_fraction = 0.0;
    std::uint64_t sdp_seed = 0;
    std::uint64_t rounding_seed = 0;
    bool converged = false;
    double epsilon = 0.0;
    bool polished = false;
    double polished_value = 0.0;
    std::string generator;
};

struct RunOutcome {
    RunReport report;
    Assignment rounded;
    Assignment flipped;
};

struct RunOptions {
    bool polish = false;
};

RunOutcome run_once(const Max2LinInstance& inst, const SdpResult& sdp, std::uint64_t rounding_seed, const Epsilon& eps,
                    const RunOptions& opts = {});

/// Solves the relaxation first.
RunOutcome run_once(const Max2LinInstance& inst, const SdpConfig& cfg, std::uint64_t rounding_seed, const Epsilon& eps,
                    const RunOptions& opts = {});

/// Rounding seed of trial `k` under `base_seed`. Trial seeds form a fixed
/// stream, so the first t trials of a longer run are exactly a t-trial run.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t k);

struct BestOf {
    Assignment best;
    double best_value = 0.0;
    std::size_t best_trial = 0;
    std::vector<RunReport> reports;
};

BestOf best_of(const Max2LinInstance& inst, const SdpResult& sdp, std::size_t trials, std::uint64_t base_seed,
               const Epsilon& eps, const RunOptions& opts = {});

}  // namespace gwflip
