#pragma once

// Low-rank solver for the Max-2LIN semidefinite relaxation strengthened with
// signed l2^2 triangle inequalities
//
//     maximize   sum_{ij in E} w_ij (1 + b_ij <v_i, v_j>) / 2
//     subject to |v_i| = 1,
//                |a_i v_i - a_j v_j|^2 + |a_j v_j - a_k v_k|^2 >= |a_i v_i - a_k v_k|^2
//
// The Gram matrix is factored as V V^T with V of shape n x r. Unit norms are
// kept exactly by retraction onto the product of spheres; triangle
// inequalities are handled with an augmented Lagrangian over a lazily grown
// working set.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gwflip/instance.hpp"

namespace gwflip {

enum class TriangleMode { none, neighborhood, all };

std::string_view to_string(TriangleMode mode);
TriangleMode triangle_mode_from_string(std::string_view text);

/// Unordered vertex triple, stored with i < j < k.
struct Triple {
    VertexId i;
    VertexId j;
    VertexId k;
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

using SignPattern = std::array<int, 3>;

template <class Scalar>
using EmbeddingMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row i holds v_i.
struct SdpEmbedding {
    EmbeddingMatrix<double> vectors;

    Eigen::Index num_vertices() const noexcept { return vectors.rows(); }
    Eigen::Index rank() const noexcept { return vectors.cols(); }
    double max_norm_error() const;
};

struct SdpConfig {
    int rank = 0;  // 0 selects default_rank(n)
    TriangleMode triangle_mode = TriangleMode::neighborhood;
    int max_outer_iterations = 60;
    int max_inner_iterations = 4000;
    double objective_tol = 1e-6;   // relative change between outer iterations
    double constraint_tol = 1e-6;  // absolute, in squared-norm units
    double penalty_growth = 4.0;
    double initial_penalty = 10.0;
    std::uint64_t seed = 0;

    void validate(VertexId n) const;
};

struct SdpOuterStep {
    double objective;
    double augmented;
    double max_violation;
    double penalty;
    std::size_t working_set;
};

struct SdpReport {
    double objective = 0.0;
    double max_violation = 0.0;
    int outer_iterations = 0;
    int inner_iterations = 0;
    bool converged = false;
    std::size_t working_set = 0;
    std::uint64_t seed = 0;
    std::vector<SdpOuterStep> history;
};

struct SdpResult {
    SdpEmbedding embedding;
    SdpReport report;
};

/// ceil(sqrt(2n)) + 1, capped at n.
int default_rank(VertexId n);

SdpResult solve_sdp(const Max2LinInstance& inst, const SdpConfig& cfg = {});

/// Unnormalized relaxation value sum_{ij} w_ij (1 + b_ij <v_i, v_j>) / 2.
template <class Derived>
typename Derived::Scalar sdp_objective(const Max2LinInstance& inst, const Eigen::MatrixBase<Derived>& vectors) {
    using Scalar = typename Derived::Scalar;
    if (vectors.rows() != inst.num_vertices()) throw std::invalid_argument("embedding rows do not match vertex count");
    Scalar total(0);
    for (const auto& e : inst.edges()) {
        const Scalar rho = vectors.row(e.i).dot(vectors.row(e.j));
        total += Scalar(e.weight) * (Scalar(1) + Scalar(e.sign) * rho) / Scalar(2);
    }
    return total;
}

inline double sdp_objective(const Max2LinInstance& inst, const SdpEmbedding& emb) {
    return sdp_objective(inst, emb.vectors);
}

/// mode=all: every 3-subset. mode=neighborhood: {i, j, k} with j, k in N(i),
/// deduplicated. mode=none: empty. Sorted.
std::vector<Triple> enumerate_triples(const Max2LinInstance& inst, TriangleMode mode);

/// Violation of |a_i v_i - a_j v_j|^2 + |a_j v_j - a_k v_k|^2 >= |a_i v_i - a_k v_k|^2
/// with j in the middle: max(0, rhs - lhs). Arguments are the three rows in
/// the order (i, j, k).
template <class Derived>
typename Derived::Scalar triangle_violation(const Eigen::MatrixBase<Derived>& vectors, VertexId i, VertexId j,
                                            VertexId k, const SignPattern& a) {
    using Scalar = typename Derived::Scalar;
    const auto vi = Scalar(a[0]) * vectors.row(i);
    const auto vj = Scalar(a[1]) * vectors.row(j);
    const auto vk = Scalar(a[2]) * vectors.row(k);
    const Scalar excess = (vi - vk).squaredNorm() - (vi - vj).squaredNorm() - (vj - vk).squaredNorm();
    return excess > Scalar(0) ? excess : Scalar(0);
}

inline double triangle_violation(const SdpEmbedding& emb, const Triple& t, const SignPattern& a) {
    return triangle_violation(emb.vectors, t.i, t.j, t.k, a);
}

/// Worst violation over the three choices of middle vertex and the four sign
/// classes (patterns are equivalent under global negation).
double max_triangle_violation(const SdpEmbedding& emb, const Triple& t);
double max_triangle_violation(const SdpEmbedding& emb, const std::vector<Triple>& triples);

/// Text dump: "n r" then n rows of r decimals.
std::string write_embedding(const SdpEmbedding& emb);
SdpEmbedding parse_embedding(std::string_view text);

}  // namespace gwflip
