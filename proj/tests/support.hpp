#pragma once

// Shared generators and reference implementations for the tests. Nothing here
// calls into the code under test except the instance constructor.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gwflip/instance.hpp"
#include "gwflip/rng.hpp"

namespace testsupport {

using gwflip::Edge;
using gwflip::Max2LinInstance;
using gwflip::RandomStream;
using gwflip::VertexId;

/// G(n, p) with a degree cap, random signs with Pr[b = -1] = neg, and
/// weights uniform in [lo, hi] (unit when lo == hi == 1).
inline Max2LinInstance random_instance(RandomStream& rng, VertexId n, double p, int max_deg, double neg = 0.5,
                                       double lo = 1.0, double hi = 1.0) {
    std::vector<Edge> edges;
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (VertexId i = 0; i < n; ++i)
        for (VertexId j = i + 1; j < n; ++j) {
            if (!rng.bernoulli(p)) continue;
            if (deg[i] >= max_deg || deg[j] >= max_deg) continue;
            ++deg[i];
            ++deg[j];
            const int b = rng.bernoulli(neg) ? -1 : 1;
            const double w = lo == hi ? lo : rng.uniform(lo, hi);
            edges.push_back({i, j, b, w});
        }
    if (edges.empty() && n >= 2) edges.push_back({0, 1, -1, lo});
    return Max2LinInstance(n, std::move(edges));
}

inline std::vector<int> random_labels(RandomStream& rng, std::size_t n) {
    std::vector<int> x(n);
    for (auto& v : x) v = rng.bernoulli(0.5) ? 1 : -1;
    return x;
}

/// Straight from the definition: sum of w over edges with x_i x_j == b.
inline double naive_value(const Max2LinInstance& inst, const std::vector<int>& x) {
    double total = 0.0;
    for (const auto& e : inst.edges())
        if (x[static_cast<std::size_t>(e.i)] * x[static_cast<std::size_t>(e.j)] == e.sign) total += e.weight;
    return total;
}

/// All 2^n assignments, no symmetry reduction, no incremental updates.
inline double naive_opt(const Max2LinInstance& inst) {
    const auto n = static_cast<std::size_t>(inst.num_vertices());
    double best = 0.0;
    std::vector<int> x(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1 ? -1 : 1;
        best = std::max(best, naive_value(inst, x));
    }
    return best;
}

inline std::vector<VertexId> random_permutation(RandomStream& rng, VertexId n) {
    std::vector<VertexId> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    return p;
}

inline Max2LinInstance relabel(const Max2LinInstance& inst, const std::vector<VertexId>& perm) {
    std::vector<Edge> edges;
    for (const auto& e : inst.edges()) edges.push_back({perm[e.i], perm[e.j], e.sign, e.weight});
    return Max2LinInstance(inst.num_vertices(), std::move(edges));
}

inline Max2LinInstance triangle() { return Max2LinInstance(3, {{0, 1, -1, 1.0}, {0, 2, -1, 1.0}, {1, 2, -1, 1.0}}); }

inline Max2LinInstance cycle(VertexId n) {
    std::vector<Edge> edges;
    for (VertexId i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, -1, 1.0});
    return Max2LinInstance(n, std::move(edges));
}

}  // namespace testsupport
