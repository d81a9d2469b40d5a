#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>

#include "gwflip/sdp.hpp"
#include "support.hpp"

using namespace gwflip;

namespace {

// Grid search over 3x3 correlation matrices for the all-cut triangle. The
// triangle inequalities are checked in the squared-distance form
// |a_i v_i - a_j v_j|^2 = 2 - 2 a_i a_j rho_ij, all 8 sign vectors and all 3
// middle vertices.
struct GridMax {
    double plain;
    double with_triangles;
};

GridMax k3_grid(int steps) {
    GridMax out{-1.0, -1.0};
    const double h = 2.0 / steps;
    for (int x = 0; x <= steps; ++x)
        for (int y = 0; y <= steps; ++y)
            for (int z = 0; z <= steps; ++z) {
                const double r01 = -1.0 + x * h, r02 = -1.0 + y * h, r12 = -1.0 + z * h;
                const double det = 1.0 + 2.0 * r01 * r02 * r12 - r01 * r01 - r02 * r02 - r12 * r12;
                if (det < -1e-12) continue;
                const double value = 1.5 - 0.5 * (r01 + r02 + r12);
                out.plain = std::max(out.plain, value);
                const double rho[3][3] = {{1, r01, r02}, {r01, 1, r12}, {r02, r12, 1}};
                bool ok = true;
                for (int a = 0; a < 8 && ok; ++a) {
                    const int s[3] = {a & 1 ? -1 : 1, a & 2 ? -1 : 1, a & 4 ? -1 : 1};
                    const auto dist = [&](int i, int j) { return 2.0 - 2.0 * s[i] * s[j] * rho[i][j]; };
                    for (int mid = 0; mid < 3 && ok; ++mid) {
                        const int i = (mid + 1) % 3, k = (mid + 2) % 3;
                        ok = dist(i, mid) + dist(mid, k) >= dist(i, k) - 1e-12;
                    }
                }
                if (ok) out.with_triangles = std::max(out.with_triangles, value);
            }
    return out;
}

SdpConfig mode(TriangleMode m, std::uint64_t seed = 0) {
    SdpConfig c;
    c.triangle_mode = m;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("single edge anchors") {
    for (int b : {-1, 1}) {
        const Max2LinInstance inst(2, {{0, 1, b, 1.0}});
        for (auto m : {TriangleMode::none, TriangleMode::neighborhood, TriangleMode::all}) {
            const auto res = solve_sdp(inst, mode(m));
            CHECK(res.report.converged);
            CHECK(std::abs(res.report.objective - 1.0) <= 1e-6);
        }
    }
}

TEST_CASE("K3 anchors agree with the grid oracle and the eigenvalue bound") {
    const auto grid = k3_grid(200);
    CHECK(grid.plain == doctest::Approx(2.25).epsilon(1e-3));
    CHECK(grid.with_triangles == doctest::Approx(2.0).epsilon(1e-9));

    // Max-Cut SDP <= (n / 4) lambda_max(L); for K3, L has lambda_max = 3.
    Eigen::Matrix3d lap = -Eigen::Matrix3d::Ones();
    lap.diagonal().setConstant(2.0);
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(lap).eigenvalues().maxCoeff();
    CHECK(0.75 * lmax == doctest::Approx(2.25));

    const auto tri = testsupport::triangle();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto none = solve_sdp(tri, mode(TriangleMode::none, seed));
        CHECK(std::abs(none.report.objective - 2.25) <= 1e-4);
        CHECK(none.report.objective <= 0.75 * lmax + 1e-9);
        const auto all = solve_sdp(tri, mode(TriangleMode::all, seed));
        CHECK(all.report.converged);
        CHECK(std::abs(all.report.objective - 2.0) <= 1e-4);
        const auto nb = solve_sdp(tri, mode(TriangleMode::neighborhood, seed));
        CHECK(std::abs(nb.report.objective - 2.0) <= 1e-4);
    }
}

TEST_CASE("sdp_objective examples") {
    const Max2LinInstance plus(2, {{0, 1, 1, 3.0}});
    const Max2LinInstance minus(2, {{0, 1, -1, 1.0}});
    const Max2LinInstance unit_plus(2, {{0, 1, 1, 1.0}});
    EmbeddingMatrix<double> same(2, 2), orth(2, 2), anti(2, 2);
    same << 1, 0, 1, 0;
    orth << 1, 0, 0, 1;
    anti << 1, 0, -1, 0;
    CHECK(sdp_objective(plus, same) == 3.0);
    CHECK(sdp_objective(minus, orth) == 0.5);
    CHECK(sdp_objective(unit_plus, anti) == 0.0);
    CHECK_THROWS(sdp_objective(testsupport::triangle(), same));
}

TEST_CASE("enumerate_triples") {
    CHECK(enumerate_triples(testsupport::triangle(), TriangleMode::all).size() == 1);
    const Max2LinInstance star(4, {{0, 1, -1, 1}, {0, 2, -1, 1}, {0, 3, -1, 1}});
    CHECK(enumerate_triples(star, TriangleMode::neighborhood).size() == 3);
    const Max2LinInstance path(3, {{0, 1, -1, 1}, {1, 2, -1, 1}});
    const auto p = enumerate_triples(path, TriangleMode::neighborhood);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == Triple{0, 1, 2});
    CHECK(enumerate_triples(path, TriangleMode::none).empty());
    // triangle: three centers produce the same set once
    CHECK(enumerate_triples(testsupport::triangle(), TriangleMode::neighborhood).size() == 1);

    RandomStream rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto n = static_cast<VertexId>(3 + rng.below(15));
        const auto inst = testsupport::random_instance(rng, n, 0.4, 6);
        CHECK(enumerate_triples(inst, TriangleMode::all).size() == static_cast<std::size_t>(n * (n - 1) * (n - 2) / 6));
        const auto nb = enumerate_triples(inst, TriangleMode::neighborhood);
        CHECK(std::is_sorted(nb.begin(), nb.end()));
        CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
        // every triple has a center adjacent to the other two
        for (const auto& tr : nb) {
            const auto adj = [&](VertexId a, VertexId b) {
                for (const auto& x : inst.neighbors(a))
                    if (x.vertex == b) return true;
                return false;
            };
            const bool centered = (adj(tr.i, tr.j) && adj(tr.i, tr.k)) || (adj(tr.j, tr.i) && adj(tr.j, tr.k)) ||
                                  (adj(tr.k, tr.i) && adj(tr.k, tr.j));
            CHECK(centered);
        }
    }
}

TEST_CASE("integral embeddings satisfy every signed triangle inequality") {
    RandomStream rng(17);
    const VertexId n = 8;
    const auto inst = testsupport::random_instance(rng, n, 0.5, 7);
    const auto triples = enumerate_triples(inst, TriangleMode::all);
    for (int t = 0; t < 100; ++t) {
        SdpEmbedding emb{EmbeddingMatrix<double>(n, 1)};
        for (VertexId i = 0; i < n; ++i) emb.vectors(i, 0) = rng.bernoulli(0.5) ? 1.0 : -1.0;
        CHECK(max_triangle_violation(emb, triples) == 0.0);
    }
}

TEST_CASE("triangle_violation against direct distances") {
    EmbeddingMatrix<double> v(3, 2);
    v << 1, 0, -0.5, std::sqrt(3.0) / 2, -0.5, -std::sqrt(3.0) / 2;  // 120 degrees apart
    const SdpEmbedding emb{v};
    // (1, -1, 1): |v0 - v2|^2 = 3 vs |v0 + v1|^2 + |v1 + v2|^2 = 1 + 1
    CHECK(triangle_violation(emb, {0, 1, 2}, {1, -1, 1}) == doctest::Approx(1.0));
    CHECK(triangle_violation(emb, {0, 1, 2}, {1, 1, 1}) == 0.0);
    CHECK(max_triangle_violation(emb, Triple{0, 1, 2}) == doctest::Approx(1.0));
}

TEST_CASE("solver invariants on random instances") {
    RandomStream rng(99);
    for (int t = 0; t < 25; ++t) {
        const auto n = static_cast<VertexId>(4 + rng.below(12));
        const auto inst = testsupport::random_instance(rng, n, 0.4, 6, 0.6, 0.2, 3.0);
        const auto m = t % 3 == 0 ? TriangleMode::all : TriangleMode::neighborhood;
        const auto res = solve_sdp(inst, mode(m, static_cast<std::uint64_t>(t)));
        CHECK(res.embedding.max_norm_error() <= 1e-8);
        CHECK(res.embedding.rank() == default_rank(n));
        CHECK(res.report.objective <= inst.total_weight() + 1e-6);
        CHECK(res.report.objective >= 0.0);
        CHECK(res.report.max_violation >= 0.0);
        // relaxation dominance against the exhaustive optimum
        CHECK(res.report.objective >= testsupport::naive_opt(inst) - 1e-4);
        if (res.report.converged) {
            CHECK(max_triangle_violation(res.embedding, enumerate_triples(inst, m)) <= 1e-6);
        }
        for (const auto& h : res.report.history) {
            CHECK(std::isfinite(h.augmented));
            CHECK(h.objective <= inst.total_weight() + 1e-6);
        }
    }
}

TEST_CASE("all-mode violation bound on a converged run") {
    const auto inst = gen_random_regular(16, 3, 0.5, WeightLaw::uniform(0.5, 2.0), 4);
    const auto res = solve_sdp(inst, mode(TriangleMode::all, 3));
    REQUIRE(res.report.converged);
    CHECK(max_triangle_violation(res.embedding, enumerate_triples(inst, TriangleMode::all)) <= 1e-6);
    // the final outer iterations do not move the augmented value by more than the tolerance scale
    const auto& h = res.report.history;
    REQUIRE(h.size() >= 2);
    CHECK(std::abs(h.back().augmented - h[h.size() - 2].augmented) <= 1e-4 * inst.total_weight());
}

TEST_CASE("determinism and rank") {
    const auto inst = gen_random_regular(20, 3, 1.0, WeightLaw::unit(), 1);
    const auto a = solve_sdp(inst, mode(TriangleMode::neighborhood, 8));
    const auto b = solve_sdp(inst, mode(TriangleMode::neighborhood, 8));
    CHECK(a.embedding.vectors == b.embedding.vectors);
    CHECK(a.report.objective == b.report.objective);

    CHECK(default_rank(1) == 1);
    CHECK(default_rank(3) == 3);
    CHECK(default_rank(200) == 21);
    SdpConfig c;
    c.rank = 2;
    CHECK(solve_sdp(inst, c).embedding.rank() == 2);
    c.rank = 21;
    CHECK_THROWS(solve_sdp(inst, c));
    c.rank = 0;
    c.constraint_tol = 0.0;
    CHECK_THROWS(solve_sdp(inst, c));
}

TEST_CASE("embedding text round trip") {
    const auto res = solve_sdp(testsupport::cycle(7), {});
    const auto back = parse_embedding(write_embedding(res.embedding));
    CHECK(back.vectors == res.embedding.vectors);
    CHECK_THROWS(parse_embedding("2 2\n1 0\n"));
}

TEST_CASE("triangle mode names") {
    for (auto m : {TriangleMode::none, TriangleMode::neighborhood, TriangleMode::all})
        CHECK(triangle_mode_from_string(to_string(m)) == m);
    CHECK_THROWS(triangle_mode_from_string("some"));
}
