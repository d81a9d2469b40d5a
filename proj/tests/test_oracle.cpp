#include "doctest.h"

#include "gwflip/oracle.hpp"
#include "support.hpp"

using namespace gwflip;

TEST_CASE("oracle examples") {
    const Max2LinInstance edge(2, {{0, 1, -1, 1.0}});
    CHECK(brute_force_opt(edge).opt == 1.0);
    const auto tri = brute_force_opt(testsupport::triangle());
    CHECK(tri.opt == 2.0);
    CHECK(tri.enumerated == 4);
    CHECK(tri.argmax[0] == 1);
    CHECK(evaluate(testsupport::triangle(), tri.argmax) == 2.0);
    CHECK(brute_force_opt(testsupport::cycle(5)).opt == 4.0);
    CHECK(brute_force_opt(testsupport::cycle(6)).opt == 6.0);
}

TEST_CASE("oracle refuses above the cap") {
    const auto big = testsupport::cycle(30);
    CHECK_THROWS_AS(brute_force_opt(big), OracleRefused);
    CHECK_THROWS_WITH_AS(brute_force_opt(testsupport::cycle(12), 10), doctest::Contains("cap 10"), OracleRefused);
    CHECK(brute_force_opt(testsupport::cycle(12), 12).opt == 12.0);
}

TEST_CASE("ratio") {
    const auto tri = testsupport::triangle();
    CHECK(ratio(tri, 2.0) == 1.0);
    CHECK(ratio(tri, 1.0) == 0.5);
    const auto res = brute_force_opt(testsupport::cycle(5));
    CHECK(ratio(res, res.opt) == 1.0);
    OracleResult zero;
    CHECK_THROWS_AS(ratio(zero, 1.0), std::domain_error);
}

TEST_CASE("oracle agrees with naive enumeration for n <= 12") {
    RandomStream rng(123);
    for (int t = 0; t < 300; ++t) {
        const auto n = static_cast<VertexId>(2 + rng.below(11));
        const bool unit = t % 2 == 0;
        const auto inst = testsupport::random_instance(rng, n, 0.5, 11, 0.5, unit ? 1.0 : 0.01, unit ? 1.0 : 10.0);
        const auto res = brute_force_opt(inst);
        CHECK(res.opt == testsupport::naive_opt(inst));
        CHECK(evaluate(inst, res.argmax) == res.opt);
        CHECK(res.argmax[0] == 1);
        CHECK(res.enumerated == (std::uint64_t{1} << (n - 1)));
    }
}

TEST_CASE("oracle is invariant under relabeling") {
    RandomStream rng(321);
    for (int t = 0; t < 100; ++t) {
        const auto n = static_cast<VertexId>(3 + rng.below(12));
        const auto inst = testsupport::random_instance(rng, n, 0.4, 8, 0.5, 0.5, 3.0);
        const auto perm = testsupport::random_permutation(rng, n);
        const double a = brute_force_opt(inst).opt;
        const double b = brute_force_opt(testsupport::relabel(inst, perm)).opt;
        CHECK(a == doctest::Approx(b).epsilon(1e-14));
    }
}

TEST_CASE("trivial sizes") {
    const Max2LinInstance lone(1, {});
    CHECK(brute_force_opt(lone).opt == 0.0);
    CHECK(brute_force_opt(lone).enumerated == 1);
}
