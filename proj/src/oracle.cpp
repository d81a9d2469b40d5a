#include "gwflip/oracle.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <vector>

namespace gwflip {

OracleResult brute_force_opt(const Max2LinInstance& inst, VertexId cap) {
    const VertexId n = inst.num_vertices();
    if (cap > 62) throw std::invalid_argument("oracle cap must be <= 62");
    if (n > cap)
        throw OracleRefused("oracle refuses n = " + std::to_string(n) + " (cap " + std::to_string(cap) +
                            "); exhaustive search would need 2^" + std::to_string(n - 1) + " evaluations");
    if (n <= 1) {
        Assignment x = Assignment::all_positive(n);
        return {evaluate(inst, x), std::move(x), 1};
    }

    std::vector<int> x(static_cast<std::size_t>(n), 1);
    double current = evaluate(inst, Assignment(x));
    OracleResult best{current, Assignment(x), 0};
    // Incremental drift stays far below this for any sane weight range.
    const double slack = 1e-9 * std::max(1.0, inst.total_weight());

    const std::uint64_t count = std::uint64_t{1} << (n - 1);
    for (std::uint64_t k = 1; k < count; ++k) {
        const auto v = static_cast<VertexId>(std::countr_zero(k) + 1);
        const int xv = x[static_cast<std::size_t>(v)];
        for (const auto& nb : inst.neighbors(v))
            current += (xv * x[static_cast<std::size_t>(nb.vertex)] == nb.sign) ? -nb.weight : nb.weight;
        x[static_cast<std::size_t>(v)] = -xv;
        if (current > best.opt - slack) {
            Assignment candidate(x);
            const double exact = evaluate(inst, candidate);
            current = exact;
            if (exact > best.opt) {
                best.opt = exact;
                best.argmax = std::move(candidate);
            }
        }
    }
    best.enumerated = count;
    return best;
}

double ratio(const OracleResult& oracle, double value) {
    if (!(oracle.opt > 0.0)) throw std::domain_error("ratio undefined: optimum is 0");
    return value / oracle.opt;
}

double ratio(const Max2LinInstance& inst, double value, VertexId cap) {
    return ratio(brute_force_opt(inst, cap), value);
}

}  // namespace gwflip
