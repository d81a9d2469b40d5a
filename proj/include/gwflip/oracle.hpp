#pragma once

// Exact Max-2LIN optimum by exhaustive enumeration, for small instances.

#include <cstdint>
#include <stdexcept>

#include "gwflip/instance.hpp"

namespace gwflip {

inline constexpr VertexId kDefaultOracleCap = 26;

class OracleRefused : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OracleResult {
    double opt = 0.0;
    Assignment argmax;
    std::uint64_t enumerated = 0;  // 2^(n-1) sign classes
};

/// Enumerates assignments with x_0 = +1 in Gray-code order. Values are tracked
/// incrementally; any assignment that comes within rounding distance of the
/// best is re-evaluated from scratch, so `opt` equals evaluate(argmax) exactly.
/// Throws OracleRefused when n exceeds `cap`.
OracleResult brute_force_opt(const Max2LinInstance& inst, VertexId cap = kDefaultOracleCap);

/// value / opt. Throws std::domain_error when opt is 0.
double ratio(const OracleResult& oracle, double value);
double ratio(const Max2LinInstance& inst, double value, VertexId cap = kDefaultOracleCap);

}  // namespace gwflip
