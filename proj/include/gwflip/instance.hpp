#pragma once

// Weighted Max-2LIN instances: constraints x_i * x_j = b_ij over +-1 labels.
// Max-Cut is the special case where every sign is -1.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gwflip {

using VertexId = std::int32_t;

struct Edge {
    VertexId i;
    VertexId j;
    int sign;  // b_ij, -1 or +1
    double weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    VertexId vertex;
    int sign;
    double weight;
};

class InstanceError : public std::runtime_error {
public:
    InstanceError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Immutable after construction. The constructor validates every invariant
/// (0 <= i < j < n, no duplicate pairs, finite positive weights, signs +-1).
class Max2LinInstance {
public:
    Max2LinInstance(VertexId n, std::vector<Edge> edges);

    VertexId num_vertices() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<Neighbor>& neighbors(VertexId v) const { return adjacency_.at(static_cast<std::size_t>(v)); }
    int max_degree() const noexcept { return max_degree_; }
    double total_weight() const noexcept { return total_weight_; }
    /// W_v: total weight of edges incident to v.
    double incident_weight(VertexId v) const { return incident_weight_.at(static_cast<std::size_t>(v)); }

    friend bool operator==(const Max2LinInstance& a, const Max2LinInstance& b) {
        return a.n_ == b.n_ && a.edges_ == b.edges_;
    }

private:
    VertexId n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<double> incident_weight_;
    int max_degree_ = 0;
    double total_weight_ = 0.0;
};

/// +-1 label per vertex.
class Assignment {
public:
    Assignment() = default;
    explicit Assignment(std::vector<int> labels);
    static Assignment all_positive(VertexId n) { return Assignment(std::vector<int>(static_cast<std::size_t>(n), 1)); }

    std::size_t size() const noexcept { return x_.size(); }
    int operator[](std::size_t i) const { return x_[i]; }
    void flip(std::size_t i) { x_[i] = -x_[i]; }
    const std::vector<int>& labels() const noexcept { return x_; }
    Assignment negated() const;

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<int> x_;
};

/// Parses the text format: first line "n m", then m lines "i j b w".
/// Lines starting with '#' (after optional whitespace) and blank lines are ignored.
Max2LinInstance parse_instance(std::string_view text);
Max2LinInstance read_instance_file(const std::string& path);

/// Inverse of parse_instance; weights use the shortest round-trip decimal.
std::string write_instance(const Max2LinInstance& inst);

struct WeightLaw {
    enum class Kind { unit, uniform } kind = Kind::unit;
    double lo = 1.0;
    double hi = 1.0;

    static WeightLaw unit() { return {}; }
    static WeightLaw uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
};

/// Simple d-regular graph from the configuration (pairing) model. Pairs that
/// would create a self-loop or a repeated edge are rejected one at a time and
/// redrawn; a dead end restarts the whole pairing. Signs are -1 with
/// probability `sign_bias`.
Max2LinInstance gen_random_regular(VertexId n, int d, double sign_bias, WeightLaw weights, std::uint64_t seed,
                                   int max_restarts = 1000);

/// Total weight of satisfied constraints, sum of w_ij * [x_i x_j == b_ij].
double evaluate(const Max2LinInstance& inst, const Assignment& x);

/// Total weight of violated constraints.
double violated_weight(const Max2LinInstance& inst, const Assignment& x);

}  // namespace gwflip
