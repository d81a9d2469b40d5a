#include "gwflip/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "gwflip/rng.hpp"

namespace gwflip {

namespace {

std::uint64_t pair_key(VertexId a, VertexId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto start = s.find_first_not_of(" \t", pos);
        if (start == std::string_view::npos) break;
        auto end = s.find_first_of(" \t", start);
        if (end == std::string_view::npos) end = s.size();
        out.push_back(s.substr(start, end - start));
        pos = end;
    }
    return out;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

}  // namespace

Max2LinInstance::Max2LinInstance(VertexId n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ < 0) throw InstanceError("vertex count must be non-negative");
    adjacency_.resize(static_cast<std::size_t>(n_));
    incident_weight_.assign(static_cast<std::size_t>(n_), 0.0);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges_.size() * 2);
    for (auto& e : edges_) {
        if (e.i < 0 || e.j < 0 || e.i >= n_ || e.j >= n_)
            throw InstanceError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ") out of range");
        if (e.i == e.j) throw InstanceError("self-loop at vertex " + std::to_string(e.i));
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.sign != 1 && e.sign != -1) throw InstanceError("sign must be -1 or 1");
        if (!std::isfinite(e.weight) || !(e.weight > 0.0)) throw InstanceError("weight must be finite and > 0");
        if (!seen.insert(pair_key(e.i, e.j)).second)
            throw InstanceError("duplicate edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
        adjacency_[static_cast<std::size_t>(e.i)].push_back({e.j, e.sign, e.weight});
        adjacency_[static_cast<std::size_t>(e.j)].push_back({e.i, e.sign, e.weight});
        incident_weight_[static_cast<std::size_t>(e.i)] += e.weight;
        incident_weight_[static_cast<std::size_t>(e.j)] += e.weight;
        total_weight_ += e.weight;
    }
    for (const auto& adj : adjacency_) max_degree_ = std::max(max_degree_, static_cast<int>(adj.size()));
}

Assignment::Assignment(std::vector<int> labels) : x_(std::move(labels)) {
    for (int v : x_)
        if (v != 1 && v != -1) throw std::invalid_argument("assignment entries must be +-1");
}

Assignment Assignment::negated() const {
    Assignment out = *this;
    for (auto& v : out.x_) v = -v;
    return out;
}

Max2LinInstance parse_instance(std::string_view text) {
    bool have_header = false;
    long long n = 0;
    long long m = 0;
    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const auto line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto tok = split_ws(line);
        if (!have_header) {
            if (tok.size() != 2 || !parse_number(tok[0], n) || !parse_number(tok[1], m) || n < 0 || m < 0)
                throw InstanceError("malformed header, expected \"n m\"", line_no);
            if (n > std::numeric_limits<VertexId>::max()) throw InstanceError("vertex count too large", line_no);
            have_header = true;
            edges.reserve(static_cast<std::size_t>(std::min<long long>(m, 1 << 24)));
            continue;
        }
        if (static_cast<long long>(edges.size()) >= m) throw InstanceError("more edge lines than declared", line_no);
        long long i = 0;
        long long j = 0;
        int b = 0;
        double w = 0.0;
        if (tok.size() != 4 || !parse_number(tok[0], i) || !parse_number(tok[1], j) || !parse_number(tok[2], b) ||
            !parse_number(tok[3], w))
            throw InstanceError("malformed edge line, expected \"i j b w\"", line_no);
        if (i < 0 || j < 0 || i >= n || j >= n) throw InstanceError("vertex index out of range", line_no);
        if (i == j) throw InstanceError("self-loop", line_no);
        if (b != 1 && b != -1) throw InstanceError("sign must be -1 or 1", line_no);
        if (!std::isfinite(w) || !(w > 0.0)) throw InstanceError("weight must be > 0", line_no);
        edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>(j), b, w});
        if (!seen.insert(pair_key(edges.back().i, edges.back().j)).second)
            throw InstanceError("duplicate edge", line_no);
    }
    if (!have_header) throw InstanceError("empty instance: missing header");
    if (static_cast<long long>(edges.size()) != m)
        throw InstanceError("expected " + std::to_string(m) + " edges, found " + std::to_string(edges.size()),
                            line_no);
    return Max2LinInstance(static_cast<VertexId>(n), std::move(edges));
}

Max2LinInstance read_instance_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InstanceError("cannot open instance file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance(buf.str());
}

std::string write_instance(const Max2LinInstance& inst) {
    std::string out = std::to_string(inst.num_vertices()) + " " + std::to_string(inst.num_edges()) + "\n";
    char buf[64];
    for (const auto& e : inst.edges()) {
        out += std::to_string(e.i);
        out += ' ';
        out += std::to_string(e.j);
        out += ' ';
        out += std::to_string(e.sign);
        out += ' ';
        const auto res = std::to_chars(buf, buf + sizeof buf, e.weight);
        out.append(buf, res.ptr);
        out += '\n';
    }
    return out;
}

Max2LinInstance gen_random_regular(VertexId n, int d, double sign_bias, WeightLaw weights, std::uint64_t seed,
                                   int max_restarts) {
    if (n <= 0 || d < 0) throw InstanceError("n must be positive and d non-negative");
    if (d >= n) throw InstanceError("degree must be below the vertex count");
    if ((static_cast<long long>(n) * d) % 2 != 0) throw InstanceError("n * d must be even");
    if (!(sign_bias >= 0.0 && sign_bias <= 1.0)) throw InstanceError("sign bias must lie in [0, 1]");
    if (weights.kind == WeightLaw::Kind::uniform && !(weights.lo > 0.0 && weights.hi >= weights.lo))
        throw InstanceError("uniform weight law needs 0 < lo <= hi");

    RandomStream rng(derive_seed(seed, 0x7265677561ULL));
    const std::size_t num_points = static_cast<std::size_t>(n) * static_cast<std::size_t>(d);

    for (int attempt = 0; attempt <= max_restarts; ++attempt) {
        std::vector<VertexId> points(num_points);
        for (std::size_t p = 0; p < num_points; ++p) points[p] = static_cast<VertexId>(p / static_cast<std::size_t>(d));
        std::unordered_set<std::uint64_t> present;
        std::vector<std::pair<VertexId, VertexId>> pairs;
        pairs.reserve(num_points / 2);

        bool dead_end = false;
        while (!points.empty()) {
            const std::size_t remaining = points.size();
            std::size_t misses = 0;
            bool placed = false;
            while (!placed) {
                const auto a = rng.below(remaining);
                auto b = rng.below(remaining - 1);
                if (b >= a) ++b;
                const VertexId u = points[a];
                const VertexId v = points[b];
                if (u != v && !present.contains(pair_key(u, v))) {
                    present.insert(pair_key(u, v));
                    pairs.emplace_back(std::min(u, v), std::max(u, v));
                    // Remove the larger index first so the smaller stays valid.
                    for (auto idx : {std::max(a, b), std::min(a, b)}) {
                        points[idx] = points.back();
                        points.pop_back();
                    }
                    placed = true;
                    continue;
                }
                if (++misses < 64 * remaining) continue;
                bool any = false;
                for (std::size_t x = 0; x < remaining && !any; ++x)
                    for (std::size_t y = x + 1; y < remaining && !any; ++y)
                        any = points[x] != points[y] && !present.contains(pair_key(points[x], points[y]));
                if (!any) {
                    dead_end = true;
                    break;
                }
                misses = 0;
            }
            if (dead_end) break;
        }
        if (dead_end) continue;

        std::sort(pairs.begin(), pairs.end());
        std::vector<Edge> edges;
        edges.reserve(pairs.size());
        for (const auto& [u, v] : pairs) {
            const int sign = rng.bernoulli(sign_bias) ? -1 : 1;
            const double w = weights.kind == WeightLaw::Kind::unit ? 1.0 : rng.uniform(weights.lo, weights.hi);
            edges.push_back({u, v, sign, w});
        }
        return Max2LinInstance(n, std::move(edges));
    }
    throw InstanceError("random regular graph: restart budget exceeded");
}

double evaluate(const Max2LinInstance& inst, const Assignment& x) {
    if (x.size() != static_cast<std::size_t>(inst.num_vertices()))
        throw std::invalid_argument("assignment length does not match vertex count");
    double total = 0.0;
    for (const auto& e : inst.edges())
        if (x[static_cast<std::size_t>(e.i)] * x[static_cast<std::size_t>(e.j)] == e.sign) total += e.weight;
    return total;
}

double violated_weight(const Max2LinInstance& inst, const Assignment& x) {
    if (x.size() != static_cast<std::size_t>(inst.num_vertices()))
        throw std::invalid_argument("assignment length does not match vertex count");
    double total = 0.0;
    for (const auto& e : inst.edges())
        if (x[static_cast<std::size_t>(e.i)] * x[static_cast<std::size_t>(e.j)] != e.sign) total += e.weight;
    return total;
}

}  // namespace gwflip
