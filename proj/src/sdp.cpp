#include "gwflip/sdp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "gwflip/rng.hpp"

namespace gwflip {

std::string_view to_string(TriangleMode mode) {
    switch (mode) {
        case TriangleMode::none: return "none";
        case TriangleMode::neighborhood: return "neighborhood";
        case TriangleMode::all: return "all";
    }
    return "unknown";
}

TriangleMode triangle_mode_from_string(std::string_view text) {
    if (text == "none") return TriangleMode::none;
    if (text == "neighborhood") return TriangleMode::neighborhood;
    if (text == "all") return TriangleMode::all;
    throw std::invalid_argument("unknown triangle mode '" + std::string(text) + "'");
}

double SdpEmbedding::max_norm_error() const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) worst = std::max(worst, std::abs(vectors.row(i).norm() - 1.0));
    return worst;
}

int default_rank(VertexId n) {
    if (n <= 0) return 0;
    const int r = static_cast<int>(std::ceil(std::sqrt(2.0 * n))) + 1;
    return std::min<int>(r, n);
}

void SdpConfig::validate(VertexId n) const {
    if (rank < 0 || rank > n) throw std::invalid_argument("rank must lie in [1, n] (0 for default)");
    if (!(objective_tol > 0.0) || !(constraint_tol > 0.0)) throw std::invalid_argument("tolerances must be > 0");
    if (!(penalty_growth > 1.0)) throw std::invalid_argument("penalty growth factor must exceed 1");
    if (!(initial_penalty > 0.0)) throw std::invalid_argument("initial penalty must be > 0");
    if (max_outer_iterations < 1 || max_inner_iterations < 1) throw std::invalid_argument("iteration caps must be >= 1");
}

std::vector<Triple> enumerate_triples(const Max2LinInstance& inst, TriangleMode mode) {
    const VertexId n = inst.num_vertices();
    std::vector<Triple> out;
    if (mode == TriangleMode::none) return out;
    if (mode == TriangleMode::all) {
        for (VertexId i = 0; i < n; ++i)
            for (VertexId j = i + 1; j < n; ++j)
                for (VertexId k = j + 1; k < n; ++k) out.push_back({i, j, k});
        return out;
    }
    for (VertexId c = 0; c < n; ++c) {
        const auto& adj = inst.neighbors(c);
        for (std::size_t a = 0; a < adj.size(); ++a)
            for (std::size_t b = a + 1; b < adj.size(); ++b) {
                std::array<VertexId, 3> t{c, adj[a].vertex, adj[b].vertex};
                std::sort(t.begin(), t.end());
                out.push_back({t[0], t[1], t[2]});
            }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double max_triangle_violation(const SdpEmbedding& emb, const Triple& t) {
    static constexpr std::array<SignPattern, 4> kClasses{{{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}}};
    const std::array<std::array<VertexId, 3>, 3> rotations{{{t.i, t.j, t.k}, {t.j, t.k, t.i}, {t.k, t.i, t.j}}};
    double worst = 0.0;
    for (const auto& r : rotations)
        for (const auto& a : kClasses) worst = std::max(worst, triangle_violation(emb.vectors, r[0], r[1], r[2], a));
    return worst;
}

double max_triangle_violation(const SdpEmbedding& emb, const std::vector<Triple>& triples) {
    double worst = 0.0;
    for (const auto& t : triples) worst = std::max(worst, max_triangle_violation(emb, t));
    return worst;
}

namespace {

// In inner-product form every signed triangle inequality on {i, j, k} reads
//     1 + s_ij rho_ij + s_jk rho_jk + s_ik rho_ik >= 0,   s_ij s_jk s_ik = +1,
// which gives exactly four distinct constraints per triple. The squared-norm
// violation is twice the negative part.
constexpr std::array<std::array<int, 3>, 4> kSignClasses{{{1, 1, 1}, {-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}}};

struct Constraint {
    std::array<int, 3> pair;  // indices into the pair list: ij, jk, ik
    std::array<int, 3> sign;
    double multiplier = 0.0;
};

class AugmentedLagrangian {
public:
    AugmentedLagrangian(const Max2LinInstance& inst, std::vector<Triple> family)
        : inst_(inst), family_(std::move(family)), slot_(family_.size() * 4, -1) {
        for (const auto& e : inst.edges()) {
            const int p = pair_index(e.i, e.j);
            linear_[static_cast<std::size_t>(p)] += 0.5 * e.weight * e.sign;
            constant_ += 0.5 * e.weight;
        }
    }

    double objective(const EmbeddingMatrix<double>& v) const { return sdp_objective(inst_, v); }

    /// F = -objective + sum_c ((max(0, lambda - mu c))^2 - lambda^2) / (2 mu); also fills the
    /// per-pair coefficients dF/drho when `coeff` is non-null.
    double value(const EmbeddingMatrix<double>& v, double mu, std::vector<double>* coeff) const {
        const std::size_t np = pairs_.size();
        rho_.resize(np);
        for (std::size_t p = 0; p < np; ++p) rho_[p] = v.row(pairs_[p].first).dot(v.row(pairs_[p].second));
        double f = -constant_;
        if (coeff) coeff->assign(np, 0.0);
        for (std::size_t p = 0; p < np; ++p) {
            f -= linear_[p] * rho_[p];
            if (coeff) (*coeff)[p] = -linear_[p];
        }
        for (const auto& c : constraints_) {
            const double g = 1.0 + c.sign[0] * rho_[static_cast<std::size_t>(c.pair[0])] +
                             c.sign[1] * rho_[static_cast<std::size_t>(c.pair[1])] +
                             c.sign[2] * rho_[static_cast<std::size_t>(c.pair[2])];
            const double shifted = std::max(0.0, c.multiplier - mu * g);
            f += (shifted * shifted - c.multiplier * c.multiplier) / (2.0 * mu);
            if (coeff && shifted > 0.0)
                for (int t = 0; t < 3; ++t) (*coeff)[static_cast<std::size_t>(c.pair[t])] -= c.sign[t] * shifted;
        }
        return f;
    }

    /// Riemannian gradient on the product of spheres.
    void gradient(const EmbeddingMatrix<double>& v, const std::vector<double>& coeff,
                  EmbeddingMatrix<double>& grad) const {
        grad.setZero(v.rows(), v.cols());
        for (std::size_t p = 0; p < pairs_.size(); ++p) {
            if (coeff[p] == 0.0) continue;
            const auto [a, b] = pairs_[p];
            grad.row(a) += coeff[p] * v.row(b);
            grad.row(b) += coeff[p] * v.row(a);
        }
        for (Eigen::Index i = 0; i < v.rows(); ++i) grad.row(i) -= grad.row(i).dot(v.row(i)) * v.row(i);
    }

    /// Adds every family constraint violated at v.
    void grow_working_set(const EmbeddingMatrix<double>& v) {
        for (std::size_t t = 0; t < family_.size(); ++t) {
            const auto& tr = family_[t];
            const double rij = v.row(tr.i).dot(v.row(tr.j));
            const double rjk = v.row(tr.j).dot(v.row(tr.k));
            const double rik = v.row(tr.i).dot(v.row(tr.k));
            for (std::size_t c = 0; c < 4; ++c) {
                if (slot_[t * 4 + c] >= 0) continue;
                const auto& s = kSignClasses[c];
                if (1.0 + s[0] * rij + s[1] * rjk + s[2] * rik >= 0.0) continue;
                Constraint con;
                con.pair = {pair_index(tr.i, tr.j), pair_index(tr.j, tr.k), pair_index(tr.i, tr.k)};
                con.sign = s;
                slot_[t * 4 + c] = static_cast<int>(constraints_.size());
                constraints_.push_back(con);
            }
        }
    }

    void update_multipliers(const EmbeddingMatrix<double>& v, double mu) {
        value(v, mu, nullptr);
        for (auto& c : constraints_) {
            const double g = 1.0 + c.sign[0] * rho_[static_cast<std::size_t>(c.pair[0])] +
                             c.sign[1] * rho_[static_cast<std::size_t>(c.pair[1])] +
                             c.sign[2] * rho_[static_cast<std::size_t>(c.pair[2])];
            c.multiplier = std::max(0.0, c.multiplier - mu * g);
        }
    }

    /// Largest squared-norm violation over the whole family.
    double family_violation(const EmbeddingMatrix<double>& v) const {
        double worst = 0.0;
        for (const auto& tr : family_) {
            const double rij = v.row(tr.i).dot(v.row(tr.j));
            const double rjk = v.row(tr.j).dot(v.row(tr.k));
            const double rik = v.row(tr.i).dot(v.row(tr.k));
            for (const auto& s : kSignClasses)
                worst = std::max(worst, -2.0 * (1.0 + s[0] * rij + s[1] * rjk + s[2] * rik));
        }
        return worst;
    }

    std::size_t working_set_size() const noexcept { return constraints_.size(); }


private:
    int pair_index(VertexId a, VertexId b) {
        if (a > b) std::swap(a, b);
        const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
        const auto [it, inserted] = index_.try_emplace(key, static_cast<int>(pairs_.size()));
        if (inserted) {
            pairs_.emplace_back(a, b);
            linear_.push_back(0.0);
        }
        return it->second;
    }

    const Max2LinInstance& inst_;
    std::vector<Triple> family_;
    std::vector<int> slot_;
    std::vector<Constraint> constraints_;
    std::vector<std::pair<VertexId, VertexId>> pairs_;
    std::vector<double> linear_;
    std::unordered_map<std::uint64_t, int> index_;
    double constant_ = 0.0;
    mutable std::vector<double> rho_;
};

void normalize_rows(EmbeddingMatrix<double>& v) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const double norm = v.row(i).norm();
        if (norm > 0.0) v.row(i) /= norm;
        else {
            v.row(i).setZero();
            v(i, 0) = 1.0;
        }
    }
}

void project_tangent(const EmbeddingMatrix<double>& v, EmbeddingMatrix<double>& t) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) t.row(i) -= t.row(i).dot(v.row(i)) * v.row(i);
}

double inner_product(const EmbeddingMatrix<double>& a, const EmbeddingMatrix<double>& b) {
    return a.cwiseProduct(b).sum();
}

// Riemannian L-BFGS on the product of spheres: retraction by row
// normalization, vector transport by tangent projection, Armijo backtracking.
// Returns the iterations used.
int minimize_inner(const AugmentedLagrangian& al, EmbeddingMatrix<double>& v, double mu, int max_iter,
                   double grad_tol) {
    constexpr int kMemory = 8;
    constexpr double kArmijo = 1e-4;
    std::vector<double> coeff;
    EmbeddingMatrix<double> grad;
    EmbeddingMatrix<double> dir;
    EmbeddingMatrix<double> trial;
    std::vector<EmbeddingMatrix<double>> s_hist;
    std::vector<EmbeddingMatrix<double>> y_hist;
    std::vector<double> rho_hist;
    std::vector<double> alpha(kMemory);

    double f = al.value(v, mu, &coeff);
    al.gradient(v, coeff, grad);
    int it = 0;
    for (; it < max_iter; ++it) {
        const double gnorm2 = grad.squaredNorm();
        if (std::sqrt(gnorm2) <= grad_tol) break;

        dir = -grad;
        const int m = static_cast<int>(s_hist.size());
        for (int k = m - 1; k >= 0; --k) {
            alpha[static_cast<std::size_t>(k)] = rho_hist[static_cast<std::size_t>(k)] * inner_product(s_hist[static_cast<std::size_t>(k)], dir);
            dir -= alpha[static_cast<std::size_t>(k)] * y_hist[static_cast<std::size_t>(k)];
        }
        if (m > 0) dir *= 1.0 / (rho_hist.back() * y_hist.back().squaredNorm());
        else dir *= 1.0 / std::max(1.0, mu);
        for (int k = 0; k < m; ++k) {
            const double beta = rho_hist[static_cast<std::size_t>(k)] * inner_product(y_hist[static_cast<std::size_t>(k)], dir);
            dir += (alpha[static_cast<std::size_t>(k)] - beta) * s_hist[static_cast<std::size_t>(k)];
        }
        project_tangent(v, dir);
        double slope = inner_product(grad, dir);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -grad / std::max(1.0, mu);
            slope = inner_product(grad, dir);
        }

        double step = 1.0;
        double f_trial = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 50; ++bt) {
            trial = v + step * dir;
            normalize_rows(trial);
            f_trial = al.value(trial, mu, nullptr);
            if (f_trial <= f + kArmijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        EmbeddingMatrix<double> s_new = trial - v;
        EmbeddingMatrix<double> old_grad = std::move(grad);
        v = trial;
        f = al.value(v, mu, &coeff);
        al.gradient(v, coeff, grad);
        project_tangent(v, old_grad);
        project_tangent(v, s_new);
        for (auto& sh : s_hist) project_tangent(v, sh);
        for (auto& yh : y_hist) project_tangent(v, yh);
        EmbeddingMatrix<double> y_new = grad - old_grad;
        const double sy = inner_product(s_new, y_new);
        if (sy > 1e-12 * std::sqrt(s_new.squaredNorm() * y_new.squaredNorm())) {
            if (static_cast<int>(s_hist.size()) == kMemory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
            s_hist.push_back(std::move(s_new));
            y_hist.push_back(std::move(y_new));
            rho_hist.push_back(1.0 / sy);
        }
    }
    return it;
}

}  // namespace

SdpResult solve_sdp(const Max2LinInstance& inst, const SdpConfig& cfg) {
    const VertexId n = inst.num_vertices();
    if (n < 1) throw std::invalid_argument("solve_sdp needs at least one vertex");
    cfg.validate(n);
    const int rank = cfg.rank > 0 ? cfg.rank : default_rank(n);

    EmbeddingMatrix<double> v(n, rank);
    RandomStream rng(derive_seed(cfg.seed, 0x736470ULL));
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index c = 0; c < v.cols(); ++c) v(i, c) = rng.gaussian();
    normalize_rows(v);

    AugmentedLagrangian al(inst, enumerate_triples(inst, cfg.triangle_mode));
    const double weight_scale = std::max(1e-12, inst.total_weight() / std::max<double>(1.0, inst.num_edges()));
    double mu = cfg.initial_penalty * weight_scale;
    const double final_grad_tol = 1e-5 * weight_scale * std::max(1, inst.max_degree());
    double grad_tol = 1e-2 * weight_scale * std::max(1, inst.max_degree());

    SdpReport report;
    EmbeddingMatrix<double> best_v = v;
    double best_violation = std::numeric_limits<double>::infinity();
    double best_objective = -std::numeric_limits<double>::infinity();
    double prev_objective = std::numeric_limits<double>::quiet_NaN();
    double prev_violation = std::numeric_limits<double>::infinity();

    for (int outer = 0; outer < cfg.max_outer_iterations; ++outer) {
        report.inner_iterations += minimize_inner(al, v, mu, cfg.max_inner_iterations, grad_tol);
        grad_tol = std::max(final_grad_tol, grad_tol * 0.1);
        al.update_multipliers(v, mu);
        al.grow_working_set(v);
        const double violation = al.family_violation(v);
        const double objective = al.objective(v);
        report.outer_iterations = outer + 1;
        report.history.push_back({objective, al.value(v, mu, nullptr), violation, mu, al.working_set_size()});

        if (violation < best_violation - 1e-15 ||
            (violation <= std::max(best_violation, cfg.constraint_tol) && objective > best_objective)) {
            best_v = v;
            best_violation = violation;
            best_objective = objective;
        }
        const bool stable = !std::isnan(prev_objective) &&
                            std::abs(objective - prev_objective) <= cfg.objective_tol * std::max(1.0, std::abs(objective));
        if (violation <= cfg.constraint_tol && stable) {
            best_v = v;
            best_violation = violation;
            report.converged = true;
            break;
        }
        if (violation > 0.25 * prev_violation) mu = std::min(mu * cfg.penalty_growth, 1e10 * weight_scale);
        prev_violation = violation;
        prev_objective = objective;
    }

    normalize_rows(best_v);
    SdpResult result{SdpEmbedding{std::move(best_v)}, {}};
    report.objective = sdp_objective(inst, result.embedding);
    report.max_violation = best_violation;
    report.working_set = al.working_set_size();
    report.seed = cfg.seed;
    result.report = std::move(report);
    return result;
}

std::string write_embedding(const SdpEmbedding& emb) {
    std::string out = std::to_string(emb.num_vertices()) + " " + std::to_string(emb.rank()) + "\n";
    char buf[64];
    for (Eigen::Index i = 0; i < emb.vectors.rows(); ++i) {
        for (Eigen::Index c = 0; c < emb.vectors.cols(); ++c) {
            if (c > 0) out += ' ';
            const auto res = std::to_chars(buf, buf + sizeof buf, emb.vectors(i, c));
            out.append(buf, res.ptr);
        }
        out += '\n';
    }
    return out;
}

SdpEmbedding parse_embedding(std::string_view text) {
    std::vector<double> values;
    const char* p = text.data();
    const char* end = p + text.size();
    auto skip_ws = [&] {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\n' || *p == '\r')) ++p;
    };
    long long header[2] = {0, 0};
    for (auto& h : header) {
        skip_ws();
        const auto [ptr, ec] = std::from_chars(p, end, h);
        if (ec != std::errc{} || h < 0) throw std::invalid_argument("embedding: malformed header");
        p = ptr;
    }
    const auto rows = header[0];
    const auto cols = header[1];
    SdpEmbedding emb{EmbeddingMatrix<double>(rows, cols)};
    for (long long i = 0; i < rows; ++i)
        for (long long c = 0; c < cols; ++c) {
            skip_ws();
            double x = 0.0;
            const auto [ptr, ec] = std::from_chars(p, end, x);
            if (ec != std::errc{}) throw std::invalid_argument("embedding: malformed entry at row " + std::to_string(i));
            p = ptr;
            emb.vectors(i, c) = x;
        }
    skip_ws();
    if (p != end) throw std::invalid_argument("embedding: trailing data");
    return emb;
}

}  // namespace gwflip
