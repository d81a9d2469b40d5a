#include "gwflip/numerics.hpp"

#include <algorithm>
#include <cfloat>
#include <limits>
#include <sstream>

#include "gwflip/rng.hpp"

namespace gwflip {

namespace {

std::string describe(std::initializer_list<std::pair<const char*, double>> fields) {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [k, v] : fields) {
        if (!first) os << ", ";
        os << k << "=" << v;
        first = false;
    }
    return os.str();
}

std::vector<double> default_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(i / 100.0);
    return grid;
}

}  // namespace

TaylorSeries arcsin_series(long tau) { return {tau, arcsin_coefficients<double>(tau)}; }

MonteCarloEstimate sheppard_mc(double sigma, std::size_t samples, std::uint64_t seed) {
    if (!(sigma >= -1.0 && sigma <= 1.0)) throw std::domain_error("sheppard_mc: sigma must lie in [-1, 1]");
    if (samples < 1000) throw std::invalid_argument("sheppard_mc: need at least 1000 samples");
    RandomStream rng(derive_seed(seed, 0x736865ULL));
    const double tail = std::sqrt(std::max(0.0, 1.0 - sigma * sigma));
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double z1 = rng.gaussian();
        const double z2 = rng.gaussian();
        if (z1 >= 0.0 && sigma * z1 + tail * z2 >= 0.0) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), samples};
}

std::pair<double, double> gaussian_core_bounds(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("gaussian_core_bounds: eps must be > 0");
    const double upper = eps / std::sqrt(2.0 * std::numbers::pi);
    return {upper * std::exp(-eps * eps / 2.0), upper};
}

double gaussian_core_probability(double eps) { return 0.5 * std::erf(eps / std::numbers::sqrt2); }

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd a, double psd_tol) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw std::invalid_argument("correlation matrix must be square");
    constexpr double kTol = 1e-12;
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
        if (std::abs(a_(i, i) - 1.0) > kTol) throw std::invalid_argument("correlation matrix needs a unit diagonal");
        for (Eigen::Index j = 0; j < a_.cols(); ++j) {
            if (std::abs(a_(i, j) - a_(j, i)) > kTol) throw std::invalid_argument("correlation matrix must be symmetric");
            if (std::abs(a_(i, j)) > 1.0 + kTol) throw std::invalid_argument("correlation entries must lie in [-1, 1]");
        }
    }
    if (a_.rows() > 0 && min_eigenvalue(a_) < -psd_tol)
        throw std::invalid_argument("correlation matrix is not positive semidefinite");
}

CorrelationMatrix random_correlation_matrix(Eigen::Index d, Eigen::Index dim, RandomStream& rng, double min_entry) {
    if (d < 1 || dim < 1) throw std::invalid_argument("random_correlation_matrix: sizes must be >= 1");
    Eigen::VectorXd anchor(dim);
    for (Eigen::Index c = 0; c < dim; ++c) anchor(c) = rng.gaussian();
    anchor.normalize();

    Eigen::MatrixXd vecs(d, dim);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (int attempt = 0;; ++attempt) {
            // After 50 misses, tilt draws toward a shared direction so the
            // lower bound becomes reachable.
            const double tilt = attempt < 50 ? 0.0 : 0.1 * (attempt - 49);
            Eigen::VectorXd v(dim);
            for (Eigen::Index c = 0; c < dim; ++c) v(c) = rng.gaussian();
            v += tilt * anchor;
            const double norm = v.norm();
            if (!(norm > 0.0)) continue;
            v /= norm;
            bool ok = true;
            for (Eigen::Index k = 0; k < i && ok; ++k) ok = vecs.row(k).dot(v) >= min_entry;
            if (ok) {
                vecs.row(i) = v.transpose();
                break;
            }
        }
    }
    Eigen::MatrixXd gram = vecs * vecs.transpose();
    gram = (0.5 * (gram + gram.transpose())).eval();
    gram.diagonal().setOnes();
    gram = gram.cwiseMax(-1.0).cwiseMin(1.0);
    return CorrelationMatrix(std::move(gram));
}

double entrywise_power_psd(const CorrelationMatrix& a, int t) {
    if (t < 1) throw std::invalid_argument("entrywise power must be >= 1");
    const Eigen::MatrixXd b = a.matrix().unaryExpr([t](double x) { return std::pow(x, t); });
    return min_eigenvalue(b);
}

double entrywise_arcsin_min_eigenvalue(const CorrelationMatrix& a) {
    const Eigen::MatrixXd b = a.matrix().unaryExpr([](double x) { return std::asin(std::clamp(x, -1.0, 1.0)); });
    return min_eigenvalue(b);
}

double arcsin_form(const CorrelationMatrix& a, const Eigen::VectorXd& w) {
    if (w.size() != a.dim()) throw std::invalid_argument("arcsin_form: weight length does not match matrix");
    if ((w.array() < 0.0).any()) throw std::invalid_argument("arcsin_form: weights must be non-negative");
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.dim(); ++i)
        for (Eigen::Index j = 0; j < a.dim(); ++j) total += w(i) * w(j) * std::asin(std::clamp(a(i, j), -1.0, 1.0));
    return total;
}

std::vector<CheckResult> check_arcsin_series(const ArcsinSeriesOptions& opts) {
    using LD = long double;
    std::vector<CheckResult> out;
    const std::vector<double> grid = opts.grid.empty() ? default_grid() : opts.grid;

    // (1) partial sums never exceed arcsin on (0, 1]. Comparisons run in
    // long double; a few ulps of slack absorb rounding in the reference.
    {
        CheckResult r{"arcsin_partial_below", true, {}, ""};
        const LD slack = 8 * LDBL_EPSILON;
        std::size_t violations = 0;
        LD worst = -1;
        for (long tau : opts.taus)
            for (double x : grid) {
                if (!(x > 0.0)) continue;
                const LD xl = x;
                const LD partial = arcsin_partial<LD>(xl, tau);
                const LD ref = std::asin(xl);
                const LD excess = (partial - ref) / ref;
                if (excess > worst) {
                    worst = excess;
                    r.worst_case = describe({{"tau", double(tau)}, {"x", x}, {"relative_excess", double(excess)}});
                }
                if (excess > slack) ++violations;
            }
        r.pass = violations == 0;
        r.constants["violations"] = double(violations);
        r.constants["max_relative_excess"] = double(worst);
        r.constants["slack"] = double(slack);
        out.push_back(std::move(r));
    }

    // (2) for |x| <= 1/2 the remainder is O(tau^(-1/2) 4^(-tau)); the constant is fitted.
    {
        CheckResult r{"arcsin_remainder_half", true, {}, ""};
        LD fitted = 0;
        bool within = true;
        for (long tau : opts.taus) {
            const LD bound = std::pow(LD(tau), LD(-0.5)) * std::pow(LD(2), LD(-2 * tau));
            for (double x0 : grid) {
                if (x0 > 0.5) continue;
                for (double x : {x0, -x0}) {
                    // Remainder summed directly; terms shrink by at least 4x each.
                    const LD ax = std::abs(LD(x));
                    LD c = arcsin_coeff<LD>(tau + 1);
                    LD p = std::pow(ax, LD(2 * tau + 3));
                    LD tail = 0;
                    for (long k = tau + 1; k < tau + 400; ++k) {
                        tail += c * p;
                        const LD a = LD(2 * k + 1);
                        c *= a * a / (LD(2 * k + 2) * LD(2 * k + 3));
                        p *= ax * ax;
                    }
                    if (tail / bound > fitted) {
                        fitted = tail / bound;
                        r.worst_case = describe({{"tau", double(tau)}, {"x", x}, {"remainder", double(tail)}});
                    }
                    const LD err = std::abs(std::asin(LD(x)) - arcsin_partial<LD>(LD(x), tau));
                    if (err > tail + 8 * LDBL_EPSILON * std::abs(std::asin(LD(x))) + LDBL_MIN) within = false;
                }
            }
        }
        r.constants["fitted_K"] = double(fitted);
        // Summing the geometric tail gives K <= 1/(6 sqrt(pi)) for tau >= 1.
        r.pass = within && fitted <= 1.0;
        out.push_back(std::move(r));
    }

    // (3) the remainder at x = 1 is Theta(tau^(-1/2)).
    {
        CheckResult r{"arcsin_gap_at_one", true, {}, ""};
        std::vector<LD> normalized;
        for (long tau : opts.gap_taus) {
            const LD gap = arcsin_gap_at_one<LD>(tau);
            if (!(gap > 0)) r.pass = false;
            normalized.push_back(gap * std::sqrt(LD(tau)));
            r.constants["gap_sqrt_tau_" + std::to_string(tau)] = double(normalized.back());
        }
        LD worst_ratio = 1;
        for (std::size_t k = 1; k < normalized.size(); ++k) {
            const LD ratio = normalized[k] / normalized[k - 1];
            if (std::abs(std::log(ratio)) > std::abs(std::log(worst_ratio))) worst_ratio = ratio;
            if (ratio < 0.5 || ratio > 2.0) r.pass = false;
        }
        r.constants["worst_consecutive_ratio"] = double(worst_ratio);
        if (!normalized.empty()) {
            const auto [lo, hi] = std::minmax_element(normalized.begin(), normalized.end());
            r.constants["spread_factor"] = double(*hi / *lo);
            r.pass = r.pass && *hi / *lo <= 2.0;
        }
        r.worst_case = describe({{"worst_consecutive_ratio", double(worst_ratio)}});
        out.push_back(std::move(r));
    }

    // c_k ~ k^(-3/2) / (2 sqrt(pi)), and recurrence agrees with the closed form.
    {
        CheckResult r{"arcsin_coefficients", true, {}, ""};
        const LD c30 = arcsin_coeff<LD>(30);
        const LD lead = LD(1) / (LD(2) * std::sqrt(std::numbers::pi_v<LD>)) * std::pow(LD(30), LD(-1.5));
        r.constants["c30_over_asymptotic"] = double(c30 / lead);
        if (c30 / lead < 0.2 || c30 / lead > 5.0) r.pass = false;
        LD worst = 0;
        const auto coeffs = arcsin_coefficients<LD>(200);
        for (long k = 0; k <= 200; ++k) {
            const LD log_closed = std::lgamma(LD(2 * k + 1)) - LD(2 * k) * std::log(LD(2)) - 2 * std::lgamma(LD(k + 1)) -
                                  std::log(LD(2 * k + 1));
            const LD rel = std::abs(coeffs[static_cast<std::size_t>(k)] / std::exp(log_closed) - 1);
            if (rel > worst) {
                worst = rel;
                r.worst_case = describe({{"k", double(k)}, {"relative_error", double(rel)}});
            }
        }
        r.constants["max_relative_error_vs_closed_form"] = double(worst);
        if (worst > 1e-12) r.pass = false;
        out.push_back(std::move(r));
    }
    return out;
}

ArcsinFormReport check_arcsin_form(int trials, const std::vector<int>& d_list, std::uint64_t seed) {
    ArcsinFormReport rep;
    rep.check = {"arcsin_form_positive", true, {}, ""};
    double overall = std::numeric_limits<double>::infinity();
    for (int d : d_list) {
        if (d < 2) throw std::invalid_argument("check_arcsin_form: d must be >= 2");
        RandomStream rng(derive_seed(seed, 0x6c3235ULL, static_cast<std::uint64_t>(d)));
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t < trials; ++t) {
            const auto dim = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(d)));
            const auto a = random_correlation_matrix(d, dim, rng, -0.5);
            Eigen::VectorXd w(d);
            for (int i = 0; i < d; ++i) w(i) = rng.uniform();
            // Sparse weight vectors probe the diagonal-dominated regime.
            if (t % 4 == 3) w = w.cwiseProduct(Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.bernoulli(0.3) ? 1.0 : 0.0; }));
            if (w.sum() <= 0.0) w(0) = 1.0;
            const double value = arcsin_form(a, w);
            const double normalized = value * d * std::sqrt(std::log(double(d))) / (w.sum() * w.sum());
            if (!(value > 0.0)) rep.check.pass = false;
            if (normalized < worst) {
                worst = normalized;
                if (normalized < overall) {
                    overall = normalized;
                    rep.check.worst_case = describe({{"d", double(d)}, {"trial", double(t)}, {"value", value}, {"normalized", normalized}});
                }
            }
        }
        rep.min_normalized[d] = worst;
        rep.check.constants["min_normalized_d" + std::to_string(d)] = worst;
    }
    rep.check.constants["min_normalized"] = overall;
    return rep;
}

LocalGainEstimate estimate_local_gain(int d, const CorrelationMatrix& neighbor_gram, double rho,
                                      const Eigen::VectorXd& weights, double constant, std::size_t trials,
                                      std::uint64_t seed, const LocalGainOptions& opts) {
    if (d < 2) throw std::invalid_argument("estimate_local_gain: d must be >= 2");
    if (neighbor_gram.dim() != d || weights.size() != d)
        throw std::invalid_argument("estimate_local_gain: gram and weights must have size d");
    if ((weights.array() < 0.0).any()) throw std::invalid_argument("estimate_local_gain: weights must be non-negative");
    if (!(constant > 0.0)) throw std::invalid_argument("estimate_local_gain: constant must be > 0");
    if (trials < 1) throw std::invalid_argument("estimate_local_gain: trials must be >= 1");
    if (!(std::abs(rho) <= 1.0)) throw std::domain_error("estimate_local_gain: rho must lie in [-1, 1]");
    if (opts.enforce_hypotheses) {
        const double center = rho_star<double>();
        if (rho < center - 0.01 || rho > center + 0.01)
            throw std::domain_error("estimate_local_gain: rho outside [rho* - 0.01, rho* + 0.01]");
        if (neighbor_gram.matrix().minCoeff() < -0.2)
            throw std::domain_error("estimate_local_gain: neighbor Gram entries must be >= -0.2");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neighbor_gram.matrix());
    const Eigen::MatrixXd factor =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    const double eps = 1.0 / (constant * d * std::sqrt(std::log(double(d))));
    const double spread = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const double total_weight = weights.sum();

    RandomStream rng(derive_seed(seed, 0x6c6761696eULL));
    Eigen::VectorXd z(d);
    Eigen::VectorXd h(d);
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t members = 0;
    for (std::size_t s = 0; s < trials; ++s) {
        // Membership rate from an unconditioned draw.
        if (std::abs(rng.gaussian()) < eps) ++members;

        // g_1 | |g_1| < eps: uniform proposal, accept with exp(-g^2 / 2) >= exp(-eps^2 / 2).
        double g1 = 0.0;
        do {
            g1 = rng.uniform(-eps, eps);
        } while (!(rng.uniform() < std::exp(-0.5 * g1 * g1)));
        const int xi = g1 >= 0.0 ? 1 : -1;
        for (int j = 0; j < d; ++j) z(j) = rng.gaussian();
        h.noalias() = factor * z;

        double violated = 0.0;
        for (int j = 0; j < d; ++j) {
            const double proj = rho * g1 + spread * h(j);
            if (std::abs(proj) < eps) continue;
            if (xi * proj <= -eps) violated += weights(j);
        }
        const double gain = std::max(0.0, 2.0 * violated - total_weight);
        const double delta = gain - mean;
        mean += delta / double(s + 1);
        m2 += delta * (gain - mean);
    }

    LocalGainEstimate out;
    out.samples = trials;
    out.mean = mean;
    out.std_error = trials > 1 ? std::sqrt(m2 / double(trials - 1) / double(trials)) : 0.0;
    out.incident_weight = total_weight;
    out.epsilon = eps;
    out.normalized = total_weight > 0.0 ? mean * d * std::sqrt(std::log(double(d))) / total_weight : 0.0;
    out.membership_rate = double(members) / double(trials);
    out.membership_std_error = std::sqrt(out.membership_rate * (1.0 - out.membership_rate) / double(trials));
    const auto [lo, hi] = gaussian_core_bounds(eps);
    out.membership_lower = 2.0 * lo;
    out.membership_upper = 2.0 * hi;
    return out;
}

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
    std::vector<CheckResult> out;

    {
        CheckResult r{"rho_star_alpha_gw", true, {}, ""};
        const double rs = rho_star<double>();
        const double a = alpha_gw<double>();
        r.constants["rho_star"] = rs;
        r.constants["alpha_gw"] = a;
        r.pass = std::abs(rs - 0.689) < 5e-4 && std::abs(a - 0.878) < 1e-3;
        out.push_back(std::move(r));
    }

    {
        CheckResult r{"gaussian_core_bounds", true, {}, ""};
        double tightest = std::numeric_limits<double>::infinity();
        for (double eps : {1e-4, 1e-3, 0.01, 0.05, 0.1, 0.3, 0.5, 1.0, 2.0}) {
            const auto [lo, hi] = gaussian_core_bounds(eps);
            const double p = gaussian_core_probability(eps);
            if (p < lo || p > hi) {
                r.pass = false;
                r.worst_case = describe({{"eps", eps}, {"p", p}, {"lower", lo}, {"upper", hi}});
            }
            tightest = std::min(tightest, std::min(p - lo, hi - p));
        }
        r.constants["min_slack"] = tightest;
        out.push_back(std::move(r));
    }

    ArcsinSeriesOptions series_opts;
    series_opts.gap_taus = opts.gap_taus;
    for (auto& r : check_arcsin_series(series_opts)) out.push_back(std::move(r));

    {
        CheckResult r{"sheppard_monte_carlo", true, {}, ""};
        r.constants["closed_form_at_half"] = sheppard(0.5);
        double worst = 0.0;
        int idx = 0;
        for (double sigma : {-0.9, -0.5, 0.0, 1.0 / 3.0, 0.5, 0.689, 0.9}) {
            const auto mc = sheppard_mc(sigma, opts.sheppard_samples, derive_seed(opts.seed, 0x5348ULL, idx++));
            const double dev = std::abs(mc.mean - sheppard(sigma));
            if (dev > worst) {
                worst = dev;
                r.worst_case = describe({{"sigma", sigma}, {"estimate", mc.mean}, {"exact", sheppard(sigma)}});
            }
            if (dev > 0.005) r.pass = false;
        }
        r.constants["max_abs_deviation"] = worst;
        out.push_back(std::move(r));
    }

    {
        CheckResult r{"entrywise_psd_closure", true, {}, ""};
        RandomStream rng(derive_seed(opts.seed, 0x707364ULL));
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t < opts.psd_trials; ++t) {
            const auto d = static_cast<Eigen::Index>(2 + rng.below(39));
            const auto dim = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(d)));
            const auto a = random_correlation_matrix(d, dim, rng);
            for (int power : {3, 5, 9}) {
                const double m = entrywise_power_psd(a, power);
                if (m < worst) {
                    worst = m;
                    r.worst_case = describe({{"trial", double(t)}, {"d", double(d)}, {"power", double(power)}, {"min_eig", m}});
                }
            }
            const double m = entrywise_arcsin_min_eigenvalue(a);
            if (m < worst) {
                worst = m;
                r.worst_case = describe({{"trial", double(t)}, {"d", double(d)}, {"arcsin", 1.0}, {"min_eig", m}});
            }
        }
        r.constants["min_eigenvalue"] = worst;
        r.pass = worst >= -1e-8;
        out.push_back(std::move(r));
    }

    out.push_back(check_arcsin_form(opts.arcsin_form_trials, {2, 4, 8, 16, 32}, opts.seed).check);

    {
        CheckResult r{"local_gain_monte_carlo", true, {}, ""};
        int idx = 0;
        for (int d : {4, 16, 64}) {
            const auto est = estimate_local_gain(d, CorrelationMatrix::identity(d), 0.689, Eigen::VectorXd::Ones(d), 2.0,
                                                 opts.local_gain_samples, derive_seed(opts.seed, 0x4c47ULL, idx++));
            const double threshold = 0.1 * est.incident_weight / (d * std::sqrt(std::log(double(d))));
            const std::string tag = "_d" + std::to_string(d);
            r.constants["mean" + tag] = est.mean;
            r.constants["normalized" + tag] = est.normalized;
            r.constants["membership" + tag] = est.membership_rate;
            const bool gain_ok = est.mean >= threshold;
            const double sigma3 = 3.0 * std::sqrt(est.membership_upper * (1.0 - est.membership_upper) / double(est.samples));
            const bool member_ok = est.membership_rate >= est.membership_lower - sigma3 &&
                                   est.membership_rate <= est.membership_upper + sigma3;
            if (!gain_ok || !member_ok) {
                r.pass = false;
                r.worst_case = describe({{"d", double(d)}, {"mean", est.mean}, {"threshold", threshold},
                                         {"membership", est.membership_rate}});
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace gwflip
