#pragma once

// Analytic toolkit behind the local-gain analysis: arcsin Taylor
// coefficients, Gaussian orthant probabilities, entrywise powers of
// correlation matrices, and Monte-Carlo checks of the local gain.
//
// The scalar routines are templates so the checks can run them in long
// double against double references.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gwflip {

class RandomStream;

// ---------------------------------------------------------------------------
// arcsin Taylor series, arcsin(x) = sum_k c_k x^(2k+1)

/// c_k = (2k)! / (4^k (k!)^2 (2k+1)), via c_{k+1} = c_k (2k+1)^2 / ((2k+2)(2k+3)).
template <class Scalar = double>
Scalar arcsin_coeff(long k) {
    if (k < 0) throw std::invalid_argument("arcsin_coeff: k must be >= 0");
    Scalar c(1);
    for (long j = 0; j < k; ++j) {
        const Scalar a = Scalar(2 * j + 1);
        c *= a * a / (Scalar(2 * j + 2) * Scalar(2 * j + 3));
    }
    return c;
}

struct TaylorSeries {
    long tau = 0;
    std::vector<double> coefficients;  // c_0 .. c_tau
};

template <class Scalar = double>
std::vector<Scalar> arcsin_coefficients(long tau) {
    if (tau < 0) throw std::invalid_argument("arcsin_coefficients: tau must be >= 0");
    std::vector<Scalar> c(static_cast<std::size_t>(tau) + 1);
    c[0] = Scalar(1);
    for (long j = 0; j < tau; ++j) {
        const Scalar a = Scalar(2 * j + 1);
        c[static_cast<std::size_t>(j) + 1] = c[static_cast<std::size_t>(j)] * (a * a / (Scalar(2 * j + 2) * Scalar(2 * j + 3)));
    }
    return c;
}

TaylorSeries arcsin_series(long tau);

/// sum_{k <= tau} c_k x^(2k+1) with Kahan compensation.
template <class Scalar = double>
Scalar arcsin_partial(Scalar x, long tau) {
    if (!(std::abs(x) <= Scalar(1))) throw std::domain_error("arcsin_partial: |x| must be <= 1");
    if (tau < 0) throw std::invalid_argument("arcsin_partial: tau must be >= 0");
    const Scalar x2 = x * x;
    Scalar power = x;
    Scalar coeff(1);
    Scalar sum(0);
    Scalar carry(0);
    for (long k = 0; k <= tau; ++k) {
        const Scalar term = coeff * power - carry;
        const Scalar next = sum + term;
        carry = (next - sum) - term;
        sum = next;
        const Scalar a = Scalar(2 * k + 1);
        coeff *= a * a / (Scalar(2 * k + 2) * Scalar(2 * k + 3));
        power *= x2;
    }
    return sum;
}

/// pi/2 - sum_{k <= tau} c_k, i.e. the Taylor remainder at x = 1.
template <class Scalar = double>
Scalar arcsin_gap_at_one(long tau) {
    return std::numbers::pi_v<Scalar> / Scalar(2) - arcsin_partial<Scalar>(Scalar(1), tau);
}

// ---------------------------------------------------------------------------
// Gaussian facts

/// Pr[g1 >= 0 and g2 >= 0] for standard normals with correlation sigma.
template <class Scalar = double>
Scalar sheppard(Scalar sigma) {
    if (!(sigma >= Scalar(-1) && sigma <= Scalar(1))) throw std::domain_error("sheppard: sigma must lie in [-1, 1]");
    return Scalar(0.5) - std::acos(sigma) / (Scalar(2) * std::numbers::pi_v<Scalar>);
}

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

MonteCarloEstimate sheppard_mc(double sigma, std::size_t samples, std::uint64_t seed);

/// Two-sided bound on Pr[g in (0, eps)] for g ~ N(0, 1):
/// eps/sqrt(2 pi) e^(-eps^2/2) <= Pr <= eps/sqrt(2 pi).
std::pair<double, double> gaussian_core_bounds(double eps);

/// Exact Pr[g in (0, eps)] via erf.
double gaussian_core_probability(double eps);

/// argmin over rho of (1 + (2/pi) arcsin rho) / (1 + rho), about 0.689.
template <class Scalar = double>
Scalar rho_star() {
    const auto ratio = [](Scalar r) {
        return (Scalar(1) + Scalar(2) / std::numbers::pi_v<Scalar> * std::asin(r)) / (Scalar(1) + r);
    };
    // Golden-section search on [0, 1); the ratio is unimodal there.
    const Scalar inv_phi = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
    Scalar lo(0), hi(0.999);
    Scalar a = hi - inv_phi * (hi - lo);
    Scalar b = lo + inv_phi * (hi - lo);
    Scalar fa = ratio(a), fb = ratio(b);
    for (int it = 0; it < 200 && hi - lo > Scalar(1e-15); ++it) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = ratio(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = ratio(b);
        }
    }
    return (lo + hi) / Scalar(2);
}

/// Worst-case hyperplane rounding ratio, about 0.878.
template <class Scalar = double>
Scalar alpha_gw() {
    const Scalar r = rho_star<Scalar>();
    return (Scalar(1) + Scalar(2) / std::numbers::pi_v<Scalar> * std::asin(r)) / (Scalar(1) + r);
}

// ---------------------------------------------------------------------------
// Correlation matrices

/// Symmetric, unit diagonal, entries in [-1, 1], PSD up to -1e-8.
class CorrelationMatrix {
public:
    explicit CorrelationMatrix(Eigen::MatrixXd a, double psd_tol = 1e-8);

    const Eigen::MatrixXd& matrix() const noexcept { return a_; }
    Eigen::Index dim() const noexcept { return a_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }

    static CorrelationMatrix identity(Eigen::Index d) { return CorrelationMatrix(Eigen::MatrixXd::Identity(d, d)); }
    static CorrelationMatrix ones(Eigen::Index d) { return CorrelationMatrix(Eigen::MatrixXd::Ones(d, d)); }

private:
    Eigen::MatrixXd a_;
};

template <class Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.eval(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Gram matrix of `d` random unit vectors in dimension `dim`. With
/// `min_entry` > -1, vectors are redrawn until every inner product with the
/// earlier ones is >= min_entry.
CorrelationMatrix random_correlation_matrix(Eigen::Index d, Eigen::Index dim, RandomStream& rng,
                                            double min_entry = -1.0);

/// Smallest eigenvalue of B with B_ij = A_ij^t.
double entrywise_power_psd(const CorrelationMatrix& a, int t);

/// Smallest eigenvalue of B with B_ij = arcsin(A_ij).
double entrywise_arcsin_min_eigenvalue(const CorrelationMatrix& a);

/// sum_{i,j} w_i w_j arcsin(A_ij).
double arcsin_form(const CorrelationMatrix& a, const Eigen::VectorXd& w);

// ---------------------------------------------------------------------------
// Verification checks

struct CheckResult {
    std::string name;
    bool pass = false;
    std::map<std::string, double> constants;  // witnessed / fitted values
    std::string worst_case;
};

struct ArcsinSeriesOptions {
    std::vector<long> taus{16, 64, 256};
    std::vector<double> grid;  // empty: 0.01, 0.02, ..., 1.0
    std::vector<long> gap_taus{100, 400, 1600};
};

/// Items (1)-(3) of the arcsin Taylor facts, plus the c_k ~ k^(-3/2)/(2 sqrt(pi)) asymptotic.
std::vector<CheckResult> check_arcsin_series(const ArcsinSeriesOptions& opts = {});

struct ArcsinFormReport {
    CheckResult check;
    std::map<int, double> min_normalized;  // per d
};

/// Random PSD correlation matrices with entries >= -1/2 and random w >= 0;
/// records min of arcsin_form * d sqrt(ln d) / |w|_1^2 per d.
ArcsinFormReport check_arcsin_form(int trials, const std::vector<int>& d_list, std::uint64_t seed);

struct LocalGainOptions {
    /// Reject rho outside [rho* - 0.01, rho* + 0.01] and Gram entries below -0.2.
    bool enforce_hypotheses = true;
};

struct LocalGainEstimate {
    double mean = 0.0;  // E[Delta_i | i in S]
    double std_error = 0.0;
    double incident_weight = 0.0;  // W_i
    double epsilon = 0.0;
    double normalized = 0.0;  // mean * d sqrt(ln d) / W_i
    double membership_rate = 0.0;
    double membership_std_error = 0.0;
    double membership_lower = 0.0;  // two-sided Gaussian core bound on Pr[|g_1| < eps]
    double membership_upper = 0.0;
    std::size_t samples = 0;
};

/// Star configuration: center e_1, neighbors rho e_1 + sqrt(1 - rho^2) vhat_j
/// with Gram(vhat) = neighbor_gram and all signs +1. g_1 is drawn from the
/// normal law truncated to (-eps, eps); the membership rate is estimated from
/// a separate unconditioned draw.
LocalGainEstimate estimate_local_gain(int d, const CorrelationMatrix& neighbor_gram, double rho,
                                      const Eigen::VectorXd& weights, double constant, std::size_t trials,
                                      std::uint64_t seed, const LocalGainOptions& opts = {});

struct VerifyOptions {
    std::uint64_t seed = 1;
    std::vector<long> gap_taus{100, 400, 1600};
    std::size_t sheppard_samples = 100000;
    int psd_trials = 200;
    int arcsin_form_trials = 200;
    std::size_t local_gain_samples = 100000;
};

/// Runs every check; a failed hard assertion shows up as pass == false.
std::vector<CheckResult> run_verification(const VerifyOptions& opts = {});

}  // namespace gwflip
