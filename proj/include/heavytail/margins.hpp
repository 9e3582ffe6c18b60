#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/rational.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

// Largest dimension for which subset-indexed constants (K_i ladders, hyperplane
// enumerations downstream) are allowed; beyond this the counts are astronomical.
constexpr int kMaxMarginDim = 25;

enum class MarginKind { IidPareto, DependentPareto };

// Marginal law of the unobserved heavy-tailed vector Z.
//   IidPareto:       independent coordinates, P(Z_j > z) = kappa_j z^(-alpha) above kappa_j^(1/alpha).
//   DependentPareto: d = 3 coordinates with the same Pareto margins, bivariate margins exactly
//                    independent, and a (rho, theta)-parametrised perturbation of the triple joint law.
struct MarginalModel {
    MarginKind kind = MarginKind::IidPareto;
    double alpha = 1.0;
    std::vector<Rat> kappa;
    Rat rho = 1;
    Rat theta = 0;

    // Cached doubles for the sampling paths.
    std::vector<double> kappa_d;
    double inv_alpha = 1.0;

    int dim() const { return static_cast<int>(kappa.size()); }
    // True when alpha is a (small) integer, enabling the exact rational constant paths.
    bool alpha_integral() const { return alpha == std::floor(alpha) && alpha >= 1 && alpha <= 64; }
    long alpha_int() const { return static_cast<long>(alpha); }
};

inline MarginalModel iid_pareto(double alpha, std::vector<Rat> kappa) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw validation_error("iid_pareto: alpha must be > 0");
    if (kappa.empty()) throw validation_error("iid_pareto: kappa must be non-empty");
    if (static_cast<int>(kappa.size()) > kMaxMarginDim)
        throw capacity_error("iid_pareto: dimension cap " + std::to_string(kMaxMarginDim) + " exceeded");
    for (const Rat& k : kappa)
        if (k <= 0) throw validation_error("iid_pareto: kappa entries must be > 0");
    MarginalModel m;
    m.kind = MarginKind::IidPareto;
    m.alpha = alpha;
    m.kappa = std::move(kappa);
    m.inv_alpha = 1.0 / alpha;
    for (const Rat& k : m.kappa) m.kappa_d.push_back(to_double(k));
    return m;
}

inline MarginalModel dependent_pareto(double alpha, std::vector<Rat> kappa, Rat rho, Rat theta) {
    if (kappa.size() != 3) throw validation_error("dependent_pareto: requires exactly 3 coordinates");
    if (rho < 1) throw validation_error("dependent_pareto: rho must be >= 1");
    if (theta < 0 || theta > 1) throw validation_error("dependent_pareto: theta must be in [0, 1]");
    MarginalModel m = iid_pareto(alpha, std::move(kappa));
    m.kind = MarginKind::DependentPareto;
    m.rho = std::move(rho);
    m.theta = std::move(theta);
    return m;
}

// P(Z_j > z), exact at all z (the law lives above kappa_j^(1/alpha)).
inline double marginal_survival(const MarginalModel& m, int j, double z) {
    if (j < 0 || j >= m.dim()) throw validation_error("marginal_survival: coordinate out of range");
    if (z <= 0.0) return 1.0;
    return std::min(1.0, m.kappa_d[j] * std::pow(z, -m.alpha));
}

// Elementary symmetric polynomial ladder e_0..e_d of the kappa vector; e_i is the
// sum over i-subsets of kappa products. Recurrence form of the subset sum.
inline std::vector<Rat> kappa_subset_sums(const std::vector<Rat>& kappa) {
    std::vector<Rat> e(kappa.size() + 1, Rat(0));
    e[0] = 1;
    for (std::size_t j = 0; j < kappa.size(); ++j)
        for (std::size_t i = std::min(j + 1, kappa.size()); i >= 1; --i) e[i] += kappa[j] * e[i - 1];
    return e;
}

// Asymptotic tail of the i-th largest coordinate: P(Z^(i) > t) ~ constant * t^(-exponent).
struct OrderStatTail {
    double exponent = 0.0;
    double constant = 0.0;
    Rat constant_exact = 0;
};

inline OrderStatTail order_stat_tail(const MarginalModel& m, int i) {
    if (i < 1 || i > m.dim()) throw validation_error("order_stat_tail: i out of range");
    OrderStatTail out;
    if (m.kind == MarginKind::IidPareto) {
        out.exponent = i * m.alpha;
        out.constant_exact = kappa_subset_sums(m.kappa)[i];
    } else {
        if (m.rho != 1 || m.theta != 1)
            throw unsupported_model_error(
                "order_stat_tail: dependent closed forms implemented only for rho = theta = 1");
        std::vector<Rat> e = kappa_subset_sums(m.kappa);
        if (i == 1) {
            out.exponent = m.alpha;
            out.constant_exact = e[1];
        } else if (i == 2) {
            out.exponent = 2 * m.alpha;
            out.constant_exact = e[2];
        } else {
            // The triple tail loses one full tail order relative to independence.
            out.exponent = 4 * m.alpha;
            out.constant_exact = e[3] * e[1];
        }
    }
    out.constant = to_double(out.constant_exact);
    return out;
}

// b_i(t) = (constant * t)^(1/exponent): P(Z^(i) > b_i(t)) ~ 1/t.
inline double canonical_scaling(const MarginalModel& m, int i, double t) {
    if (!(t > 0.0)) throw validation_error("canonical_scaling: t must be > 0");
    OrderStatTail tail = order_stat_tail(m, i);
    return std::pow(tail.constant * t, 1.0 / tail.exponent);
}

// P(Z_1 > t, ..., Z_d > t), exact at finite t.
// Dependent model: survival inclusion-exclusion of the joint CDF collapses to
//   u1 u2 u3 - theta (u1 u2 u3)^rho (1-u1)(1-u2)(1-u3),  u_j = kappa_j t^(-alpha).
inline double exact_joint_tail(const MarginalModel& m, double t) {
    if (!(t > 0.0)) throw validation_error("exact_joint_tail: t must be > 0");
    // Below a coordinate's support threshold its survival saturates at 1, and the
    // vanishing complement factor collapses the formula to the reduced survival.
    std::vector<double> u(m.dim());
    for (int j = 0; j < m.dim(); ++j) u[j] = marginal_survival(m, j, t);
    double prod = 1.0;
    for (double uj : u) prod *= uj;
    if (m.kind == MarginKind::IidPareto) return prod;
    double pert = to_double(m.theta) * std::pow(prod, to_double(m.rho));
    double comp = (1.0 - u[0]) * (1.0 - u[1]) * (1.0 - u[2]);
    return prod - pert * comp;
}

// P(Z^(i) > t), exact at finite t (not just to leading order).
inline double exact_order_stat_tail(const MarginalModel& m, int i, double t) {
    if (i < 1 || i > m.dim()) throw validation_error("exact_order_stat_tail: i out of range");
    std::vector<double> u(m.dim());
    for (int j = 0; j < m.dim(); ++j) u[j] = marginal_survival(m, j, t);
    if (m.kind == MarginKind::IidPareto) {
        // P(at least i exceed) = sum_{l>=i} (-1)^(l-i) C(l-1, i-1) e_l(u).
        std::vector<double> e(m.dim() + 1, 0.0);
        e[0] = 1.0;
        for (int j = 0; j < m.dim(); ++j)
            for (int l = std::min(j + 1, m.dim()); l >= 1; --l) e[l] += u[j] * e[l - 1];
        double p = 0.0;
        double sign = 1.0;
        for (int l = i; l <= m.dim(); ++l) {
            p += sign * static_cast<double>(binom(l - 1, i - 1)) * e[l];
            sign = -sign;
        }
        return std::min(1.0, std::max(0.0, p));
    }
    double p3 = exact_joint_tail(m, t);
    if (i == 3) return p3;
    if (i == 2) return u[0] * u[1] + u[0] * u[2] + u[1] * u[2] - 2.0 * p3;
    double pert = to_double(m.theta) * std::pow(u[0] * u[1] * u[2], to_double(m.rho));
    double comp = (1.0 - u[0]) * (1.0 - u[1]) * (1.0 - u[2]);
    return 1.0 - (1.0 + pert) * comp;
}

namespace detail {

// Conditional CDF of the third coordinate given the first two, in u-space
// (u = kappa z^(-alpha), decreasing in z): F(z3 | z1, z2) = (1 - u3)(1 + a u3^rho)
// with a = theta (u1 u2)^rho B1 B2 and B_j = 1 - rho (1 - u_j)/u_j.
inline double dependent_third_coefficient(const MarginalModel& m, double u1, double u2) {
    double rho = to_double(m.rho);
    double b1 = 1.0 - rho * (1.0 - u1) / u1;
    double b2 = 1.0 - rho * (1.0 - u2) / u2;
    return to_double(m.theta) * std::pow(u1 * u2, rho) * b1 * b2;
}

// Solve (1 - u)(1 + a u^rho) = v for u in [0, 1]; the left side decreases from 1 to 0.
inline double solve_third_u(double a, double rho, double v) {
    if (rho == 1.0) {
        // Quadratic a u^2 + (1 - a) u - (1 - v) = 0; stable root in [0, 1].
        if (std::abs(a) < 1e-300) return 1.0 - v;
        double disc = (1.0 - a) * (1.0 - a) + 4.0 * a * (1.0 - v);
        double root = 2.0 * (1.0 - v) / ((1.0 - a) + std::sqrt(std::max(0.0, disc)));
        return std::min(1.0, std::max(0.0, root));
    }
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 64 && hi - lo > 1e-12; ++iter) {
        double mid = 0.5 * (lo + hi);
        double f = (1.0 - mid) * (1.0 + a * std::pow(mid, rho));
        (f > v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Draw one vector Z. Every coordinate lands in [kappa_j^(1/alpha), infinity).
inline std::vector<double> sample(const MarginalModel& m, Rng& rng) {
    std::vector<double> z(m.dim());
    if (m.kind == MarginKind::IidPareto) {
        for (int j = 0; j < m.dim(); ++j) {
            double u = rng.u01_open_closed();
            z[j] = m.alpha == 1.0 ? m.kappa_d[j] / u : std::pow(m.kappa_d[j] / u, m.inv_alpha);
        }
        return z;
    }
    // Sequential conditional inversion. The first two coordinates are exactly
    // independent; the third is inverted from its closed-form conditional CDF.
    double u1 = rng.u01_open_closed();
    double u2 = rng.u01_open_closed();
    double v = rng.u01_half_open();
    double a = detail::dependent_third_coefficient(m, u1, u2);
    double u3 = detail::solve_third_u(a, to_double(m.rho), v);
    u3 = std::max(u3, 1e-300);
    if (m.alpha == 1.0) {
        z[0] = m.kappa_d[0] / u1;
        z[1] = m.kappa_d[1] / u2;
        z[2] = m.kappa_d[2] / u3;
    } else {
        z[0] = std::pow(m.kappa_d[0] / u1, m.inv_alpha);
        z[1] = std::pow(m.kappa_d[1] / u2, m.inv_alpha);
        z[2] = std::pow(m.kappa_d[2] / u3, m.inv_alpha);
    }
    return z;
}

}  // namespace heavytail
