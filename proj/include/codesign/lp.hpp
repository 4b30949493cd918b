#pragma once

// Small dense LP solver: min c.x subject to A x = b and lo <= x <= hi.
// Two-phase tableau simplex with Bland's rule; upper bounds become slack rows.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "codesign/errors.hpp"

namespace codesign {

struct LpProblem {
    std::vector<double> objective;          // c, length p
    std::vector<std::vector<double>> rows;  // A, k rows of length p
    std::vector<double> rhs;                // b, length k
    std::vector<double> lower, upper;       // per-variable bounds
};

struct LpResult {
    bool feasible = false;
    std::vector<double> x;
    double value = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0) {}

    double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return t_[r * (n_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, n_); }
    double& cost(std::size_t c) { return at(m_, c); }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double pv = at(pr, pc);
        for (std::size_t c = 0; c <= n_; ++c) at(pr, c) /= pv;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
        }
    }

private:
    std::size_t m_, n_;
    std::vector<double> t_;
};

// Runs simplex iterations on the cost row until optimal. Columns with allowed[c] == false
// never enter. Returns false if the problem is unbounded (cannot happen with box bounds).
inline bool run_simplex(Tableau& t, std::vector<std::size_t>& basis, const std::vector<bool>& allowed,
                        const std::vector<bool>& active_row) {
    constexpr double eps = 1e-11;
    const std::size_t guard = 50'000;
    for (std::size_t iter = 0; iter < guard; ++iter) {
        std::size_t enter = t.cols();
        for (std::size_t c = 0; c < t.cols(); ++c) {
            if (allowed[c] && t.cost(c) < -eps) {
                enter = c;
                break;
            }
        }
        if (enter == t.cols()) return true;
        std::size_t leave = t.rows();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < t.rows(); ++r) {
            if (!active_row[r]) continue;
            const double a = t.at(r, enter);
            if (a <= eps) continue;
            const double ratio = t.rhs(r) / a;
            if (leave == t.rows() || ratio < best - 1e-12 ||
                (std::abs(ratio - best) <= 1e-12 && basis[r] < basis[leave])) {
                best = ratio;
                leave = r;
            }
        }
        if (leave == t.rows()) return false;
        t.pivot(leave, enter);
        basis[leave] = enter;
    }
    throw internal_error("simplex iteration guard reached");
}

}  // namespace detail

inline LpResult solve_min(const LpProblem& lp) {
    const std::size_t p = lp.objective.size();
    const std::size_t k = lp.rows.size();
    if (p == 0) throw contract_violation("LP has no variables");
    if (lp.rhs.size() != k || lp.lower.size() != p || lp.upper.size() != p)
        throw contract_violation("LP dimension mismatch");
    for (const auto& row : lp.rows)
        if (row.size() != p) throw contract_violation("LP dimension mismatch");
    for (std::size_t j = 0; j < p; ++j) {
        if (!std::isfinite(lp.lower[j]) || !std::isfinite(lp.upper[j]))
            throw contract_violation("LP bounds must be finite");
        if (lp.lower[j] > lp.upper[j]) throw contract_violation("LP lower bound exceeds upper bound");
    }

    // Columns: y (p) | slacks s (p) | artificials (k). Rows: k equalities, then p bound rows.
    const std::size_t n = 2 * p + k;
    const std::size_t m = k + p;
    detail::Tableau t(m, n);
    std::vector<std::size_t> basis(m);
    double scale = 1.0;
    for (std::size_t r = 0; r < k; ++r) {
        double b = lp.rhs[r];
        for (std::size_t j = 0; j < p; ++j) b -= lp.rows[r][j] * lp.lower[j];
        const double sign = b < 0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < p; ++j) t.at(r, j) = sign * lp.rows[r][j];
        t.at(r, 2 * p + r) = 1.0;
        t.rhs(r) = sign * b;
        basis[r] = 2 * p + r;
        scale = std::max(scale, std::abs(b));
    }
    for (std::size_t j = 0; j < p; ++j) {
        const std::size_t r = k + j;
        t.at(r, j) = 1.0;
        t.at(r, p + j) = 1.0;
        t.rhs(r) = lp.upper[j] - lp.lower[j];
        basis[r] = p + j;
    }

    // Phase 1: minimize the sum of artificials (cost row = -sum of equality rows).
    for (std::size_t c = 0; c <= n; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < k; ++r) s += t.at(r, c);
        t.at(m, c) = (c >= 2 * p && c < n) ? 0.0 : -s;
    }
    std::vector<bool> allowed(n, true);
    std::vector<bool> active(m, true);
    detail::run_simplex(t, basis, allowed, active);
    const double infeasibility = -t.at(m, n);
    if (infeasibility > 1e-9 * scale) return {};

    // Drive artificials out of the basis; rows where that is impossible are redundant.
    for (std::size_t r = 0; r < k; ++r) {
        if (basis[r] < 2 * p) continue;
        std::size_t col = n;
        double best = 1e-9;
        for (std::size_t c = 0; c < 2 * p; ++c) {
            if (std::abs(t.at(r, c)) > best) {
                best = std::abs(t.at(r, c));
                col = c;
            }
        }
        if (col == n) {
            active[r] = false;
            continue;
        }
        t.pivot(r, col);
        basis[r] = col;
    }
    for (std::size_t c = 2 * p; c < n; ++c) allowed[c] = false;

    // Phase 2: reduced costs of c over the current basis.
    for (std::size_t c = 0; c <= n; ++c) t.at(m, c) = (c < p) ? lp.objective[c] : 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        if (!active[r]) continue;
        const double cb = basis[r] < p ? lp.objective[basis[r]] : 0.0;
        if (cb == 0.0) continue;
        for (std::size_t c = 0; c <= n; ++c) t.at(m, c) -= cb * t.at(r, c);
    }
    if (!detail::run_simplex(t, basis, allowed, active)) throw internal_error("bounded LP reported unbounded");

    LpResult out;
    out.feasible = true;
    out.x = lp.lower;
    for (std::size_t r = 0; r < m; ++r)
        if (active[r] && basis[r] < p) out.x[basis[r]] += t.rhs(r);
    for (std::size_t j = 0; j < p; ++j) out.x[j] = std::min(std::max(out.x[j], lp.lower[j]), lp.upper[j]);
    out.value = 0;
    for (std::size_t j = 0; j < p; ++j) out.value += lp.objective[j] * out.x[j];
    return out;
}

inline LpResult solve_max(LpProblem lp) {
    for (auto& c : lp.objective) c = -c;
    LpResult r = solve_min(lp);
    if (r.feasible) r.value = -r.value;
    return r;
}

}  // namespace codesign
