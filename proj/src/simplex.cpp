#include "mdcms/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdcms {

namespace {

constexpr double kPivotEps = 1e-9;

// Dense tableau: rows = constraints, columns = structural + slack/surplus +
// artificial + rhs. Basis tracked per row. Bland's rule throughout, so the
// iteration is finite and deterministic.
struct Tableau {
    int rows = 0, cols = 0;           // cols excludes the rhs column
    std::vector<double> a;            // (rows+1) x (cols+1); last row = objective
    std::vector<int> basis;           // basic variable per row

    double& at(int r, int c) { return a[std::size_t(r) * (cols + 1) + c]; }
    double at(int r, int c) const { return a[std::size_t(r) * (cols + 1) + c]; }

    void pivot(int pr, int pc) {
        const double pivot_val = at(pr, pc);
        for (int c = 0; c <= cols; ++c) at(pr, c) /= pivot_val;
        for (int r = 0; r <= rows; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (int c = 0; c <= cols; ++c) at(r, c) -= f * at(pr, c);
        }
        basis[pr] = pc;
    }

    // Returns false when no entering column exists (optimal).
    bool step(const std::vector<bool>& allowed) {
        int pc = -1;
        for (int c = 0; c < cols; ++c) {
            if (!allowed[c]) continue;
            if (at(rows, c) < -kPivotEps) {
                pc = c;  // Bland: first eligible index
                break;
            }
        }
        if (pc < 0) return false;
        int pr = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < rows; ++r) {
            const double col = at(r, pc);
            if (col > kPivotEps) {
                const double ratio = at(r, cols) / col;
                if (ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 && (pr < 0 || basis[r] < basis[pr]))) {
                    best = ratio;
                    pr = r;
                }
            }
        }
        if (pr < 0) throw std::runtime_error("unbounded LP");
        pivot(pr, pc);
        return true;
    }
};

}  // namespace

LpSolution solve_min(const std::vector<double>& objective,
                     const std::vector<LinearConstraint>& constraints) {
    const int n = int(objective.size());
    const int m = int(constraints.size());
    for (const auto& c : constraints)
        if (int(c.coeffs.size()) != n)
            throw std::invalid_argument("constraint arity mismatch");

    // Column layout: [0,n) structural, [n, n+m) slack/surplus, [n+m, ...) artificial.
    int num_art = 0;
    std::vector<int> art_col(m, -1);
    for (int r = 0; r < m; ++r) {
        const auto& c = constraints[r];
        const bool rhs_neg = c.rhs < 0.0;
        Relation rel = c.relation;
        if (rhs_neg && rel != Relation::Equal)
            rel = (rel == Relation::GreaterEq) ? Relation::LessEq : Relation::GreaterEq;
        // after sign normalization, >= and = rows need an artificial
        if (rel != Relation::LessEq) ++num_art;
    }

    Tableau t;
    t.rows = m;
    t.cols = n + m + num_art;
    t.a.assign(std::size_t(t.rows + 1) * (t.cols + 1), 0.0);
    t.basis.assign(m, -1);

    int next_art = n + m;
    for (int r = 0; r < m; ++r) {
        const auto& c = constraints[r];
        double sign = (c.rhs < 0.0) ? -1.0 : 1.0;
        Relation rel = c.relation;
        if (sign < 0.0 && rel != Relation::Equal)
            rel = (rel == Relation::GreaterEq) ? Relation::LessEq : Relation::GreaterEq;
        for (int j = 0; j < n; ++j) t.at(r, j) = sign * c.coeffs[j];
        t.at(r, t.cols) = sign * c.rhs;
        if (rel == Relation::LessEq) {
            t.at(r, n + r) = 1.0;   // slack, starts basic
            t.basis[r] = n + r;
        } else {
            if (rel == Relation::GreaterEq) t.at(r, n + r) = -1.0;  // surplus
            t.at(r, next_art) = 1.0;
            t.basis[r] = next_art;
            art_col[r] = next_art;
            ++next_art;
        }
    }

    std::vector<bool> allowed(t.cols, true);

    // Phase 1: minimize the sum of artificials.
    if (num_art > 0) {
        for (int c = n + m; c < t.cols; ++c) t.at(t.rows, c) = 1.0;
        for (int r = 0; r < m; ++r)
            if (art_col[r] >= 0)
                for (int c = 0; c <= t.cols; ++c) t.at(t.rows, c) -= t.at(r, c);
        while (t.step(allowed)) {
        }
        if (t.at(t.rows, t.cols) < -1e-7) return {LpStatus::Infeasible, 0.0, {}};
        // Pivot any artificial still in the basis out (degenerate rows).
        for (int r = 0; r < m; ++r) {
            if (t.basis[r] >= n + m) {
                int pc = -1;
                for (int c = 0; c < n + m; ++c)
                    if (std::abs(t.at(r, c)) > kPivotEps) {
                        pc = c;
                        break;
                    }
                if (pc >= 0) t.pivot(r, pc);
            }
        }
        for (int c = n + m; c < t.cols; ++c) allowed[c] = false;
    }

    // Phase 2: restore the real objective and re-reduce over the basis.
    for (int c = 0; c <= t.cols; ++c) t.at(t.rows, c) = 0.0;
    for (int j = 0; j < n; ++j) t.at(t.rows, j) = objective[j];
    for (int r = 0; r < m; ++r) {
        const int b = t.basis[r];
        if (b < n && objective[b] != 0.0) {
            const double f = objective[b];
            for (int c = 0; c <= t.cols; ++c) t.at(t.rows, c) -= f * t.at(r, c);
        }
    }
    try {
        while (t.step(allowed)) {
        }
    } catch (const std::runtime_error&) {
        return {LpStatus::Unbounded, 0.0, {}};
    }

    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.assign(n, 0.0);
    for (int r = 0; r < m; ++r)
        if (t.basis[r] < n) sol.x[t.basis[r]] = t.at(r, t.cols);
    sol.objective = 0.0;
    for (int j = 0; j < n; ++j) sol.objective += objective[j] * sol.x[j];
    return sol;
}

}  // namespace mdcms
