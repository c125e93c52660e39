#include "hypercross/simplex.hpp"

#include <stdexcept>

namespace hypercross {

namespace {

// Dense tableau.  Rows 0..m-1 are constraints, row m is the (phase)
// objective.  Column layout: structural vars, slacks, artificials, rhs.
struct Tableau {
    int m, n;  // constraints, total columns excluding rhs
    std::vector<std::vector<Rational>> t;
    std::vector<int> basis;

    Rational& at(int r, int c) { return t[r][c]; }

    void pivot(int r, int c) {
        Rational p = t[r][c];
        for (auto& v : t[r]) v /= p;
        for (int i = 0; i <= m; ++i) {
            if (i == r || t[i][c].is_zero()) continue;
            Rational f = t[i][c];
            for (int j = 0; j <= n; ++j) t[i][j] -= f * t[r][j];
        }
        basis[r] = c;
    }

    // Bland's rule: entering = smallest column with negative reduced cost,
    // leaving = smallest-index basic row among min-ratio candidates.
    bool iterate(int ncols_usable) {
        while (true) {
            int col = -1;
            for (int j = 0; j < ncols_usable; ++j)
                if (t[m][j] < Rational(0)) {
                    col = j;
                    break;
                }
            if (col < 0) return true;  // optimal
            int row = -1;
            Rational best;
            for (int i = 0; i < m; ++i) {
                if (!(t[i][col] > Rational(0))) continue;
                Rational ratio = t[i][n] / t[i][col];
                if (row < 0 || ratio < best ||
                    (ratio == best && basis[i] < basis[row])) {
                    row = i;
                    best = ratio;
                }
            }
            if (row < 0) throw std::runtime_error("simplex: unbounded");
            pivot(row, col);
        }
    }
};

}  // namespace

std::optional<LpSolution> solve_lp_min(const std::vector<std::vector<Rational>>& A,
                                       const std::vector<Rational>& b,
                                       const std::vector<Rational>& c) {
    int m = int(A.size());
    int nv = int(c.size());
    // Standard form: A x + s = b with s >= 0; flip rows with b < 0 and give
    // them artificial variables.
    std::vector<int> art_rows;
    for (int i = 0; i < m; ++i)
        if (b[i] < Rational(0)) art_rows.push_back(i);
    int na = int(art_rows.size());
    int n = nv + m + na;

    Tableau tb;
    tb.m = m;
    tb.n = n;
    tb.t.assign(m + 1, std::vector<Rational>(n + 1, Rational(0)));
    tb.basis.assign(m, -1);

    int ak = 0;
    for (int i = 0; i < m; ++i) {
        bool flip = b[i] < Rational(0);
        for (int j = 0; j < nv; ++j) tb.at(i, j) = flip ? -A[i][j] : A[i][j];
        tb.at(i, nv + i) = flip ? Rational(-1) : Rational(1);  // slack
        tb.at(i, n) = flip ? -b[i] : b[i];
        if (flip) {
            tb.at(i, nv + m + ak) = Rational(1);
            tb.basis[i] = nv + m + ak;
            ++ak;
        } else {
            tb.basis[i] = nv + i;
        }
    }

    if (na > 0) {
        // Phase 1: minimize sum of artificials.
        for (int i = 0; i < m; ++i)
            if (tb.basis[i] >= nv + m)
                for (int j = 0; j <= n; ++j) tb.at(m, j) -= tb.at(i, j);
        tb.iterate(n);
        if (!tb.at(m, n).is_zero() && !(-tb.at(m, n)).is_zero())
            return std::nullopt;  // infeasible
        if (tb.at(m, n) != Rational(0)) return std::nullopt;
        // Drive any artificial still in the basis out if possible.
        for (int i = 0; i < m; ++i) {
            if (tb.basis[i] < nv + m) continue;
            int col = -1;
            for (int j = 0; j < nv + m; ++j)
                if (!tb.at(i, j).is_zero()) {
                    col = j;
                    break;
                }
            if (col >= 0) tb.pivot(i, col);
        }
    }

    // Phase 2 objective.
    for (int j = 0; j <= n; ++j) tb.at(m, j) = Rational(0);
    for (int j = 0; j < nv; ++j) tb.at(m, j) = c[j];
    for (int i = 0; i < m; ++i) {
        int bj = tb.basis[i];
        if (bj < nv && !c[bj].is_zero()) {
            Rational f = c[bj];
            for (int j = 0; j <= n; ++j) tb.at(m, j) -= f * tb.at(i, j);
        }
    }
    tb.iterate(nv + m);  // artificials stay out

    LpSolution sol;
    sol.x.assign(nv, Rational(0));
    for (int i = 0; i < m; ++i)
        if (tb.basis[i] < nv) sol.x[tb.basis[i]] = tb.at(i, tb.n);
    sol.objective = -tb.at(m, tb.n);
    return sol;
}

}  // namespace hypercross
