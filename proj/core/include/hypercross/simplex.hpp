#pragma once

#include <optional>
#include <vector>

#include "hypercross/rational.hpp"

namespace hypercross {

// Minimize c.x subject to A x <= b, x >= 0, with exact rational pivots.
// Two-phase simplex with Bland's rule.  Returns nullopt when infeasible;
// throws on unbounded problems (callers here always have bounded ones).
struct LpSolution {
    Rational objective;
    std::vector<Rational> x;
};

std::optional<LpSolution> solve_lp_min(const std::vector<std::vector<Rational>>& A,
                                       const std::vector<Rational>& b,
                                       const std::vector<Rational>& c);

}  // namespace hypercross
