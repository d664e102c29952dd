#pragma once
// Small dense two-phase simplex with Bland's rule. The constraint systems
// evaluated here are tiny (tens of rows), so a deterministic tableau method
// beats pulling in an external solver.
#include <string>
#include <vector>

namespace mdcms {

enum class Relation { GreaterEq, LessEq, Equal };

struct LinearConstraint {
    std::vector<double> coeffs;  // one per structural variable
    Relation relation = Relation::GreaterEq;
    double rhs = 0.0;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

// Minimize c.x subject to the constraints and x >= 0.
LpSolution solve_min(const std::vector<double>& objective,
                     const std::vector<LinearConstraint>& constraints);

}  // namespace mdcms
