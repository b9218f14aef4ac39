#pragma once

#include <limits>
#include <vector>

namespace esched {

enum class Rel { LE, EQ, GE };

struct LpRow {
    std::vector<double> coeffs;  // dense, one per variable
    Rel rel = Rel::LE;
    double rhs = 0.0;
};

/// Small dense linear program: minimize objective subject to rows and
/// per-variable bounds. Lower bounds must be finite; upper bounds may be
/// +infinity.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<LpRow> rows;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int add_var(double lo, double hi, double cost = 0.0);
    void add_row(std::vector<double> coeffs, Rel rel, double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> values;  // one per structural variable
    double objective = 0.0;
    // Diagnostics for optimality checks: row duals and structural reduced
    // costs taken from the final basis.
    std::vector<double> duals;
    std::vector<double> reduced_costs;
};

// Bounded-variable primal simplex, two phases, Bland's rule throughout
// (smallest-index entering variable, smallest-index blocking variable on
// ratio ties), which precludes cycling and makes every solve deterministic.
LpOutcome solve_lp(const LinearProgram& lp);

constexpr double kLpInf = std::numeric_limits<double>::infinity();

}  // namespace esched
