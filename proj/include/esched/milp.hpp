#pragma once

#include <map>
#include <string>
#include <vector>

#include "esched/eval.hpp"
#include "esched/lp.hpp"
#include "esched/power.hpp"
#include "esched/taskgraph.hpp"

namespace esched {

enum class VarKind { Continuous, Binary };

/// Sparse linear expression over model variables.
struct LinExpr {
    std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
    double constant = 0.0;

    LinExpr& add(int var, double coef) {
        terms.emplace_back(var, coef);
        return *this;
    }
    static LinExpr of(int var, double coef = 1.0) {
        LinExpr e;
        e.add(var, coef);
        return e;
    }
};

/// Model variable. Variables introduced as linearization products or as
/// definitional equalities carry enough metadata to recompute their value
/// from a concrete schedule.
struct VarRef {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lo = 0.0;
    double hi = 0.0;

    enum class Def { Free, Defined, Product };
    Def def = Def::Free;
    int product_binary = -1;  // Product: value = value(binary) * value(expr)
    LinExpr def_expr;         // Defined: value = value(expr); Product: the x factor
};

struct ModelRow {
    std::string name;
    std::string family;  // constraint family tag, C1..C12
    LinExpr expr;
    Rel rel = Rel::LE;
    double rhs = 0.0;
};

enum class ModelKind { Isct, IscPlusT };

/// Fully linearized scheduling model: named variables, linear rows, linear
/// objective to minimize, plus the instance context needed to interpret and
/// verify solutions.
struct MilpModel {
    ModelKind kind = ModelKind::Isct;
    int n = 0;  // tasks
    int m = 0;  // frequencies
    int K = 0;  // processors
    double period = 0.0;
    double t_be = 0.0;

    std::vector<VarRef> vars;
    std::vector<ModelRow> rows;
    LinExpr objective;

    // Variable index tables (task/processor ids 1-based; index 0 unused).
    std::vector<int> start_ix, dur_ix, i_ix, sw_ix, first_ix;
    std::vector<std::vector<int>> n_ix;                 // [u][i], i 0-based
    std::vector<std::vector<int>> p_ix;                 // [k][u]
    std::vector<std::vector<std::vector<int>>> o_ix;    // [k][u][v], -1 if absent
    std::vector<int> ip_ix, swp_ix, used_ix;            // [k]

    int add_var(const std::string& name, VarKind kind, double lo, double hi);
    void add_row(const std::string& family, const std::string& name, LinExpr expr, Rel rel,
                 double rhs);

    // Lemma: t = b * x for binary b and expression x bounded to [-s1, s2].
    // Emits -s1*b <= t <= s2*b, t + s1*b - x - s1 <= 0, t - s2*b - x + s2 >= 0
    // and bounds t to [-s1, s2]. Returns the index of t.
    int linearize_bool_times_real(const std::string& family, const std::string& t_name, int b,
                                  const LinExpr& x, double s1, double s2);

    // Lemma: z = x * y for binaries x, y. Emits z <= x, z <= y,
    // x + y - z <= 1. Returns the index of (binary) z.
    int linearize_bool_times_bool(const std::string& family, const std::string& z_name, int x,
                                  int y);

    int var_index(const std::string& name) const;  // -1 if unknown
    int count_vars_with_prefix(const std::string& prefix) const;
    int count_rows_in_family(const std::string& family) const;
    double eval(const LinExpr& expr, const std::vector<double>& values) const;
    double objective_value(const std::vector<double>& values) const;

    std::string fresh_aux_name() { return "aux_" + std::to_string(aux_counter_++); }

  private:
    int aux_counter_ = 0;
};

/// Variable name -> value.
using Solution = std::map<std::string, double>;

// Full joint model: objective covers execution and idle energy; constraint
// families C1..C11 as documented in export order.
MilpModel build_isct_model(const TaskGraph& graph, const PowerModel& power, int K);

// Baseline model: same core constraints (C1..C7), execution energy only.
MilpModel build_isc_t_model(const TaskGraph& graph, const PowerModel& power, int K);

// LP text export: Minimize / Subject To / Bounds / Binary / End, declaration
// order, 12 significant digits, deterministic bytes.
std::string export_lp(const MilpModel& model);

// Solution text: one `<name> <value>` per line, '#' comments. Binaries within
// 1e-6 of an integer are rounded. Unknown, missing, or non-numeric entries
// raise ParseError.
Solution parse_solution(const std::string& text, const MilpModel& model);

// Values vector in variable declaration order; throws on missing names.
std::vector<double> solution_values(const MilpModel& model, const Solution& solution);

// Row/bound/integrality residual check.
std::vector<Violation> check_solution(const MilpModel& model, const std::vector<double>& values);

// Complete model solution for a concrete schedule: base variables from the
// placements, definitional and product variables recomputed in declaration
// order.
Solution embed_schedule(const MilpModel& model, const TaskGraph& graph, const PowerModel& power,
                        const Schedule& schedule);

struct VerifyResult {
    Schedule schedule;
    double model_objective = 0.0;
    double eval_energy = 0.0;  // NaN when the schedule is invalid
    std::vector<Violation> violations;
};

// Independent check: rebuilds the schedule from start/n/p values, validates
// scheduling semantics, and recomputes the energy from schedule semantics
// rather than the model objective.
VerifyResult verify_solution(const MilpModel& model, const TaskGraph& graph,
                             const PowerModel& power, const Solution& solution);

}  // namespace esched
