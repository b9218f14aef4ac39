#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esched/eval.hpp"
#include "esched/milp.hpp"
#include "esched/power.hpp"
#include "esched/taskgraph.hpp"

namespace esched {

/// Fixed processor assignment plus per-processor task order (the discrete
/// part of a schedule, with start times and splits left open).
struct Configuration {
    int processors = 0;
    std::vector<int> assignment;          // index = task id (0 unused), value 1..K
    std::vector<std::vector<int>> order;  // [k-1] = task ids in execution order

    // Deterministic comparison key used for tie-breaking.
    std::string key() const;
};

struct ExactLimits {
    int max_tasks = 8;
    int max_processors = 3;
    int max_freqs = 5;
    long node_budget = 0;        // branch-and-bound nodes, 0 = unlimited
    double time_budget_s = 0.0;  // wall clock seconds, 0 = unlimited
};

struct SubproblemResult {
    bool feasible = false;
    bool truncated = false;  // a budget stopped the search early
    double energy = 0.0;
    Schedule schedule;
};

// Optimal start times, frequency splits, and switch decisions for a fixed
// configuration. Switch booleans are resolved by branch and bound over LP
// relaxations; unresolved intervals are under-estimated by min(c, e_sw/Td)*I.
// With objective IscPlusT only execution energy is minimized, the returned
// start times are as-soon-as-possible, and no switches are recorded.
// Subtrees whose bound exceeds `cutoff` are pruned; results with
// energy <= cutoff are always exact.
SubproblemResult continuous_subproblem(const TaskGraph& graph, const PowerModel& power,
                                       const Configuration& config,
                                       ModelKind objective = ModelKind::Isct,
                                       double cutoff = 1e300);

struct ExactResult {
    bool feasible = false;
    bool optimal = false;  // proof of optimality (no budget truncation)
    double energy = 0.0;
    Schedule schedule;
    Configuration configuration;
    long configurations_examined = 0;
    long nodes = 0;
};

// Provably optimal schedule over all configurations within the limits.
// Deterministic: minimum energy, ties broken by the lexicographically
// smallest configuration key; invariant under the thread count.
// Throws BudgetError when the instance exceeds the size caps.
ExactResult exact_schedule(const TaskGraph& graph, const PowerModel& power, int K,
                           const ExactLimits& limits = {},
                           ModelKind objective = ModelKind::Isct, int threads = 1,
                           double seed_incumbent = 1e300);

struct OracleBracket {
    double lower = 0.0;
    double upper = 0.0;
};

// Exhaustive reference bracket for tiny instances (n <= 4, m <= 3):
// assignments and orders fully enumerated, execution energy bounded per
// duration box on a time grid, idle energy bounded by interval merging.
// Cycle-grid splits cross-check the per-task execution minima.
OracleBracket discretized_oracle(const TaskGraph& graph, const PowerModel& power, int K,
                                 std::int64_t cycle_granularity, double time_granularity);

}  // namespace esched
