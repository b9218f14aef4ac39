#pragma once

#include <cstdint>
#include <vector>

#include "esched/exact.hpp"

namespace esched {

/// Stage-1 output: the fixed configuration plus the provisional timing the
/// list scheduler produced at maximum frequency.
struct HeftResult {
    Configuration configuration;
    std::vector<double> start;   // by task id, f_max placement
    std::vector<double> finish;  // by task id
    double makespan = 0.0;
};

// Insertion-based list scheduling: tasks in decreasing upward-rank order,
// each placed into the first idle slot of length >= W/f_max after its
// ready time, on the processor giving the earliest finish. Ties break to the
// lowest task id / processor index; a nonzero seed randomizes rank ties.
// Throws InfeasibleError when the placement cannot meet the period even at
// f_max.
HeftResult heft_assign(const TaskGraph& graph, const PowerModel& power, int K,
                       std::uint64_t tie_break_seed = 0);

struct HeuristicResult {
    double energy = 0.0;
    Schedule schedule;
    Configuration configuration;
    double stage1_seconds = 0.0;
    double stage2_seconds = 0.0;
};

// Stage 2: optimal start times, splits, and switch decisions for the fixed
// configuration (same machinery as the exact solver's subproblem). With
// objective IscPlusT the baseline pipeline is used: execution-only
// optimization, earliest starts, then post-hoc sleep decisions.
HeuristicResult refine_continuous(const TaskGraph& graph, const PowerModel& power,
                                  const HeftResult& heft,
                                  ModelKind objective = ModelKind::Isct);

// Both stages composed; deterministic for a fixed seed.
HeuristicResult heuristic_schedule(const TaskGraph& graph, const PowerModel& power, int K,
                                   std::uint64_t tie_break_seed = 0,
                                   ModelKind objective = ModelKind::Isct);

}  // namespace esched
