#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esched/power.hpp"
#include "esched/taskgraph.hpp"

namespace esched {

/// Placement of one task: processor, start time, and how its cycles are
/// split across the discrete frequencies.
struct TaskPlacement {
    int task_id = 0;
    int processor = 0;  // 1..K
    double start = 0.0; // seconds
    // (frequency index 1..m, cycles); cycles may be fractional.
    std::vector<std::pair<int, double>> split;

    double duration(const PowerModel& power) const;
};

/// A complete schedule of one period. Switch flags live on the idle
/// intervals derived from it (see idle_intervals / switch_flags).
struct Schedule {
    std::vector<TaskPlacement> tasks;  // sorted by task id
    double period = 0.0;               // seconds
    int processors = 0;                // K
    // Sleep decisions per processor, indexed like idle_intervals() output
    // for that processor. Empty means "none recorded".
    std::vector<std::vector<bool>> switches;

    const TaskPlacement& placement(int task_id) const;
    bool processor_used(int k) const;
};

enum class IdleKind { BetweenTasks, WrapAround, WholePeriod };

struct IdleInterval {
    int processor = 0;     // 1..K
    double begin = 0.0;    // seconds; for wrap-around, start of the tail part
    double length = 0.0;   // seconds
    IdleKind kind = IdleKind::BetweenTasks;
    bool switched = false;
    int before_task = 0;   // task the interval precedes (0 for wrap/whole)
};

struct ProcessorBreakdown {
    int processor = 0;
    double busy = 0.0;
    double idle = 0.0;           // excludes whole-period intervals
    double exec_energy = 0.0;
    double idle_energy = 0.0;
    int idle_intervals = 0;
};

struct EvalReport {
    double total_energy = 0.0;
    double exec_energy = 0.0;
    double idle_energy = 0.0;
    int idle_interval_count = 0;   // whole-period intervals excluded
    double total_idle_time = 0.0;  // idem
    int used_processors = 0;
    std::vector<ProcessorBreakdown> per_processor;
};

enum class SwitchPolicy { Optimal, AsFlagged, Never };

// Structural checks: split sums match workloads, intervals disjoint and
// within [0, Td], precedence respected. Deterministic order.
std::vector<Violation> validate_schedule(const TaskGraph& graph, const PowerModel& power,
                                         const Schedule& schedule);

// Idle intervals per processor: one interval per gap between consecutive
// tasks, one wrap-around interval joining the tail after the last task with
// the head before the first, or one whole-period interval for an unused
// processor. Intervals shorter than 1e-9 s are dropped. Ordered by
// processor, then position, wrap-around last.
std::vector<IdleInterval> idle_intervals(const PowerModel& power, const Schedule& schedule);

// Energy accounting: execution energy from the cycle splits plus idle energy
// per interval. Under Optimal, an interval sleeps exactly when its length
// reaches the break-even time; AsFlagged uses schedule.switches; Never keeps
// every interval active. Whole-period intervals always contribute zero.
EvalReport schedule_energy(const TaskGraph& graph, const PowerModel& power,
                           const Schedule& schedule, SwitchPolicy policy = SwitchPolicy::Optimal);

// Post-hoc power management: records a switch flag on every interval whose
// length reaches the break-even time. Returns a copy.
Schedule apply_dpm_post(const PowerModel& power, const Schedule& schedule);

struct CompareRow {
    std::string name;
    int tasks = 0;
    std::int64_t total_workload = 0;
    double period = 0.0;
    double baseline_energy = 0.0;  // iSC+T
    double isct_energy = 0.0;
    double saving_percent = 0.0;
    int baseline_idle_count = 0;
    int isct_idle_count = 0;
    double baseline_idle_time = 0.0;
    double isct_idle_time = 0.0;
    int baseline_used = 0;
    int isct_used = 0;
};

CompareRow compare_schedules(const std::string& name, const TaskGraph& graph,
                             const PowerModel& power, const Schedule& isct, double isct_energy,
                             const Schedule& baseline);

// Aligned table with one row per instance plus an averages row.
std::string format_compare_table(const std::vector<CompareRow>& rows);
// One `key=value ...` record per line.
std::string format_compare_records(const std::vector<CompareRow>& rows);

// Deterministic Gantt rendering: one lane per processor, task boxes shaded
// by frequency mix, idle intervals hatched, switched intervals marked.
std::string gantt_svg(const TaskGraph& graph, const PowerModel& power, const Schedule& schedule);

// Schedule text format round trip:
//   schedule v1
//   task <id> proc <k> start <seconds>
//   split <id> <freq-index> <cycles>
//   switch <proc> <interval-index> <0|1>
std::string save_schedule(const Schedule& schedule);
Schedule load_schedule(const std::string& text, const TaskGraph& graph, const PowerModel& power);

}  // namespace esched
