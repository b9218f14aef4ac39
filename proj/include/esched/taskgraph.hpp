#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "esched/util.hpp"

namespace esched {

/// One task of a periodic task graph. The workload is the total number of
/// processor cycles required for a complete execution.
struct Task {
    int id = 0;                  // 1..n
    std::int64_t workload = 0;   // cycles, >= 1
};

/// Directed acyclic task graph with a common period that acts as a hard
/// deadline for every task instance.
struct TaskGraph {
    std::vector<Task> tasks;                  // sorted by id
    std::vector<std::pair<int, int>> edges;   // (src, dst), sorted
    double period = 0.0;                      // seconds, > 0

    int task_count() const { return static_cast<int>(tasks.size()); }
    std::int64_t total_workload() const;
    const Task& task(int id) const;
    bool has_task(int id) const;
};

/// Parameters for the random generator.
struct GenParams {
    int task_count = 1;
    std::int64_t mean_workload = 2000000;
    double workload_spread = 0.5;   // fraction of the mean, in [0, 1)
    int max_in_degree = 2;
    int max_out_degree = 3;
    double period = 0.0;            // seconds
    std::uint64_t seed = 0;
};

// Returns every invariant violation (empty list means the graph is valid).
// Order is deterministic: by rule id, then by the ids involved.
std::vector<Violation> validate(const TaskGraph& graph);

// Topological order with ties broken by ascending task id.
// Throws InfeasibleError naming a cycle member if the graph has a cycle.
std::vector<int> topological_order(const TaskGraph& graph);

// Upward rank per task: rank(u) = W_u / f_max + max over successors of
// rank(v); exit tasks have rank W_u / f_max. Strictly decreasing along edges.
std::map<int, double> upward_ranks(const TaskGraph& graph, double f_max);

// Task ids sorted by decreasing upward rank. Ties break by ascending id;
// when tie_break_seed is nonzero the order within a tie group is shuffled
// deterministically from the seed instead.
std::vector<int> rank_order(const TaskGraph& graph, double f_max,
                            std::uint64_t tie_break_seed = 0);

// Random DAG in the style of classic task-graph generators: grows from a
// single root, each new task attaches below an existing one, then extra
// forward edges are added subject to the degree caps. Identical params
// produce an identical graph.
TaskGraph random_taskgraph(const GenParams& params);

// Text format round trip. See save_graph for the format.
TaskGraph load_graph(const std::string& text);

// Canonical text form:
//   taskgraph v1
//   period <value> <s|ms|us>
//   task <id> <cycles>
//   edge <src> <dst>
std::string save_graph(const TaskGraph& graph);

// DOT rendering for inspection.
std::string save_dot(const TaskGraph& graph);

}  // namespace esched
