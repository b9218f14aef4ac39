#include "esched/taskgraph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

namespace esched {

std::int64_t TaskGraph::total_workload() const {
    std::int64_t sum = 0;
    for (const Task& t : tasks) sum += t.workload;
    return sum;
}

const Task& TaskGraph::task(int id) const {
    for (const Task& t : tasks) {
        if (t.id == id) return t;
    }
    throw std::out_of_range("no task with id " + std::to_string(id));
}

bool TaskGraph::has_task(int id) const {
    return std::any_of(tasks.begin(), tasks.end(), [id](const Task& t) { return t.id == id; });
}

namespace {

// Adjacency over task ids; assumes ids validated as 1..n.
std::vector<std::vector<int>> successors_of(const TaskGraph& g) {
    std::vector<std::vector<int>> succ(g.task_count() + 1);
    for (auto [u, v] : g.edges) succ[u].push_back(v);
    for (auto& s : succ) std::sort(s.begin(), s.end());
    return succ;
}

bool ids_are_1_to_n(const TaskGraph& g) {
    std::set<int> ids;
    for (const Task& t : g.tasks) ids.insert(t.id);
    if (static_cast<int>(ids.size()) != g.task_count()) return false;
    return g.tasks.empty() || (*ids.begin() == 1 && *ids.rbegin() == g.task_count());
}

}  // namespace

std::vector<Violation> validate(const TaskGraph& graph) {
    std::vector<Violation> out;
    const int n = graph.task_count();

    // Rule order: cycle, dangling-edge, duplicate-edge, ids, period, workload.
    bool ids_ok = ids_are_1_to_n(graph);
    bool edges_ok = true;
    for (auto [u, v] : graph.edges) {
        if (u == v || !graph.has_task(u) || !graph.has_task(v)) edges_ok = false;
    }

    if (ids_ok && edges_ok) {
        // Kahn over a scratch in-degree table; leftover nodes lie on cycles.
        std::vector<int> indeg(n + 1, 0);
        auto succ = successors_of(graph);
        for (auto [u, v] : graph.edges) indeg[v]++;
        std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
        for (int i = 1; i <= n; ++i)
            if (indeg[i] == 0) ready.push(i);
        int seen = 0;
        while (!ready.empty()) {
            int u = ready.top();
            ready.pop();
            ++seen;
            for (int v : succ[u])
                if (--indeg[v] == 0) ready.push(v);
        }
        if (seen != n) {
            for (int i = 1; i <= n; ++i) {
                if (indeg[i] > 0) {
                    out.push_back({"cycle", "task " + std::to_string(i) + " lies on a directed cycle"});
                    break;
                }
            }
        }
    }

    for (auto [u, v] : graph.edges) {
        if (u == v)
            out.push_back({"dangling-edge", "edge (" + std::to_string(u) + "," + std::to_string(v) +
                                                ") has identical endpoints"});
        else if (!graph.has_task(u) || !graph.has_task(v))
            out.push_back({"dangling-edge", "edge (" + std::to_string(u) + "," + std::to_string(v) +
                                                ") references a missing task"});
    }

    std::set<std::pair<int, int>> seen_edges;
    for (auto e : graph.edges) {
        if (!seen_edges.insert(e).second)
            out.push_back({"duplicate-edge", "edge (" + std::to_string(e.first) + "," +
                                                 std::to_string(e.second) + ") appears twice"});
    }

    if (!ids_ok) out.push_back({"ids", "task ids must be distinct and cover 1..n"});

    if (!(graph.period > 0.0))
        out.push_back({"period", "period must be positive, got " + format_double(graph.period)});

    for (const Task& t : graph.tasks) {
        if (t.workload < 1)
            out.push_back({"workload", "task " + std::to_string(t.id) + " has workload " +
                                           std::to_string(t.workload) + " (must be >= 1)"});
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const Violation& a, const Violation& b) { return a.rule < b.rule; });
    return out;
}

std::vector<int> topological_order(const TaskGraph& graph) {
    const int n = graph.task_count();
    std::vector<int> indeg(n + 1, 0);
    auto succ = successors_of(graph);
    for (auto [u, v] : graph.edges) indeg[v]++;

    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int i = 1; i <= n; ++i)
        if (indeg[i] == 0) ready.push(i);

    std::vector<int> order;
    order.reserve(n);
    while (!ready.empty()) {
        int u = ready.top();
        ready.pop();
        order.push_back(u);
        for (int v : succ[u])
            if (--indeg[v] == 0) ready.push(v);
    }
    if (static_cast<int>(order.size()) != n) {
        for (int i = 1; i <= n; ++i)
            if (indeg[i] > 0)
                throw InfeasibleError("task graph has a cycle through task " + std::to_string(i));
    }
    return order;
}

std::map<int, double> upward_ranks(const TaskGraph& graph, double f_max) {
    if (!(f_max > 0.0)) throw std::invalid_argument("upward_ranks: f_max must be positive");
    auto order = topological_order(graph);
    auto succ = successors_of(graph);

    std::map<int, double> rank;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int u = *it;
        double best_succ = 0.0;
        for (int v : succ[u]) best_succ = std::max(best_succ, rank.at(v));
        rank[u] = static_cast<double>(graph.task(u).workload) / f_max + best_succ;
    }
    return rank;
}

std::vector<int> rank_order(const TaskGraph& graph, double f_max, std::uint64_t tie_break_seed) {
    auto ranks = upward_ranks(graph, f_max);
    std::vector<int> ids;
    ids.reserve(graph.task_count());
    for (const Task& t : graph.tasks) ids.push_back(t.id);

    if (tie_break_seed != 0) {
        // Deterministic shuffle within tie groups, Fisher-Yates on our Rng.
        Rng rng(tie_break_seed);
        std::vector<std::uint64_t> salt(ids.size());
        for (auto& s : salt) s = rng.next();
        std::sort(ids.begin(), ids.end(), [&](int a, int b) {
            double ra = ranks.at(a), rb = ranks.at(b);
            if (ra != rb) return ra > rb;
            return salt[a - 1] < salt[b - 1];
        });
        return ids;
    }
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        double ra = ranks.at(a), rb = ranks.at(b);
        if (ra != rb) return ra > rb;
        return a < b;
    });
    return ids;
}

TaskGraph random_taskgraph(const GenParams& params) {
    if (params.task_count < 1) throw std::invalid_argument("task_count must be >= 1");
    if (params.workload_spread < 0.0 || params.workload_spread >= 1.0)
        throw std::invalid_argument("workload_spread must lie in [0, 1)");
    if (params.max_in_degree < 1 || params.max_out_degree < 1)
        throw std::invalid_argument("degree caps must be >= 1");

    Rng rng(params.seed);
    TaskGraph g;
    g.period = params.period;

    const double lo = static_cast<double>(params.mean_workload) * (1.0 - params.workload_spread);
    const double hi = static_cast<double>(params.mean_workload) * (1.0 + params.workload_spread);
    for (int id = 1; id <= params.task_count; ++id) {
        std::int64_t w = std::llround(rng.real(lo, hi));
        g.tasks.push_back({id, std::max<std::int64_t>(1, w)});
    }

    std::vector<int> out_deg(params.task_count + 1, 0);
    std::vector<int> in_deg(params.task_count + 1, 0);
    const double extra_edge_prob = 0.4;

    for (int t = 2; t <= params.task_count; ++t) {
        std::vector<int> candidates;
        for (int q = 1; q < t; ++q)
            if (out_deg[q] < params.max_out_degree) candidates.push_back(q);
        // Out-capacity 3(t-1) always exceeds the <= 2(t-1) edges placed so far,
        // so at least one candidate exists.
        int parent = candidates[rng.below(candidates.size())];
        g.edges.emplace_back(parent, t);
        out_deg[parent]++;
        in_deg[t]++;

        while (in_deg[t] < params.max_in_degree && rng.real01() < extra_edge_prob) {
            std::vector<int> extra;
            for (int q = 1; q < t; ++q) {
                if (q == parent || out_deg[q] >= params.max_out_degree) continue;
                bool dup = false;
                for (auto [a, b] : g.edges)
                    if (a == q && b == t) dup = true;
                if (!dup) extra.push_back(q);
            }
            if (extra.empty()) break;
            int q = extra[rng.below(extra.size())];
            g.edges.emplace_back(q, t);
            out_deg[q]++;
            in_deg[t]++;
        }
    }

    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

namespace {

double unit_to_seconds(const std::string& unit, int line) {
    if (unit == "s") return 1.0;
    if (unit == "ms") return 1e-3;
    if (unit == "us") return 1e-6;
    throw ParseError("unknown time unit '" + unit + "'", line);
}

}  // namespace

TaskGraph load_graph(const std::string& text) {
    TaskGraph g;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool saw_header = false;

    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;

        if (!saw_header) {
            std::string ver;
            if (tok != "taskgraph" || !(ls >> ver) || ver != "v1")
                throw ParseError("expected 'taskgraph v1' header", lineno);
            saw_header = true;
            continue;
        }
        if (tok == "period") {
            double value;
            std::string unit;
            if (!(ls >> value >> unit)) throw ParseError("malformed period line", lineno);
            g.period = value * unit_to_seconds(unit, lineno);
        } else if (tok == "task") {
            int id;
            std::int64_t cycles;
            if (!(ls >> id >> cycles)) throw ParseError("malformed task line", lineno);
            g.tasks.push_back({id, cycles});
        } else if (tok == "edge") {
            int u, v;
            if (!(ls >> u >> v)) throw ParseError("malformed edge line", lineno);
            g.edges.emplace_back(u, v);
        } else {
            throw ParseError("unknown directive '" + tok + "'", lineno);
        }
    }
    if (!saw_header) throw ParseError("missing 'taskgraph v1' header", 1);

    std::sort(g.tasks.begin(), g.tasks.end(),
              [](const Task& a, const Task& b) { return a.id < b.id; });
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

std::string save_graph(const TaskGraph& graph) {
    std::string out = "taskgraph v1\n";
    out += "period " + format_double(graph.period) + " s\n";
    for (const Task& t : graph.tasks)
        out += "task " + std::to_string(t.id) + " " + std::to_string(t.workload) + "\n";
    auto edges = graph.edges;
    std::sort(edges.begin(), edges.end());
    for (auto [u, v] : edges)
        out += "edge " + std::to_string(u) + " " + std::to_string(v) + "\n";
    return out;
}

std::string save_dot(const TaskGraph& graph) {
    std::string out = "digraph taskgraph {\n  rankdir=TB;\n";
    for (const Task& t : graph.tasks)
        out += "  t" + std::to_string(t.id) + " [label=\"" + std::to_string(t.id) + "\\n" +
               std::to_string(t.workload) + " cy\"];\n";
    for (auto [u, v] : graph.edges)
        out += "  t" + std::to_string(u) + " -> t" + std::to_string(v) + ";\n";
    out += "}\n";
    return out;
}

}  // namespace esched
