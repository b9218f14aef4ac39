#include "esched/heuristic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace esched {

namespace {
constexpr double kTimeTol = 1e-9;

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Slot {
    double start;
    double finish;
    int task_id;
};
}  // namespace

HeftResult heft_assign(const TaskGraph& graph, const PowerModel& power, int K,
                       std::uint64_t tie_break_seed) {
    auto viol = validate(graph);
    if (!viol.empty())
        throw std::invalid_argument("heft_assign: invalid graph: " + viol.front().message);
    if (K < 1) throw std::invalid_argument("heft_assign: K must be >= 1");

    const int n = graph.task_count();
    const double f_max = power.f_max();
    const double td = graph.period;

    HeftResult res;
    res.configuration.processors = K;
    res.configuration.assignment.assign(n + 1, 0);
    res.configuration.order.assign(K, {});
    res.start.assign(n + 1, 0.0);
    res.finish.assign(n + 1, 0.0);
    if (n == 0) return res;

    std::vector<std::vector<int>> preds(n + 1);
    for (auto [u, v] : graph.edges) preds[v].push_back(u);

    std::vector<std::vector<Slot>> lanes(K);  // kept sorted by start

    for (int u : rank_order(graph, f_max, tie_break_seed)) {
        const double dur = static_cast<double>(graph.task(u).workload) / f_max;
        double ready = 0.0;
        for (int p : preds[u]) ready = std::max(ready, res.finish[p]);

        int best_k = -1;
        double best_start = 0.0, best_finish = 0.0;
        for (int k = 0; k < K; ++k) {
            // first idle slot of length >= dur at or after `ready`,
            // considering the gaps before, between, and after placed tasks
            double candidate = ready;
            double chosen = -1.0;
            for (const Slot& s : lanes[k]) {
                if (s.start - candidate >= dur - kTimeTol) break;
                candidate = std::max(candidate, s.finish);
            }
            chosen = candidate;
            double fin = chosen + dur;
            if (best_k < 0 || fin < best_finish - kTimeTol) {
                best_k = k;
                best_start = chosen;
                best_finish = fin;
            }
        }

        res.configuration.assignment[u] = best_k + 1;
        res.start[u] = best_start;
        res.finish[u] = best_finish;
        res.makespan = std::max(res.makespan, best_finish);
        Slot slot{best_start, best_finish, u};
        auto& lane = lanes[best_k];
        lane.insert(std::upper_bound(lane.begin(), lane.end(), slot,
                                     [](const Slot& a, const Slot& b) {
                                         return a.start < b.start;
                                     }),
                    slot);
    }

    for (int k = 0; k < K; ++k)
        for (const Slot& s : lanes[k]) res.configuration.order[k].push_back(s.task_id);

    if (res.makespan > td + kTimeTol)
        throw InfeasibleError("heft_assign: makespan " + format_double(res.makespan) +
                              " s exceeds the period " + format_double(td) +
                              " s even at f_max");
    return res;
}

HeuristicResult refine_continuous(const TaskGraph& graph, const PowerModel& power,
                                  const HeftResult& heft, ModelKind objective) {
    HeuristicResult out;
    out.configuration = heft.configuration;

    double t0 = now_s();
    SubproblemResult sub = continuous_subproblem(graph, power, heft.configuration, objective);
    out.stage2_seconds = now_s() - t0;
    // Stage 1 met the period at f_max, so the fixed configuration always
    // admits a continuous solution.
    if (!sub.feasible || sub.energy >= 1e300)
        throw InfeasibleError("refine_continuous: fixed configuration is infeasible");

    if (objective == ModelKind::IscPlusT) {
        Schedule flagged = apply_dpm_post(power, sub.schedule);
        EvalReport rep = schedule_energy(graph, power, flagged, SwitchPolicy::AsFlagged);
        out.schedule = std::move(flagged);
        out.energy = rep.total_energy;
    } else {
        out.schedule = std::move(sub.schedule);
        out.energy = sub.energy;
    }
    return out;
}

HeuristicResult heuristic_schedule(const TaskGraph& graph, const PowerModel& power, int K,
                                   std::uint64_t tie_break_seed, ModelKind objective) {
    double t0 = now_s();
    HeftResult heft = heft_assign(graph, power, K, tie_break_seed);
    double t1 = now_s();
    HeuristicResult res = refine_continuous(graph, power, heft, objective);
    res.stage1_seconds = t1 - t0;
    return res;
}

}  // namespace esched
