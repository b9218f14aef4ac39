#include "esched/exact.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>

#include "esched/lp.hpp"

namespace esched {

namespace {

constexpr double kInfEnergy = 1e300;
constexpr double kTimeTol = 1e-9;

double wall_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// reach[u] bit v set iff a directed path u -> v exists.
std::vector<std::uint64_t> reachability(const TaskGraph& g) {
    const int n = g.task_count();
    std::vector<std::vector<int>> succ(n + 1);
    for (auto [u, v] : g.edges) succ[u].push_back(v);
    std::vector<std::uint64_t> reach(n + 1, 0);
    auto order = topological_order(g);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int u = *it;
        for (int v : succ[u]) reach[u] |= reach[v] | (1ull << v);
    }
    return reach;
}

struct SharedBudget {
    std::atomic<long> nodes_left{-1};   // -1 = unlimited
    double deadline = 0.0;              // wall clock, 0 = none
    std::atomic<bool> exhausted{false};

    bool spend() {
        if (deadline > 0.0 && wall_seconds() > deadline) {
            exhausted.store(true, std::memory_order_relaxed);
            return false;
        }
        long left = nodes_left.load(std::memory_order_relaxed);
        if (left < 0) return true;
        if (nodes_left.fetch_sub(1, std::memory_order_relaxed) <= 0) {
            exhausted.store(true, std::memory_order_relaxed);
            return false;
        }
        return true;
    }
};

struct IntervalVar {
    int var = -1;
    bool is_wrap = false;
    int id = 0;  // task id for gaps, processor for wrap
};

// Branch and bound over the switch booleans of one fixed configuration.
class SubproblemSolver {
  public:
    SubproblemSolver(const TaskGraph& graph, const PowerModel& power, const Configuration& config,
                     ModelKind objective, SharedBudget* budget)
        : graph_(graph), power_(power), config_(config), objective_(objective), budget_(budget) {
        n_ = graph.task_count();
        K_ = config.processors;
        td_ = graph.period;
        t_be_ = break_even(power);
        lambda_ = td_ > 0.0 ? std::min(power.c, power.e_sw / td_) : power.c;
    }

    SubproblemResult run(double cutoff) {
        SubproblemResult res;
        res.energy = kInfEnergy;
        if (!config_ok()) return res;  // malformed or precedence-violating order
        build_lp();

        flags_.assign(intervals_.size(), -1);
        best_ = kInfEnergy;
        cutoff_ = cutoff;
        root_feasible_ = false;
        dfs(0);

        res.feasible = root_feasible_;
        res.truncated = truncated_;
        if (best_ < kInfEnergy) {
            res.schedule = extract_schedule();
            EvalReport rep = schedule_energy(graph_, power_, res.schedule,
                                             objective_ == ModelKind::Isct
                                                 ? SwitchPolicy::AsFlagged
                                                 : SwitchPolicy::Never);
            // For the baseline objective only execution energy is optimized.
            res.energy = objective_ == ModelKind::Isct ? rep.total_energy : rep.exec_energy;
        }
        return res;
    }

    long nodes() const { return nodes_; }

  private:
    bool config_ok() {
        if (static_cast<int>(config_.assignment.size()) != n_ + 1) return false;
        if (static_cast<int>(config_.order.size()) != K_) return false;
        std::vector<int> seen(n_ + 1, 0);
        for (int k = 0; k < K_; ++k)
            for (int u : config_.order[k]) {
                if (u < 1 || u > n_ || config_.assignment[u] != k + 1) return false;
                seen[u]++;
            }
        for (int u = 1; u <= n_; ++u)
            if (seen[u] != 1) return false;

        // Per-processor order must not contradict DAG reachability.
        auto reach = reachability(graph_);
        for (int k = 0; k < K_; ++k) {
            const auto& seq = config_.order[k];
            for (size_t i = 0; i < seq.size(); ++i)
                for (size_t j = i + 1; j < seq.size(); ++j)
                    if (reach[seq[j]] & (1ull << seq[i])) return false;
        }
        return true;
    }

    void build_lp() {
        start_ix_.assign(n_ + 1, -1);
        x_ix_.assign(n_ + 1, {});
        const int m = power_.freq_count();

        for (int u = 1; u <= n_; ++u) start_ix_[u] = lp_.add_var(0.0, td_);
        for (int u = 1; u <= n_; ++u) {
            x_ix_[u].resize(m);
            double w = static_cast<double>(graph_.task(u).workload);
            for (int i = 0; i < m; ++i)
                x_ix_[u][i] = lp_.add_var(0.0, 1.0, w * energy_per_cycle_index(power_, i));
        }
        if (objective_ == ModelKind::Isct) {
            for (int k = 0; k < K_; ++k) {
                const auto& seq = config_.order[k];
                for (size_t i = 1; i < seq.size(); ++i)
                    intervals_.push_back({lp_.add_var(0.0, td_), false, seq[i]});
                if (!seq.empty()) intervals_.push_back({lp_.add_var(0.0, td_), true, k + 1});
            }
        }

        auto dur_terms = [&](int u, std::vector<double>& row, double scale) {
            double w = static_cast<double>(graph_.task(u).workload);
            for (int i = 0; i < m; ++i) row[x_ix_[u][i]] += scale * w / power_.freqs[i];
        };
        const int nv = lp_.num_vars();

        for (int u = 1; u <= n_; ++u) {
            std::vector<double> row(nv, 0.0);
            for (int i = 0; i < m; ++i) row[x_ix_[u][i]] = 1.0;
            lp_.add_row(std::move(row), Rel::EQ, 1.0);
        }
        for (int u = 1; u <= n_; ++u) {
            std::vector<double> row(nv, 0.0);
            row[start_ix_[u]] = 1.0;
            dur_terms(u, row, 1.0);
            lp_.add_row(std::move(row), Rel::LE, td_);
        }
        for (auto [u, v] : graph_.edges) {
            std::vector<double> row(nv, 0.0);
            row[start_ix_[u]] = 1.0;
            dur_terms(u, row, 1.0);
            row[start_ix_[v]] -= 1.0;
            lp_.add_row(std::move(row), Rel::LE, 0.0);
        }
        int iv = 0;
        for (int k = 0; k < K_; ++k) {
            const auto& seq = config_.order[k];
            for (size_t i = 1; i < seq.size(); ++i) {
                int a = seq[i - 1], b = seq[i];
                std::vector<double> row(nv, 0.0);
                row[start_ix_[b]] = 1.0;
                row[start_ix_[a]] = -1.0;
                dur_terms(a, row, -1.0);
                if (objective_ == ModelKind::Isct) {
                    row[intervals_[iv].var] = -1.0;
                    ++iv;
                }
                lp_.add_row(std::move(row),
                            objective_ == ModelKind::Isct ? Rel::EQ : Rel::GE, 0.0);
            }
            if (!seq.empty() && objective_ == ModelKind::Isct) {
                // wrap = Td - finish(last) + start(first)
                int f = seq.front(), l = seq.back();
                std::vector<double> row(nv, 0.0);
                row[intervals_[iv].var] = 1.0;
                row[start_ix_[l]] += 1.0;
                dur_terms(l, row, 1.0);
                row[start_ix_[f]] -= 1.0;
                lp_.add_row(std::move(row), Rel::EQ, td_);
                ++iv;
            }
        }
    }

    void dfs(int depth) {
        if (budget_ && !budget_->spend()) {
            truncated_ = true;
            return;
        }
        ++nodes_;

        // Node LP: resolved intervals get their real cost and bound, the
        // rest the linear under-estimator.
        double constant = 0.0;
        for (size_t j = 0; j < intervals_.size(); ++j) {
            int x = intervals_[j].var;
            lp_.lower[x] = 0.0;
            lp_.upper[x] = td_;
            if (flags_[j] < 0) {
                lp_.objective[x] = lambda_;
            } else if (flags_[j] == 0) {
                lp_.objective[x] = power_.c;
                lp_.upper[x] = std::min(td_, t_be_);
            } else {
                lp_.objective[x] = 0.0;
                lp_.lower[x] = std::min(td_, t_be_);
                constant += power_.e_sw;
            }
        }
        LpOutcome out = solve_lp(lp_);
        if (out.status != LpStatus::Optimal) return;
        if (depth == 0) root_feasible_ = true;

        double lb = out.objective + constant;
        double limit = std::min(best_, cutoff_);
        if (lb > limit) return;
#ifndef NDEBUG
        lb_stack_.push_back(lb);
#endif
        int branch = -1;
        for (size_t j = 0; j < intervals_.size(); ++j)
            if (flags_[j] < 0) {
                branch = static_cast<int>(j);
                break;
            }
        if (branch < 0) {
            // fully resolved corner: lb is its exact optimum
            if (lb < best_) {
                best_ = lb;
                best_values_ = out.values;
                best_flags_ = flags_;
            }
#ifndef NDEBUG
            for (double ancestor : lb_stack_) assert(lb + 1e-7 >= ancestor);
            lb_stack_.pop_back();
#endif
            return;
        }

        int prefer = (out.values[intervals_[branch].var] + kTimeTol >= t_be_) ? 1 : 0;
        for (int round = 0; round < 2; ++round) {
            flags_[branch] = static_cast<std::int8_t>(round == 0 ? prefer : 1 - prefer);
            dfs(depth + 1);
        }
        flags_[branch] = -1;
#ifndef NDEBUG
        lb_stack_.pop_back();
#endif
    }

    Schedule extract_schedule() {
        Schedule s;
        s.period = td_;
        s.processors = K_;
        const int m = power_.freq_count();

        std::vector<double> durations(n_ + 1, 0.0);
        std::vector<std::vector<std::pair<int, double>>> splits(n_ + 1);
        for (int u = 1; u <= n_; ++u) {
            double w = static_cast<double>(graph_.task(u).workload);
            double assigned = 0.0;
            int biggest = 0;
            for (int i = 0; i < m; ++i) {
                double frac = best_values_[x_ix_[u][i]];
                if (frac > best_values_[x_ix_[u][biggest]]) biggest = i;
                double cycles = frac * w;
                if (cycles > 1e-6) {
                    splits[u].emplace_back(i + 1, cycles);
                    assigned += cycles;
                }
            }
            // absorb float crumbs so the split sums exactly to the workload
            double residue = w - assigned;
            if (!splits[u].empty()) {
                for (auto& [ix, cycles] : splits[u])
                    if (ix == biggest + 1) cycles += residue;
            } else {
                splits[u].emplace_back(biggest + 1, w);
            }
            double d = 0.0;
            for (auto [ix, cycles] : splits[u]) d += cycles / power_.freqs[ix - 1];
            durations[u] = d;
        }

        std::vector<double> starts(n_ + 1, 0.0);
        if (objective_ == ModelKind::Isct) {
            for (int u = 1; u <= n_; ++u) starts[u] = best_values_[start_ix_[u]];
        } else {
            starts = asap_starts(durations);
        }
        for (int u = 1; u <= n_; ++u)
            s.tasks.push_back({u, config_.assignment[u], starts[u], splits[u]});

        s.switches.assign(K_, {});
        for (const IdleInterval& ivl : idle_intervals(power_, s)) {
            if (ivl.kind == IdleKind::WholePeriod) continue;
            bool sw = false;
            for (size_t j = 0; j < intervals_.size(); ++j) {
                const IntervalVar& def = intervals_[j];
                if (ivl.kind == IdleKind::BetweenTasks && !def.is_wrap &&
                    def.id == ivl.before_task)
                    sw = best_flags_[j] == 1;
                if (ivl.kind == IdleKind::WrapAround && def.is_wrap && def.id == ivl.processor)
                    sw = best_flags_[j] == 1;
            }
            s.switches[ivl.processor - 1].push_back(objective_ == ModelKind::Isct && sw);
        }
        return s;
    }

    std::vector<double> asap_starts(const std::vector<double>& durations) {
        std::vector<std::vector<int>> preds(n_ + 1);
        for (auto [u, v] : graph_.edges) preds[v].push_back(u);
        std::vector<int> chain_pred(n_ + 1, 0);
        for (int k = 0; k < K_; ++k)
            for (size_t i = 1; i < config_.order[k].size(); ++i)
                chain_pred[config_.order[k][i]] = config_.order[k][i - 1];

        // combined topological order via Kahn on DAG + chain edges
        std::vector<std::vector<int>> succ(n_ + 1);
        std::vector<int> indeg(n_ + 1, 0);
        auto add_edge = [&](int a, int b) {
            succ[a].push_back(b);
            indeg[b]++;
        };
        for (auto [u, v] : graph_.edges) add_edge(u, v);
        for (int v = 1; v <= n_; ++v)
            if (chain_pred[v]) add_edge(chain_pred[v], v);

        std::vector<double> start(n_ + 1, 0.0);
        std::vector<int> queue;
        for (int u = 1; u <= n_; ++u)
            if (indeg[u] == 0) queue.push_back(u);
        std::sort(queue.begin(), queue.end());
        size_t head = 0;
        while (head < queue.size()) {
            int u = queue[head++];
            for (int v : succ[u]) {
                start[v] = std::max(start[v], start[u] + durations[u]);
                if (--indeg[v] == 0) queue.push_back(v);
            }
        }
        return start;
    }

    const TaskGraph& graph_;
    const PowerModel& power_;
    const Configuration& config_;
    ModelKind objective_;
    SharedBudget* budget_;

    int n_ = 0, K_ = 0;
    double td_ = 0.0, t_be_ = 0.0, lambda_ = 0.0;

    LinearProgram lp_;
    std::vector<int> start_ix_;
    std::vector<std::vector<int>> x_ix_;
    std::vector<IntervalVar> intervals_;

    std::vector<std::int8_t> flags_;
    double best_ = kInfEnergy;
    double cutoff_ = kInfEnergy;
    std::vector<double> best_values_;
    std::vector<std::int8_t> best_flags_;
    bool root_feasible_ = false;
    bool truncated_ = false;
    long nodes_ = 0;
#ifndef NDEBUG
    std::vector<double> lb_stack_;
#endif
};

}  // namespace

std::string Configuration::key() const {
    std::string s = "a:";
    for (size_t u = 1; u < assignment.size(); ++u) {
        if (u > 1) s += ",";
        s += std::to_string(assignment[u]);
    }
    s += "|o:";
    for (size_t k = 0; k < order.size(); ++k) {
        if (k > 0) s += ";";
        for (size_t i = 0; i < order[k].size(); ++i) {
            if (i > 0) s += ",";
            s += std::to_string(order[k][i]);
        }
    }
    return s;
}

SubproblemResult continuous_subproblem(const TaskGraph& graph, const PowerModel& power,
                                       const Configuration& config, ModelKind objective,
                                       double cutoff) {
    SubproblemSolver solver(graph, power, config, objective, nullptr);
    return solver.run(cutoff);
}

namespace {

// All per-processor orders for a fixed assignment that respect DAG
// reachability inside each processor, streamed to `emit`.
class OrderEnumerator {
  public:
    OrderEnumerator(const std::vector<std::uint64_t>& reach, int K) : reach_(reach), K_(K) {}

    template <typename Fn>
    void enumerate(const std::vector<int>& assign, Fn&& emit) {
        subsets_.assign(K_, {});
        const int n = static_cast<int>(assign.size()) - 1;
        for (int u = 1; u <= n; ++u) subsets_[assign[u] - 1].push_back(u);
        orders_.assign(K_, {});
        per_proc(0, assign, emit);
    }

  private:
    template <typename Fn>
    void per_proc(int k, const std::vector<int>& assign, Fn&& emit) {
        if (k == K_) {
            Configuration cfg;
            cfg.processors = K_;
            cfg.assignment = assign;
            cfg.order = orders_;
            emit(cfg);
            return;
        }
        perm_dfs(k, subsets_[k], 0ull, assign, emit);
    }

    template <typename Fn>
    void perm_dfs(int k, const std::vector<int>& todo, std::uint64_t placed,
                  const std::vector<int>& assign, Fn&& emit) {
        if (orders_[k].size() == todo.size()) {
            per_proc(k + 1, assign, emit);
            return;
        }
        for (int u : todo) {
            if (placed & (1ull << u)) continue;
            // u may come next only if no unplaced member of this subset
            // must precede it
            bool ready = true;
            for (int w : todo) {
                if (w == u || (placed & (1ull << w))) continue;
                if (reach_[w] & (1ull << u)) {
                    ready = false;
                    break;
                }
            }
            if (!ready) continue;
            orders_[k].push_back(u);
            perm_dfs(k, todo, placed | (1ull << u), assign, emit);
            orders_[k].pop_back();
        }
    }

    const std::vector<std::uint64_t>& reach_;
    int K_;
    std::vector<std::vector<int>> subsets_;
    std::vector<std::vector<int>> orders_;
};

// Combined DAG + chain order must be acyclic.
bool combined_acyclic(const TaskGraph& g, const Configuration& cfg) {
    const int n = g.task_count();
    std::vector<std::vector<int>> succ(n + 1);
    std::vector<int> indeg(n + 1, 0);
    for (auto [u, v] : g.edges) {
        succ[u].push_back(v);
        indeg[v]++;
    }
    for (const auto& seq : cfg.order)
        for (size_t i = 1; i < seq.size(); ++i) {
            succ[seq[i - 1]].push_back(seq[i]);
            indeg[seq[i]]++;
        }
    std::vector<int> queue;
    for (int u = 1; u <= n; ++u)
        if (indeg[u] == 0) queue.push_back(u);
    size_t head = 0;
    int seen = 0;
    while (head < queue.size()) {
        int u = queue[head++];
        ++seen;
        for (int v : succ[u])
            if (--indeg[v] == 0) queue.push_back(v);
    }
    return seen == n;
}

// Assignments with processors renumbered by first occurrence; homogeneous
// processors make the rest symmetric.
std::vector<std::vector<int>> canonical_assignments(int n, int K) {
    std::vector<std::vector<int>> out;
    std::vector<int> assign(n + 1, 0);
    std::function<void(int, int)> rec = [&](int u, int used) {
        if (u > n) {
            out.push_back(assign);
            return;
        }
        int limit = std::min(K, used + 1);
        for (int k = 1; k <= limit; ++k) {
            assign[u] = k;
            rec(u + 1, std::max(used, k));
        }
    };
    if (n >= 1) rec(1, 0);
    return out;
}

struct ThreadBest {
    double energy = kInfEnergy;
    std::string key;
    SubproblemResult sub;
    Configuration config;
    bool has = false;
};

}  // namespace

ExactResult exact_schedule(const TaskGraph& graph, const PowerModel& power, int K,
                           const ExactLimits& limits, ModelKind objective, int threads,
                           double seed_incumbent) {
    auto viol = validate(graph);
    if (!viol.empty())
        throw std::invalid_argument("exact_schedule: invalid graph: " + viol.front().message);
    const int n = graph.task_count();
    if (n > limits.max_tasks)
        throw BudgetError("instance has " + std::to_string(n) + " tasks, exact cap is " +
                          std::to_string(limits.max_tasks));
    if (K > limits.max_processors)
        throw BudgetError("instance has " + std::to_string(K) + " processors, exact cap is " +
                          std::to_string(limits.max_processors));
    if (power.freq_count() > limits.max_freqs)
        throw BudgetError("platform has " + std::to_string(power.freq_count()) +
                          " frequencies, exact cap is " + std::to_string(limits.max_freqs));
    if (K < 1) throw std::invalid_argument("exact_schedule: K must be >= 1");

    ExactResult result;
    result.schedule.period = graph.period;
    result.schedule.processors = K;
    result.schedule.switches.assign(K, {});
    if (n == 0) {
        result.feasible = true;
        result.optimal = true;
        result.energy = 0.0;
        result.configuration.processors = K;
        result.configuration.assignment.assign(1, 0);
        result.configuration.order.assign(K, {});
        return result;
    }

    auto reach = reachability(graph);
    auto assignments = canonical_assignments(n, K);

    SharedBudget budget;
    if (limits.node_budget > 0) budget.nodes_left.store(limits.node_budget);
    if (limits.time_budget_s > 0.0) budget.deadline = wall_seconds() + limits.time_budget_s;

    std::atomic<double> incumbent{seed_incumbent};
    std::atomic<size_t> next{0};
    std::atomic<long> total_configs{0};
    std::atomic<long> total_nodes{0};

    threads = std::max(1, threads);
    std::vector<ThreadBest> bests(threads);

    auto worker = [&](int tid) {
        OrderEnumerator orders(reach, K);
        ThreadBest& best = bests[tid];
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= assignments.size()) break;
            orders.enumerate(assignments[i], [&](const Configuration& cfg) {
                if (!combined_acyclic(graph, cfg)) return;
                total_configs.fetch_add(1, std::memory_order_relaxed);
                // Slack keeps ties with the incumbent inside the search, so
                // the (energy, key) winner never depends on pruning timing or
                // on rounding between the LP bound and the recomputed energy.
                double cut = incumbent.load(std::memory_order_relaxed);
                if (cut < kInfEnergy) cut += std::max(1e-12, cut * 1e-9);
                SubproblemSolver solver(graph, power, cfg, objective, &budget);
                SubproblemResult sub = solver.run(cut);
                total_nodes.fetch_add(solver.nodes(), std::memory_order_relaxed);
                if (sub.energy >= kInfEnergy) return;
                std::string key = cfg.key();
                if (!best.has || sub.energy < best.energy ||
                    (sub.energy == best.energy && key < best.key)) {
                    best.energy = sub.energy;
                    best.key = std::move(key);
                    best.sub = std::move(sub);
                    best.config = cfg;
                    best.has = true;
                }
                double cur = incumbent.load(std::memory_order_relaxed);
                while (best.energy < cur &&
                       !incumbent.compare_exchange_weak(cur, best.energy)) {
                }
            });
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    ThreadBest* winner = nullptr;
    for (ThreadBest& b : bests) {
        if (!b.has) continue;
        if (!winner || b.energy < winner->energy ||
            (b.energy == winner->energy && b.key < winner->key))
            winner = &b;
    }

    result.configurations_examined = total_configs.load();
    result.nodes = total_nodes.load();
    result.optimal = !budget.exhausted.load();
    if (!winner) {
        result.feasible = false;
        result.energy = kInfEnergy;
        return result;
    }
    result.feasible = true;
    result.configuration = winner->config;

    if (objective == ModelKind::IscPlusT) {
        // Baseline pipeline: sleep decisions are taken after scheduling.
        Schedule flagged = apply_dpm_post(power, winner->sub.schedule);
        EvalReport rep = schedule_energy(graph, power, flagged, SwitchPolicy::AsFlagged);
        result.schedule = std::move(flagged);
        result.energy = rep.total_energy;
    } else {
        result.schedule = std::move(winner->sub.schedule);
        result.energy = winner->energy;
    }
    return result;
}

// ---------------------------------------------------------------------------
// discretized_oracle
// ---------------------------------------------------------------------------

namespace {

struct DurationPoint {
    double duration;    // candidate duration (exact split duration may be less)
    double exec;        // minimum execution energy with duration <= this
    double split_dur;   // actual duration of the argmin split
    std::vector<std::pair<int, double>> split;
};

// Minimum execution energy for workload w with duration at most D: single
// frequencies that fit, plus every two-frequency mix hitting D exactly.
DurationPoint exec_min_at(const PowerModel& pw, double w, double D) {
    DurationPoint best;
    best.duration = D;
    best.exec = kInfEnergy;
    const int m = pw.freq_count();
    for (int i = 0; i < m; ++i) {
        double d = w / pw.freqs[i];
        if (d <= D + 1e-15) {
            double e = w * energy_per_cycle_index(pw, i);
            if (e < best.exec) {
                best.exec = e;
                best.split_dur = d;
                best.split = {{i + 1, w}};
            }
        }
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            double inv_i = 1.0 / pw.freqs[i], inv_j = 1.0 / pw.freqs[j];
            double ni = (D - w * inv_j) / (inv_i - inv_j);
            if (ni < -1e-6 * w || ni > w * (1.0 + 1e-6)) continue;
            ni = std::clamp(ni, 0.0, w);
            double nj = w - ni;
            double e = ni * energy_per_cycle_index(pw, i) + nj * energy_per_cycle_index(pw, j);
            if (e < best.exec) {
                best.exec = e;
                best.split_dur = ni * inv_i + nj * inv_j;
                best.split = {{i + 1, ni}, {j + 1, nj}};
            }
        }
    return best;
}

double oracle_idle_min(const PowerModel& pw, double t_be, double lo, double hi) {
    double v = pw.c * std::max(0.0, lo);
    if (hi + kTimeTol >= t_be) v = std::min(v, pw.e_sw);
    return v;
}

double oracle_idle_exact(const PowerModel& pw, double t_be, double len) {
    if (len < kTimeTol) return 0.0;
    return (len + kTimeTol >= t_be) ? pw.e_sw : pw.c * len;
}

}  // namespace

OracleBracket discretized_oracle(const TaskGraph& graph, const PowerModel& power, int K,
                                 std::int64_t cycle_granularity, double time_granularity) {
    const int n = graph.task_count();
    const int m = power.freq_count();
    if (n > 4) throw std::invalid_argument("discretized_oracle: refuses instances with n > 4");
    if (m > 3) throw std::invalid_argument("discretized_oracle: refuses platforms with m > 3");
    if (cycle_granularity < 1 || !(time_granularity > 0.0))
        throw std::invalid_argument("discretized_oracle: granularities must be positive");
    auto viol = validate(graph);
    if (!viol.empty())
        throw std::invalid_argument("discretized_oracle: invalid graph: " + viol.front().message);
    if (n == 0) return {0.0, 0.0};

    const double td = graph.period;
    const double t_be = break_even(power);

    // Duration grid and per-point execution minima for every task.
    std::vector<std::vector<DurationPoint>> pts(n + 1);
    for (int u = 1; u <= n; ++u) {
        double w = static_cast<double>(graph.task(u).workload);
        double d_min = w / power.f_max();
        double d_max = std::min(w / power.f_min(), td);
        if (d_min > td + kTimeTol) return {kInfEnergy, kInfEnergy};  // infeasible
        std::vector<double> grid;
        for (double d = d_min; d < d_max - 1e-15; d += time_granularity) grid.push_back(d);
        grid.push_back(d_max);
        for (double d : grid) pts[u].push_back(exec_min_at(power, w, d));
    }

    // Cycle-grid self-check: no grid split may beat the closed-form minimum
    // for its duration.
    const double g = static_cast<double>(cycle_granularity);
    for (int u = 1; u <= n; ++u) {
        double w = static_cast<double>(graph.task(u).workload);
        if (w / g > 3200.0) continue;  // keep the sweep bounded
        auto check = [&](double n1, double n2, double n3) {
            double cyc[3] = {n1, n2, n3};
            double dur = 0.0, energy = 0.0;
            for (int i = 0; i < m; ++i) {
                dur += cyc[i] / power.freqs[i];
                energy += cyc[i] * energy_per_cycle_index(power, i);
            }
            if (dur > pts[u].back().duration + kTimeTol) return;
            // smallest grid point covering this duration
            for (const DurationPoint& p : pts[u]) {
                if (p.duration + 1e-15 >= dur) {
                    if (energy < p.exec - 1e-9 * (std::fabs(p.exec) + 1.0))
                        throw std::logic_error("discretized_oracle: cycle-grid split beats the "
                                               "closed-form execution minimum");
                    return;
                }
            }
        };
        if (m == 1) {
            check(w, 0.0, 0.0);
        } else if (m == 2) {
            for (double n1 = 0.0; n1 <= w; n1 += g) check(n1, w - n1, 0.0);
        } else {
            for (double n1 = 0.0; n1 <= w; n1 += g)
                for (double n2 = 0.0; n1 + n2 <= w; n2 += g) check(n1, n2, w - n1 - n2);
        }
    }

    // Full configuration enumeration, independent of the exact solver's
    // canonicalization: all K^n assignments, all per-processor permutations.
    std::vector<std::vector<int>> succ(n + 1);
    std::vector<std::vector<int>> preds(n + 1);
    for (auto [u, v] : graph.edges) {
        succ[u].push_back(v);
        preds[v].push_back(u);
    }

    double lb = kInfEnergy, ub = kInfEnergy;

    std::vector<int> assign(n + 1, 1);
    while (true) {
        // per-processor permutations
        std::vector<std::vector<int>> subsets(K);
        for (int u = 1; u <= n; ++u) subsets[assign[u] - 1].push_back(u);
        std::vector<std::vector<std::vector<int>>> proc_orders(K);
        for (int k = 0; k < K; ++k) {
            std::vector<int> perm = subsets[k];
            std::sort(perm.begin(), perm.end());
            do {
                proc_orders[k].push_back(perm);
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
        std::vector<size_t> pick(K, 0);
        while (true) {
            Configuration cfg;
            cfg.processors = K;
            cfg.assignment = assign;
            cfg.order.resize(K);
            for (int k = 0; k < K; ++k) cfg.order[k] = proc_orders[k][pick[k]];
            if (combined_acyclic(graph, cfg)) {
                // chain predecessor per task
                std::vector<int> chain_pred(n + 1, 0);
                for (int k = 0; k < K; ++k)
                    for (size_t i = 1; i < cfg.order[k].size(); ++i)
                        chain_pred[cfg.order[k][i]] = cfg.order[k][i - 1];
                auto asap_makespan_ok = [&](const std::vector<double>& dur,
                                            std::vector<double>* starts_out) {
                    std::vector<double> start(n + 1, 0.0);
                    std::vector<int> indeg(n + 1, 0);
                    std::vector<std::vector<int>> s2(n + 1);
                    for (auto [u, v] : graph.edges) {
                        s2[u].push_back(v);
                        indeg[v]++;
                    }
                    for (int v = 1; v <= n; ++v)
                        if (chain_pred[v]) {
                            s2[chain_pred[v]].push_back(v);
                            indeg[v]++;
                        }
                    std::vector<int> q;
                    for (int u = 1; u <= n; ++u)
                        if (indeg[u] == 0) q.push_back(u);
                    size_t head = 0;
                    double makespan = 0.0;
                    while (head < q.size()) {
                        int u = q[head++];
                        makespan = std::max(makespan, start[u] + dur[u]);
                        for (int v : s2[u]) {
                            start[v] = std::max(start[v], start[u] + dur[u]);
                            if (--indeg[v] == 0) q.push_back(v);
                        }
                    }
                    if (starts_out) *starts_out = start;
                    return makespan <= td + kTimeTol;
                };

                // Lower bound over duration boxes.
                std::vector<size_t> box(n + 1, 0);
                while (true) {
                    double exec_lb = 0.0;
                    std::vector<double> dlo(n + 1, 0.0), dhi(n + 1, 0.0);
                    for (int u = 1; u <= n; ++u) {
                        size_t b = box[u];
                        size_t hi_ix = std::min(b + 1, pts[u].size() - 1);
                        dlo[u] = pts[u][b].duration;
                        dhi[u] = pts[u][hi_ix].duration;
                        exec_lb += pts[u][hi_ix].exec;
                    }
                    bool feasible_box = asap_makespan_ok(dlo, nullptr);
                    if (feasible_box) {
                        double idle_lb = 0.0;
                        bool over = false;
                        for (int k = 0; k < K; ++k) {
                            if (cfg.order[k].empty()) continue;
                            double blo = 0.0, bhi = 0.0;
                            for (int u : cfg.order[k]) {
                                blo += dlo[u];
                                bhi += dhi[u];
                            }
                            if (td - blo < -kTimeTol) {
                                over = true;
                                break;
                            }
                            idle_lb += oracle_idle_min(power, t_be, std::max(0.0, td - bhi),
                                                       td - blo);
                        }
                        if (!over) lb = std::min(lb, exec_lb + idle_lb);
                    }
                    // next box combo
                    int u = 1;
                    for (; u <= n; ++u) {
                        size_t nboxes = std::max<size_t>(1, pts[u].size() - 1);
                        if (++box[u] < nboxes) break;
                        box[u] = 0;
                    }
                    if (u > n) break;
                }

                // Upper bound over duration grid points.
                std::vector<size_t> pt(n + 1, 0);
                while (true) {
                    double exec = 0.0;
                    std::vector<double> dur(n + 1, 0.0);
                    bool usable = true;
                    for (int u = 1; u <= n; ++u) {
                        const DurationPoint& p = pts[u][pt[u]];
                        if (p.exec >= kInfEnergy) {
                            usable = false;
                            break;
                        }
                        exec += p.exec;
                        dur[u] = p.split_dur;
                    }
                    if (usable) {
                        std::vector<double> starts;
                        if (asap_makespan_ok(dur, &starts)) {
                            double idle = 0.0;
                            for (int k = 0; k < K; ++k) {
                                const auto& seq = cfg.order[k];
                                if (seq.empty()) continue;
                                for (size_t i = 1; i < seq.size(); ++i) {
                                    double gap = starts[seq[i]] -
                                                 (starts[seq[i - 1]] + dur[seq[i - 1]]);
                                    idle += oracle_idle_exact(power, t_be, gap);
                                }
                                double wrap = (td - (starts[seq.back()] + dur[seq.back()])) +
                                              starts[seq.front()];
                                idle += oracle_idle_exact(power, t_be, wrap);
                            }
                            ub = std::min(ub, exec + idle);
                        }
                    }
                    int u = 1;
                    for (; u <= n; ++u) {
                        if (++pt[u] < pts[u].size()) break;
                        pt[u] = 0;
                    }
                    if (u > n) break;
                }
            }
            // next order combination
            int k = 0;
            for (; k < K; ++k) {
                if (++pick[k] < proc_orders[k].size()) break;
                pick[k] = 0;
            }
            if (k == K) break;
        }
        // next assignment
        int u = 1;
        for (; u <= n; ++u) {
            if (++assign[u] <= K) break;
            assign[u] = 1;
        }
        if (u > n) break;
    }

    return {lb, ub};
}

}  // namespace esched
