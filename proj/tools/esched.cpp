#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "esched/eval.hpp"
#include "esched/exact.hpp"
#include "esched/heuristic.hpp"
#include "esched/milp.hpp"
#include "esched/power.hpp"
#include "esched/taskgraph.hpp"

namespace fs = std::filesystem;
using namespace esched;

namespace {

// 0 success, 1 usage, 2 infeasible/violations, 3 budget exceeded
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitBudget = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

double parse_duration(const std::string& text) {
    size_t pos = 0;
    double value = std::stod(text, &pos);
    std::string unit = text.substr(pos);
    if (unit == "s") return value;
    if (unit == "ms") return value * 1e-3;
    if (unit == "us") return value * 1e-6;
    throw CLI::ValidationError("duration needs a unit suffix s|ms|us, got '" + text + "'");
}

std::string default_platform_path(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("ESCHED_PLATFORM")) return env;
    throw CLI::ValidationError("no platform given (use --platform or ESCHED_PLATFORM)");
}

PowerModel load_platform_file(const std::string& path) {
    return load_platform(read_file(path));
}

TaskGraph load_graph_file(const std::string& path) {
    TaskGraph g = load_graph(read_file(path));
    auto viol = validate(g);
    if (!viol.empty())
        throw InfeasibleError(path + ": " + viol.front().rule + ": " + viol.front().message);
    return g;
}

struct SolveOutput {
    Schedule schedule;
    double energy = 0.0;
    bool optimal = true;
    bool budget_hit = false;
};

SolveOutput run_solver(const TaskGraph& graph, const PowerModel& power, int K,
                       const std::string& method, ModelKind objective, std::uint64_t seed,
                       int threads, bool force, long node_budget, double time_budget) {
    SolveOutput out;
    if (method == "heuristic") {
        HeuristicResult r = heuristic_schedule(graph, power, K, seed, objective);
        out.schedule = std::move(r.schedule);
        out.energy = r.energy;
        std::cerr << "stage1 " << format_double(r.stage1_seconds, 3) << " s, stage2 "
                  << format_double(r.stage2_seconds, 3) << " s\n";
        return out;
    }
    ExactLimits limits;
    limits.node_budget = node_budget;
    limits.time_budget_s = time_budget;
    if (force) {
        limits.max_tasks = std::max(limits.max_tasks, graph.task_count());
        limits.max_processors = std::max(limits.max_processors, K);
        limits.max_freqs = std::max(limits.max_freqs, power.freq_count());
    }
    double seed_incumbent = 1e300;
    if (objective == ModelKind::Isct && graph.task_count() > 0) {
        try {
            seed_incumbent = heuristic_schedule(graph, power, K, 0, objective).energy;
        } catch (const InfeasibleError&) {
        }
    }
    ExactResult r = exact_schedule(graph, power, K, limits, objective, threads, seed_incumbent);
    if (!r.feasible) throw InfeasibleError("no feasible schedule within the period");
    out.schedule = std::move(r.schedule);
    out.energy = r.energy;
    out.optimal = r.optimal;
    out.budget_hit = !r.optimal;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-aware scheduling of periodic task graphs on homogeneous "
                 "multiprocessors (intra-task DVFS + sleep transitions)"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "Generate a random task graph");
    int gen_tasks = 7;
    std::uint64_t gen_seed = 1;
    std::int64_t gen_mean = 2000000;
    double gen_spread = 0.5;
    int gen_in = 2, gen_out = 3;
    std::string gen_period, gen_platform, gen_out_path, gen_dot;
    double gen_load = 0.0;
    int gen_procs = 0;
    gen->add_option("--tasks", gen_tasks, "Number of tasks")->required();
    gen->add_option("--seed", gen_seed, "Generator seed")->required();
    gen->add_option("--mean-workload", gen_mean, "Mean task workload in cycles");
    gen->add_option("--spread", gen_spread, "Workload spread as a fraction of the mean");
    gen->add_option("--max-in", gen_in, "Maximum in-degree");
    gen->add_option("--max-out", gen_out, "Maximum out-degree");
    gen->add_option("--period", gen_period, "Period with unit suffix, e.g. 8ms");
    gen->add_option("--load", gen_load,
                    "Derive the period so that total workload at the middle frequency uses "
                    "this fraction of K*Td (requires --platform)");
    gen->add_option("--platform", gen_platform, "Platform config (for --load)");
    gen->add_option("--procs", gen_procs, "Processor count override (for --load)");
    gen->add_option("-o,--output", gen_out_path, "Output task graph file")->required();
    gen->add_option("--dot", gen_dot, "Also write a DOT rendering");

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "Schedule a task graph");
    std::string sv_graph, sv_platform, sv_method = "exact", sv_objective = "isct";
    std::string sv_out, sv_lp;
    std::uint64_t sv_seed = 0;
    int sv_threads = 1, sv_procs = 0;
    bool sv_force = false;
    long sv_node_budget = 0;
    double sv_time_budget = 0.0;
    solve->add_option("--graph", sv_graph, "Task graph file")->required();
    solve->add_option("--platform", sv_platform, "Platform config file");
    solve->add_option("--procs", sv_procs, "Processor count override");
    solve->add_option("--method", sv_method, "exact | heuristic | export-lp")
        ->check(CLI::IsMember({"exact", "heuristic", "export-lp"}));
    solve->add_option("--objective", sv_objective, "isct | isc-plus-t")
        ->check(CLI::IsMember({"isct", "isc-plus-t"}));
    solve->add_option("--seed", sv_seed, "Heuristic tie-break seed (0 = deterministic)");
    solve->add_option("--threads", sv_threads, "Worker threads for the exact search");
    solve->add_flag("--force", sv_force, "Run the exact search beyond its size caps");
    solve->add_option("--node-budget", sv_node_budget, "Branch-and-bound node budget");
    solve->add_option("--time-budget", sv_time_budget, "Wall-clock budget in seconds");
    solve->add_option("-o,--output", sv_out, "Output schedule file");
    solve->add_option("--lp", sv_lp, "Write the model as an LP file");

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "Verify and evaluate a schedule");
    std::string ev_graph, ev_platform, ev_schedule, ev_gantt, ev_format = "text";
    ev->add_option("--graph", ev_graph, "Task graph file")->required();
    ev->add_option("--platform", ev_platform, "Platform config file");
    ev->add_option("--schedule", ev_schedule, "Schedule file")->required();
    ev->add_option("--gantt", ev_gantt, "Write a Gantt SVG");
    ev->add_option("--format", ev_format, "text | records")
        ->check(CLI::IsMember({"text", "records"}));

    // ---- compare ----
    auto* cmp = app.add_subcommand("compare", "Solve a suite both ways and tabulate");
    std::string cp_manifest, cp_platform, cp_isct = "exact", cp_base = "heuristic";
    std::string cp_out, cp_format = "text";
    int cp_threads = 1;
    bool cp_force = false;
    cmp->add_option("--manifest", cp_manifest, "Manifest file, one graph path per line")
        ->required();
    cmp->add_option("--platform", cp_platform, "Platform config file");
    cmp->add_option("--isct-method", cp_isct, "exact | heuristic")
        ->check(CLI::IsMember({"exact", "heuristic"}));
    cmp->add_option("--baseline-method", cp_base, "exact | heuristic")
        ->check(CLI::IsMember({"exact", "heuristic"}));
    cmp->add_option("--threads", cp_threads, "Worker threads for the exact search");
    cmp->add_flag("--force", cp_force, "Run the exact search beyond its size caps");
    cmp->add_option("-o,--output", cp_out, "Write the report here instead of stdout");
    cmp->add_option("--format", cp_format, "text | records")
        ->check(CLI::IsMember({"text", "records"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            GenParams params;
            params.task_count = gen_tasks;
            params.seed = gen_seed;
            params.mean_workload = gen_mean;
            params.workload_spread = gen_spread;
            params.max_in_degree = gen_in;
            params.max_out_degree = gen_out;
            params.period = 1.0;  // provisional, fixed below
            TaskGraph g = random_taskgraph(params);
            if (!gen_period.empty()) {
                g.period = parse_duration(gen_period);
            } else if (gen_load > 0.0) {
                PowerModel pw = load_platform_file(default_platform_path(gen_platform));
                int K = gen_procs > 0 ? gen_procs : pw.processors;
                double f_mid = pw.freqs[pw.freq_count() / 2];
                double busy = static_cast<double>(g.total_workload()) / f_mid;
                double period = busy / (gen_load * K);
                // never go below the f_max critical path
                double cp = 0.0;
                for (auto [id, r] : upward_ranks(g, pw.f_max())) cp = std::max(cp, r);
                g.period = std::max(period, cp * 1.05);
            } else {
                throw CLI::ValidationError("gen needs --period or --load");
            }
            write_file(gen_out_path, save_graph(g));
            if (!gen_dot.empty()) write_file(gen_dot, save_dot(g));
            std::cout << "tasks " << g.task_count() << "\n"
                      << "total-workload-cycles " << g.total_workload() << "\n"
                      << "period-ms " << format_double(g.period * 1e3, 6) << "\n";
            return 0;
        }

        if (*solve) {
            TaskGraph g = load_graph_file(sv_graph);
            PowerModel pw = load_platform_file(default_platform_path(sv_platform));
            int K = sv_procs > 0 ? sv_procs : pw.processors;
            ModelKind objective =
                sv_objective == "isct" ? ModelKind::Isct : ModelKind::IscPlusT;

            if (!sv_lp.empty() || sv_method == "export-lp") {
                MilpModel model = objective == ModelKind::Isct ? build_isct_model(g, pw, K)
                                                               : build_isc_t_model(g, pw, K);
                if (sv_lp.empty())
                    throw CLI::ValidationError("--method export-lp requires --lp <path>");
                write_file(sv_lp, export_lp(model));
                std::cout << "lp-file " << sv_lp << "\n"
                          << "variables " << model.vars.size() << "\n"
                          << "constraints " << model.rows.size() << "\n";
                if (sv_method == "export-lp") return 0;
            }

            SolveOutput out = run_solver(g, pw, K, sv_method, objective, sv_seed, sv_threads,
                                         sv_force, sv_node_budget, sv_time_budget);
            if (!sv_out.empty()) write_file(sv_out, save_schedule(out.schedule));
            EvalReport rep = schedule_energy(g, pw, out.schedule, SwitchPolicy::AsFlagged);
            std::cout << "energy-mj " << format_double(out.energy * 1e3, 6) << "\n"
                      << "exec-mj " << format_double(rep.exec_energy * 1e3, 6) << "\n"
                      << "idle-mj " << format_double(rep.idle_energy * 1e3, 6) << "\n"
                      << "used-processors " << rep.used_processors << "\n"
                      << "optimal " << (out.optimal ? "yes" : "no") << "\n";
            if (out.budget_hit) {
                std::cerr << "warning: budget exhausted, result may be suboptimal\n";
                return kExitBudget;
            }
            return 0;
        }

        if (*ev) {
            TaskGraph g = load_graph_file(ev_graph);
            PowerModel pw = load_platform_file(default_platform_path(ev_platform));
            Schedule s = load_schedule(read_file(ev_schedule), g, pw);
            auto viol = validate_schedule(g, pw, s);
            if (!viol.empty()) {
                for (const Violation& v : viol)
                    std::cerr << "violation " << v.rule << ": " << v.message << "\n";
                return kExitInfeasible;
            }
            EvalReport rep = schedule_energy(g, pw, s, SwitchPolicy::AsFlagged);
            if (ev_format == "records") {
                std::cout << "total_energy_j=" << format_double(rep.total_energy)
                          << " exec_energy_j=" << format_double(rep.exec_energy)
                          << " idle_energy_j=" << format_double(rep.idle_energy)
                          << " idle_intervals=" << rep.idle_interval_count
                          << " idle_time_s=" << format_double(rep.total_idle_time)
                          << " used_processors=" << rep.used_processors << "\n";
            } else {
                std::cout << "total-energy-mj " << format_double(rep.total_energy * 1e3, 6)
                          << "\nexec-mj " << format_double(rep.exec_energy * 1e3, 6)
                          << "\nidle-mj " << format_double(rep.idle_energy * 1e3, 6)
                          << "\nidle-intervals " << rep.idle_interval_count
                          << "\nidle-time-ms " << format_double(rep.total_idle_time * 1e3, 6)
                          << "\nused-processors " << rep.used_processors << "\n";
            }
            if (!ev_gantt.empty()) write_file(ev_gantt, gantt_svg(g, pw, s));
            return 0;
        }

        if (*cmp) {
            PowerModel pw = load_platform_file(default_platform_path(cp_platform));
            fs::path base_dir = fs::path(cp_manifest).parent_path();
            std::istringstream in(read_file(cp_manifest));
            std::string line;
            std::vector<CompareRow> rows;
            while (std::getline(in, line)) {
                auto hash = line.find('#');
                if (hash != std::string::npos) line = line.substr(0, hash);
                std::istringstream ls(line);
                std::string rel;
                if (!(ls >> rel)) continue;
                fs::path path = fs::path(rel).is_absolute() ? fs::path(rel) : base_dir / rel;
                TaskGraph g = load_graph_file(path.string());
                int K = pw.processors;

                SolveOutput isct = run_solver(g, pw, K, cp_isct, ModelKind::Isct, 0, cp_threads,
                                              cp_force, 0, 0.0);
                SolveOutput base = run_solver(g, pw, K, cp_base, ModelKind::IscPlusT, 0,
                                              cp_threads, cp_force, 0, 0.0);
                rows.push_back(compare_schedules(fs::path(rel).stem().string(), g, pw,
                                                 isct.schedule, isct.energy, base.schedule));
            }
            std::string report =
                cp_format == "text" ? format_compare_table(rows) : format_compare_records(rows);
            if (cp_out.empty())
                std::cout << report;
            else
                write_file(cp_out, report);
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return 0;
}
