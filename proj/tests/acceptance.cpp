// Acceptance suite: runs every shipped criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "esched/eval.hpp"
#include "esched/exact.hpp"
#include "esched/heuristic.hpp"
#include "esched/milp.hpp"
#include "esched/power.hpp"
#include "esched/taskgraph.hpp"

namespace fs = std::filesystem;
using namespace esched;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail = "") {
    std::printf("%s criterion %2d: %s%s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
                detail.empty() ? "" : ("  [" + detail + "]").c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kFixtures = FIXTURES_DIR;

PowerModel paper5;
PowerModel paper3;

// ---- suite infrastructure --------------------------------------------------

struct Instance {
    std::string name;
    TaskGraph graph;
    int K = 0;
};

struct PipelineRun {
    ExactResult exact_isct;
    HeuristicResult heur_isct;
    HeuristicResult baseline;  // HEFT configuration, exec-only stage 2, post-hoc DPM
};

std::vector<Instance> load_suite() {
    std::vector<Instance> out;
    for (const auto& entry : fs::directory_iterator(kFixtures + "/suite")) {
        std::string name = entry.path().filename().string();
        if (name.size() < 7 || name.substr(name.size() - 6) != ".graph") continue;
        Instance inst;
        inst.name = name.substr(0, name.size() - 6);
        inst.graph = load_graph(slurp(entry.path()));
        auto kpos = name.rfind("_k");
        inst.K = std::stoi(name.substr(kpos + 2));
        out.push_back(std::move(inst));
    }
    std::sort(out.begin(), out.end(),
              [](const Instance& a, const Instance& b) { return a.name < b.name; });
    return out;
}

PipelineRun run_instance(const Instance& inst, int threads) {
    PipelineRun run;
    run.heur_isct = heuristic_schedule(inst.graph, paper5, inst.K, 0, ModelKind::Isct);
    run.exact_isct = exact_schedule(inst.graph, paper5, inst.K, {}, ModelKind::Isct, threads,
                                    run.heur_isct.energy);
    run.baseline = heuristic_schedule(inst.graph, paper5, inst.K, 0, ModelKind::IscPlusT);
    return run;
}

struct SuiteStats {
    std::vector<PipelineRun> runs;
    std::string artifacts;  // all byte-stable outputs, concatenated
};

SuiteStats run_suite(const std::vector<Instance>& suite, int threads) {
    SuiteStats st;
    std::vector<CompareRow> rows;
    for (const Instance& inst : suite) {
        PipelineRun run = run_instance(inst, threads);
        st.artifacts += "== " + inst.name + "\n";
        st.artifacts += save_schedule(run.exact_isct.schedule);
        st.artifacts += save_schedule(run.heur_isct.schedule);
        st.artifacts += save_schedule(run.baseline.schedule);
        st.artifacts += gantt_svg(inst.graph, paper5, run.exact_isct.schedule);
        st.artifacts += export_lp(build_isct_model(inst.graph, paper5, inst.K));
        rows.push_back(compare_schedules(inst.name, inst.graph, paper5,
                                         run.exact_isct.schedule, run.exact_isct.energy,
                                         run.baseline.schedule));
        st.runs.push_back(std::move(run));
    }
    st.artifacts += format_compare_table(rows);
    st.artifacts += format_compare_records(rows);
    return st;
}

// idle statistics over non-whole-period intervals
struct IdleStats {
    int count = 0;
    double time = 0.0;
    int long_enough = 0;  // intervals reaching break-even
};

IdleStats idle_stats(const Schedule& s) {
    IdleStats st;
    double t_be = break_even(paper5);
    for (const IdleInterval& iv : idle_intervals(paper5, s)) {
        if (iv.kind == IdleKind::WholePeriod) continue;
        st.count++;
        st.time += iv.length;
        if (iv.length + 1e-9 >= t_be) st.long_enough++;
    }
    return st;
}

// ---- criteria --------------------------------------------------------------

void criterion_1() {
    const double expected[] = {0.6999e-9, 0.6610e-9, 0.6449e-9, 0.6478e-9, 0.6639e-9};
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 5; ++i) {
        double got = energy_per_cycle_index(paper5, i);
        if (std::fabs(got - expected[i]) / expected[i] > 1e-3) {
            ok = false;
            detail = "f" + std::to_string(i + 1) + " gave " + format_double(got);
        }
    }
    for (int i = 0; i < 5; ++i)
        if (energy_per_cycle_index(paper5, 2) > energy_per_cycle_index(paper5, i)) {
            ok = false;
            detail = "minimum is not at 1.53 GHz";
        }
    report(1, ok, "energy per cycle at the five operating points, minimum at 1.53 GHz", detail);
}

void criterion_2() {
    double t_be = break_even(paper5);
    report(2, t_be == 5e-3, "break-even time is exactly 5 ms",
           t_be == 5e-3 ? "" : format_double(t_be));
}

void criterion_3() {
    PowerModel fit_only = paper5;
    fit_only.freqs.clear();
    fit_only.p_dep.clear();
    bool ok = true;
    std::string detail;
    for (int i = 0; i < paper5.freq_count(); ++i) {
        double table = paper5.p_dep[i] + paper5.c;
        double fitted = power_at(fit_only, paper5.freqs[i]);
        double rel = std::fabs(fitted - table) / table;
        if (rel > 0.01) {
            ok = false;
            detail = "relative error " + format_double(rel, 3);
        }
    }
    report(3, ok, "fitted power curve within 1% of the table at all five frequencies", detail);
}

void criterion_4() {
    bool ok = true;
    // lemma 2: exhaustive corners
    {
        MilpModel md;
        int x = md.add_var("x", VarKind::Binary, 0, 1);
        int y = md.add_var("y", VarKind::Binary, 0, 1);
        md.linearize_bool_times_bool("C0", "z", x, y);
        for (double xv : {0.0, 1.0})
            for (double yv : {0.0, 1.0}) {
                ok &= check_solution(md, {xv, yv, xv * yv}).empty();
                ok &= !check_solution(md, {xv, yv, 1.0 - xv * yv}).empty();
            }
    }
    // lemma 1: randomized samples
    Rng rng(1905);
    for (int trial = 0; trial < 10000 && ok; ++trial) {
        double s1 = rng.real(0.0, 4.0), s2 = rng.real(0.1, 4.0);
        MilpModel md;
        int b = md.add_var("b", VarKind::Binary, 0, 1);
        int x = md.add_var("x", VarKind::Continuous, -s1, s2);
        md.linearize_bool_times_real("C0", "t", b, LinExpr::of(x), s1, s2);
        double bv = rng.real01() < 0.5 ? 0.0 : 1.0;
        double xv = rng.real(-s1, s2);
        ok &= check_solution(md, {bv, xv, bv * xv}).empty();
        double off = bv * xv + (rng.real01() < 0.5 ? 1.0 : -1.0) * rng.real(1e-3, 1.0);
        if (off >= -s1 && off <= s2) ok &= !check_solution(md, {bv, xv, off}).empty();
    }
    report(4, ok, "linearization lemmas admit exactly the product values "
                  "(4 corners + 10^4 samples)");
}

void criterion_5() {
    bool ok = true;
    std::string detail;

    // hand-derived fixtures
    TaskGraph one;
    one.tasks = {{1, 2000000}};
    one.period = 8e-3;
    ExactResult r1 = exact_schedule(one, paper3, 1);
    if (!r1.feasible || std::fabs(r1.energy - 1.6748039215686274e-3) > 1e-7) {
        ok = false;
        detail = "single-task fixture gave " + format_double(r1.energy);
    }
    TaskGraph two;
    two.tasks = {{1, 2000000}, {2, 2000000}};
    two.period = 8e-3;
    ExactResult r2 = exact_schedule(two, paper3, 2);
    EvalReport rep2 = schedule_energy(two, paper3, r2.schedule, SwitchPolicy::AsFlagged);
    if (!r2.feasible || std::fabs(r2.energy - 2.9646078431372548e-3) > 1e-7 ||
        rep2.used_processors != 1) {
        ok = false;
        detail = "two-task fixture gave " + format_double(r2.energy) + " on " +
                 std::to_string(rep2.used_processors) + " processors";
    }

    int bracketed = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        GenParams p;
        p.task_count = 1 + static_cast<int>((seed - 1) % 4);
        p.seed = seed;
        TaskGraph g = random_taskgraph(p);
        double cp = 0.0;
        for (auto [id, r] : upward_ranks(g, paper3.f_max())) cp = std::max(cp, r);
        g.period = std::max(static_cast<double>(g.total_workload()) / 1.53e9, 1.1 * cp);

        ExactResult res = exact_schedule(g, paper3, 2);
        OracleBracket b = discretized_oracle(g, paper3, 2, 1000, 0.05e-3);
        if (res.feasible && b.lower <= res.energy + 1e-12 && res.energy <= b.upper + 1e-12) {
            ++bracketed;
        } else {
            ok = false;
            detail = "seed " + std::to_string(seed) + ": energy " + format_double(res.energy) +
                     " outside [" + format_double(b.lower) + ", " + format_double(b.upper) + "]";
        }
    }
    if (bracketed < 20) ok = false;
    report(5, ok, "exact optimum inside the oracle bracket on 20 instances and both fixtures",
           detail);
}

// Criteria 6..10 share the suite runs.
void criteria_6_to_10(const std::vector<Instance>& suite) {
    SuiteStats pass1 = run_suite(suite, 1);

    // 6: model objective versus schedule-semantics energy, every solver path
    bool ok6 = true;
    std::string det6;
    for (size_t i = 0; i < suite.size(); ++i) {
        const Instance& inst = suite[i];
        const PipelineRun& run = pass1.runs[i];
        MilpModel isct = build_isct_model(inst.graph, paper5, inst.K);
        MilpModel base = build_isc_t_model(inst.graph, paper5, inst.K);

        auto check_pair = [&](const MilpModel& md, const Schedule& s, double expect,
                              bool exec_only) {
            Solution sol = embed_schedule(md, inst.graph, paper5, s);
            auto values = solution_values(md, sol);
            if (!check_solution(md, values).empty()) {
                ok6 = false;
                det6 = inst.name + ": model rows violated";
                return;
            }
            double obj = md.objective_value(values);
            EvalReport rep = schedule_energy(inst.graph, paper5, s, SwitchPolicy::AsFlagged);
            double ev = exec_only ? rep.exec_energy : rep.total_energy;
            if (std::fabs(obj - ev) > 1e-6 * std::max(1e-12, std::fabs(ev))) {
                ok6 = false;
                det6 = inst.name + ": objective " + format_double(obj) + " vs eval " +
                       format_double(ev);
            }
            if (expect >= 0.0 && std::fabs(ev - expect) > 1e-6 * std::max(1e-12, expect)) {
                ok6 = false;
                det6 = inst.name + ": eval " + format_double(ev) + " vs solver " +
                       format_double(expect);
            }
            VerifyResult vr = verify_solution(md, inst.graph, paper5, sol);
            if (!vr.violations.empty()) {
                ok6 = false;
                det6 = inst.name + ": verifier reported " + vr.violations.front().rule;
            }
        };
        check_pair(isct, run.exact_isct.schedule, run.exact_isct.energy, false);
        check_pair(isct, run.heur_isct.schedule, run.heur_isct.energy, false);
        // the baseline schedule is feasible for the full model too; its flags
        // follow break-even semantics after post-hoc DPM
        check_pair(isct, run.baseline.schedule, run.baseline.energy, false);
        check_pair(base, run.baseline.schedule, -1.0, true);
    }
    report(6, ok6, "model objective equals schedule-semantics energy on every solver path",
           det6);

    // 7: dominance directions and gaps
    bool ok7 = true;
    std::string det7;
    double saving_sum = 0.0, gap_sum = 0.0;
    for (size_t i = 0; i < suite.size(); ++i) {
        const PipelineRun& run = pass1.runs[i];
        double ex = run.exact_isct.energy, he = run.heur_isct.energy, ba = run.baseline.energy;
        if (!(run.exact_isct.feasible && run.exact_isct.optimal)) {
            ok7 = false;
            det7 = suite[i].name + ": exact not optimal";
        }
        if (ex > he + 1e-12 || he > ba + 1e-12) {
            ok7 = false;
            det7 = suite[i].name + ": " + format_double(ex) + " / " + format_double(he) +
                   " / " + format_double(ba);
        }
        saving_sum += (ba - ex) / ba * 100.0;
        gap_sum += (he - ex) / ex;
    }
    double avg_saving = saving_sum / suite.size();
    double avg_gap = gap_sum / suite.size();
    if (!(avg_saving > 0.0)) {
        ok7 = false;
        det7 = "average saving " + format_double(avg_saving, 4) + "%";
    }
    if (!(avg_gap <= 0.20)) {
        ok7 = false;
        det7 = "average heuristic gap " + format_double(avg_gap * 100.0, 4) + "%";
    }
    report(7, ok7,
           "exact <= heuristic <= baseline instance-wise; average saving " +
               format_double(avg_saving, 4) + "%, heuristic gap " +
               format_double(avg_gap * 100.0, 4) + "% <= 20%",
           det7);

    // 8: idle interval structure
    IdleStats isct_total, base_total;
    for (size_t i = 0; i < suite.size(); ++i) {
        IdleStats a = idle_stats(pass1.runs[i].exact_isct.schedule);
        IdleStats b = idle_stats(pass1.runs[i].baseline.schedule);
        isct_total.count += a.count;
        isct_total.time += a.time;
        isct_total.long_enough += a.long_enough;
        base_total.count += b.count;
        base_total.time += b.time;
        base_total.long_enough += b.long_enough;
    }
    double frac_isct =
        isct_total.count ? static_cast<double>(isct_total.long_enough) / isct_total.count : 1.0;
    double frac_base =
        base_total.count ? static_cast<double>(base_total.long_enough) / base_total.count : 1.0;
    bool ok8 = isct_total.count <= base_total.count &&
               isct_total.time >= base_total.time - 1e-9 && frac_isct > frac_base;
    report(8, ok8,
           "idle structure: counts " + std::to_string(isct_total.count) + " <= " +
               std::to_string(base_total.count) + ", time " +
               format_double(isct_total.time * 1e3, 4) + " >= " +
               format_double(base_total.time * 1e3, 4) + " ms, sleepable fraction " +
               format_double(frac_isct * 100.0, 4) + "% > " +
               format_double(frac_base * 100.0, 4) + "%");

    // 9: busy/idle closure
    bool ok9 = true;
    std::string det9;
    for (size_t i = 0; i < suite.size(); ++i) {
        for (const Schedule* s : {&pass1.runs[i].exact_isct.schedule,
                                  &pass1.runs[i].heur_isct.schedule,
                                  &pass1.runs[i].baseline.schedule}) {
            EvalReport rep = schedule_energy(suite[i].graph, paper5, *s, SwitchPolicy::AsFlagged);
            for (const ProcessorBreakdown& pb : rep.per_processor) {
                if (pb.busy == 0.0 && pb.idle == 0.0) continue;  // unused
                if (std::fabs(pb.busy + pb.idle - suite[i].graph.period) > 1e-9) {
                    ok9 = false;
                    det9 = suite[i].name + " p" + std::to_string(pb.processor) + ": " +
                           format_double(pb.busy + pb.idle) + " vs " +
                           format_double(suite[i].graph.period);
                }
            }
        }
    }
    report(9, ok9, "busy + idle = Td within 1e-9 s on every used processor", det9);

    // 10: byte-identical artifacts across a rerun with 4 exact threads
    SuiteStats pass2 = run_suite(suite, 4);
    bool ok10 = pass1.artifacts == pass2.artifacts;
    report(10, ok10,
           "two full suite runs (threads 1 vs 4) produce byte-identical schedules, "
           "reports, LP exports, and SVGs",
           ok10 ? "" : "artifact streams differ");
}

void criterion_11() {
    bool ok = true;
    std::string detail;

    TaskGraph n1;
    n1.tasks = {{1, 2000000}};
    n1.period = 8e-3;
    MilpModel m1 = build_isct_model(n1, paper5, 1);
    if (export_lp(m1) != slurp(kFixtures + "/golden/n1_isct.lp")) {
        ok = false;
        detail = "n1 LP bytes differ";
    }

    TaskGraph n2;
    n2.tasks = {{1, 2000000}, {2, 1500000}};
    n2.edges = {{1, 2}};
    n2.period = 8e-3;
    MilpModel m2 = build_isct_model(n2, paper5, 2);
    if (export_lp(m2) != slurp(kFixtures + "/golden/n2_isct.lp")) {
        ok = false;
        detail = "n2 LP bytes differ";
    }

    // closed-form variable counts: n, n*m, n*K, (n+1)^2*K - n*K
    auto counts_ok = [&](const MilpModel& md, int n, int m, int K) {
        return md.count_vars_with_prefix("start_") == n &&
               md.count_vars_with_prefix("n_") == n * m &&
               md.count_vars_with_prefix("p_") == n * K &&
               md.count_vars_with_prefix("o_") == (n + 1) * (n + 1) * K - n * K;
    };
    if (!counts_ok(m1, 1, 5, 1) || !counts_ok(m2, 2, 5, 2)) {
        ok = false;
        detail = "variable counts off on the golden models";
    }
    TaskGraph n5;
    for (int i = 1; i <= 5; ++i) n5.tasks.push_back({i, 1000000});
    n5.edges = {{1, 2}, {1, 3}, {2, 4}, {3, 5}};
    n5.period = 8e-3;
    if (!counts_ok(build_isct_model(n5, paper5, 3), 5, 5, 3)) {
        ok = false;
        detail = "variable counts off at n=5, K=3";
    }
    report(11, ok, "golden LP files byte-identical; variable counts match the closed forms",
           detail);
}

}  // namespace

int main() {
    paper5 = load_platform(slurp(kFixtures + "/paper.platform"));
    paper3 = load_platform(slurp(kFixtures + "/paper_m3.platform"));

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();

    std::vector<Instance> suite = load_suite();
    if (suite.size() != 25) {
        report(7, false, "suite", "expected 25 instances, found " + std::to_string(suite.size()));
        return failures;
    }
    criteria_6_to_10(suite);
    criterion_11();

    std::printf("%d criterion failure(s)\n", failures);
    return failures;
}
