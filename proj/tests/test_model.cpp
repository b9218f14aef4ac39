#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "esched/milp.hpp"
#include "esched/util.hpp"

using namespace esched;

namespace {

PowerModel paper_platform() {
    std::ifstream in(std::string(FIXTURES_DIR) + "/paper.platform");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_platform(ss.str());
}

TaskGraph make(std::vector<std::int64_t> workloads, std::vector<std::pair<int, int>> edges,
               double period = 8e-3) {
    TaskGraph g;
    for (size_t i = 0; i < workloads.size(); ++i)
        g.tasks.push_back({static_cast<int>(i) + 1, workloads[i]});
    g.edges = std::move(edges);
    g.period = period;
    return g;
}

// Does any row or bound of the model reject this assignment?
bool values_feasible(const MilpModel& model, const std::vector<double>& values) {
    return check_solution(model, values).empty();
}

// Back-to-back placement at the cheapest frequency, round-robin processors;
// an easily audited feasible schedule for anti-drift checks.
Schedule simple_schedule(const TaskGraph& g, const PowerModel& pw, int K) {
    int cheapest = 0;
    for (int i = 0; i < pw.freq_count(); ++i)
        if (energy_per_cycle_index(pw, i) < energy_per_cycle_index(pw, cheapest)) cheapest = i;

    Schedule s;
    s.period = g.period;
    s.processors = K;
    std::vector<double> proc_free(K, 0.0);
    std::map<int, double> finish;
    std::vector<std::vector<int>> preds(g.task_count() + 1);
    for (auto [u, v] : g.edges) preds[v].push_back(u);

    int next_proc = 0;
    for (int u : topological_order(g)) {
        double ready = 0.0;
        for (int p : preds[u]) ready = std::max(ready, finish[p]);
        int k = next_proc;
        next_proc = (next_proc + 1) % K;
        double w = static_cast<double>(g.task(u).workload);
        double dur = w / pw.freqs[cheapest];
        double start = std::max(ready, proc_free[k]);
        finish[u] = start + dur;
        proc_free[k] = finish[u];
        s.tasks.push_back({u, k + 1, start, {{cheapest + 1, w}}});
    }
    return apply_dpm_post(pw, s);
}

}  // namespace

TEST_CASE("bool-times-real lemma: identity and forcing cases") {
    MilpModel md;
    int b = md.add_var("b", VarKind::Binary, 0.0, 1.0);
    int x = md.add_var("x", VarKind::Continuous, -10.0, 10.0);
    int t = md.linearize_bool_times_real("C0", "t", b, LinExpr::of(x), 10.0, 10.0);
    CHECK(md.rows.size() == 4);  // the double bound row plus the two x rows

    // b = 1 forces t = x = 3.7
    CHECK(values_feasible(md, {1.0, 3.7, 3.7}));
    CHECK_FALSE(values_feasible(md, {1.0, 3.7, 3.6}));
    CHECK_FALSE(values_feasible(md, {1.0, 3.7, 0.0}));
    // b = 0 forces t = 0 whatever x is
    CHECK(values_feasible(md, {0.0, 3.7, 0.0}));
    CHECK(values_feasible(md, {0.0, -9.9, 0.0}));
    CHECK_FALSE(values_feasible(md, {0.0, 3.7, 0.5}));
    CHECK(t == 2);
}

TEST_CASE("bool-times-real lemma: randomized sampling over the polytope") {
    Rng rng(404);
    for (int trial = 0; trial < 1000; ++trial) {
        double s1 = rng.real(0.0, 5.0);
        double s2 = rng.real(0.1, 5.0);
        MilpModel md;
        int b = md.add_var("b", VarKind::Binary, 0.0, 1.0);
        int x = md.add_var("x", VarKind::Continuous, -s1, s2);
        md.linearize_bool_times_real("C0", "t", b, LinExpr::of(x), s1, s2);

        double bval = rng.real01() < 0.5 ? 0.0 : 1.0;
        double xval = rng.real(-s1, s2);
        CHECK(values_feasible(md, {bval, xval, bval * xval}));
        double wrong = bval * xval + (rng.real01() < 0.5 ? 1.0 : -1.0) * rng.real(0.01, 1.0);
        if (wrong >= -s1 && wrong <= s2) CHECK_FALSE(values_feasible(md, {bval, xval, wrong}));
    }
}

TEST_CASE("bool-times-bool lemma: all four corners force the product") {
    MilpModel md;
    int x = md.add_var("x", VarKind::Binary, 0.0, 1.0);
    int y = md.add_var("y", VarKind::Binary, 0.0, 1.0);
    md.linearize_bool_times_bool("C0", "z", x, y);
    CHECK(md.rows.size() == 3);
    for (double xv : {0.0, 1.0})
        for (double yv : {0.0, 1.0}) {
            CHECK(values_feasible(md, {xv, yv, xv * yv}));
            CHECK_FALSE(values_feasible(md, {xv, yv, 1.0 - xv * yv}));
        }
}

TEST_CASE("variable families match the closed-form counts") {
    PowerModel pw = paper_platform();
    auto g = make({2000000, 1500000}, {{1, 2}});
    MilpModel md = build_isct_model(g, pw, 2);
    const int n = 2, m = 5, K = 2;
    CHECK(md.count_vars_with_prefix("start_") == n);
    CHECK(md.count_vars_with_prefix("n_") == n * m);
    CHECK(md.count_vars_with_prefix("p_") == n * K);
    CHECK(md.count_vars_with_prefix("o_") == (n + 1) * (n + 1) * K - n * K);  // 14
    CHECK(md.count_vars_with_prefix("o_") == 14);
    CHECK(md.count_vars_with_prefix("i_") == n);
    CHECK(md.count_vars_with_prefix("ip_") == K);
    CHECK(md.count_vars_with_prefix("sw_") == n);
    CHECK(md.count_vars_with_prefix("swp_") == K);
    CHECK(md.count_vars_with_prefix("used_") == K);
}

TEST_CASE("constraint families match the closed-form counts") {
    PowerModel pw = paper_platform();
    for (int n : {1, 2, 4}) {
        for (int K : {1, 2, 3}) {
            std::vector<std::int64_t> w(n, 1000000);
            std::vector<std::pair<int, int>> edges;
            for (int i = 1; i < n; ++i) edges.push_back({i, i + 1});
            MilpModel md = build_isct_model(make(w, edges), pw, K);
            CHECK(md.count_rows_in_family("C1") == n);
            CHECK(md.count_rows_in_family("C2") == n);
            CHECK(md.count_rows_in_family("C3") == n);
            CHECK(md.count_rows_in_family("C4") == n - 1);
            CHECK(md.count_rows_in_family("C5") == n);
            CHECK(md.count_rows_in_family("C6") == 2 * K * (n + 1));
            CHECK(md.count_rows_in_family("C7") == n * (n - 1) * K);
            CHECK(md.count_rows_in_family("C10") == 2 * n + 3 * K);
        }
    }
}

TEST_CASE("n=1 K=1: assignment and ordering are structurally forced") {
    PowerModel pw = paper_platform();
    MilpModel md = build_isct_model(make({2000000}, {}), pw, 1);

    // C5 row: p_1_1 = 1 on its own
    bool found_c5 = false, found_next0 = false, found_prev2 = false;
    for (const ModelRow& r : md.rows) {
        if (r.name == "c5_asg_1") {
            found_c5 = true;
            CHECK(r.expr.terms.size() == 1);
            CHECK(r.rhs == 1.0);
            CHECK(r.rel == Rel::EQ);
        }
        if (r.name == "c6_next_1_0") {
            found_next0 = true;  // o_1_0_1 + o_1_0_2 = 1
            CHECK(r.expr.terms.size() == 2);
            CHECK(r.rhs == 1.0);
        }
        if (r.name == "c6_prev_1_2") {
            found_prev2 = true;  // o_1_0_2 + o_1_1_2 = 1
            CHECK(r.expr.terms.size() == 2);
            CHECK(r.rhs == 1.0);
        }
    }
    CHECK(found_c5);
    CHECK(found_next0);
    CHECK(found_prev2);

    // and the only consistent integral choice is o_1_0_1 = o_1_1_2 = 1
    Schedule s = simple_schedule(make({2000000}, {}), pw, 1);
    Solution sol = embed_schedule(md, make({2000000}, {}), pw, s);
    CHECK(sol.at("p_1_1") == 1.0);
    CHECK(sol.at("o_1_0_1") == 1.0);
    CHECK(sol.at("o_1_1_2") == 1.0);
    CHECK(sol.at("o_1_0_2") == 0.0);
    CHECK(check_solution(md, solution_values(md, sol)).empty());
}

TEST_CASE("baseline model: execution-only objective, no idle machinery") {
    PowerModel pw = paper_platform();
    auto g = make({2000000, 1000000}, {{1, 2}});
    MilpModel md = build_isc_t_model(g, pw, 2);
    for (auto [ix, coef] : md.objective.terms) {
        CHECK(md.vars[ix].name.rfind("n_", 0) == 0);
        CHECK(coef > 0.0);
    }
    CHECK(md.count_vars_with_prefix("i_") == 0);
    CHECK(md.count_vars_with_prefix("sw_") == 0);
    CHECK(md.count_vars_with_prefix("used_") == 0);
    CHECK(md.count_vars_with_prefix("aux_") == 0);
    for (const VarRef& v : md.vars)
        if (v.kind == VarKind::Binary)
            CHECK((v.name.rfind("p_", 0) == 0 || v.name.rfind("o_", 0) == 0));
}

TEST_CASE("baseline model LP relaxation solves the single-task case exactly") {
    PowerModel pw = paper_platform();
    auto g = make({2000000}, {});
    MilpModel md = build_isc_t_model(g, pw, 1);

    LinearProgram lp;
    for (const VarRef& v : md.vars) lp.add_var(v.lo, v.hi, 0.0);
    for (auto [ix, coef] : md.objective.terms) lp.objective[ix] += coef;
    for (const ModelRow& r : md.rows) {
        std::vector<double> coeffs(md.vars.size(), 0.0);
        for (auto [ix, coef] : r.expr.terms) coeffs[ix] += coef;
        lp.add_row(std::move(coeffs), r.rel, r.rhs - r.expr.constant);
    }
    LpOutcome out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.objective == doctest::Approx(1.28980e-3).epsilon(1e-5));
    // forced binaries in this degenerate relaxation
    CHECK(out.values[md.var_index("p_1_1")] == doctest::Approx(1.0));
    CHECK(out.values[md.var_index("o_1_0_1")] == doctest::Approx(1.0));
    CHECK(out.values[md.var_index("o_1_1_2")] == doctest::Approx(1.0));
}

TEST_CASE("empty model exports the canonical LP text") {
    MilpModel md;
    CHECK(export_lp(md) == "Minimize\n obj: 0\nSubject To\nEnd\n");
}

TEST_CASE("LP export is deterministic") {
    PowerModel pw = paper_platform();
    auto g = make({2000000, 1500000, 900000}, {{1, 2}, {1, 3}});
    CHECK(export_lp(build_isct_model(g, pw, 2)) == export_lp(build_isct_model(g, pw, 2)));
}

TEST_CASE("LP export matches the golden n=1 and n=2 files") {
    PowerModel pw = paper_platform();
    for (std::string name : {"n1_isct", "n2_isct"}) {
        TaskGraph g = name == "n1_isct" ? make({2000000}, {})
                                        : make({2000000, 1500000}, {{1, 2}});
        int K = name == "n1_isct" ? 1 : 2;
        std::ifstream in(std::string(FIXTURES_DIR) + "/golden/" + name + ".lp",
                         std::ios::binary);
        REQUIRE_MESSAGE(in.good(), ("missing golden file for " + name));
        std::ostringstream ss;
        ss << in.rdbuf();
        CHECK(export_lp(build_isct_model(g, pw, K)) == ss.str());
    }
}

TEST_CASE("solution text parsing") {
    PowerModel pw = paper_platform();
    MilpModel md = build_isc_t_model(make({1000}, {}), pw, 1);

    // well-formed: every variable listed, comments allowed
    std::string text = "# solution\n";
    for (const VarRef& v : md.vars) text += v.name + " 0\n";
    Solution sol = parse_solution(text, md);
    CHECK(sol.size() == md.vars.size());

    CHECK_THROWS_AS(parse_solution("bogus_var 1\n" + text, md), ParseError);
    CHECK_THROWS_AS(parse_solution("start_1 one\n", md), ParseError);
    CHECK_THROWS_AS(parse_solution("start_1 0.5\n", md), ParseError);  // missing the rest

    // binaries round when within 1e-6
    std::string rounded = text;
    rounded.replace(rounded.find("p_1_1 0"), 7, "p_1_1 0.9999995");
    CHECK(parse_solution(rounded, md).at("p_1_1") == 1.0);
}

TEST_CASE("verify_solution accepts a consistent solution and reports both energies") {
    PowerModel pw = paper_platform();
    auto g = make({2000000}, {});
    MilpModel md = build_isct_model(g, pw, 1);
    Schedule s = simple_schedule(g, pw, 1);
    Solution sol = embed_schedule(md, g, pw, s);

    VerifyResult res = verify_solution(md, g, pw, sol);
    CHECK(res.violations.empty());
    CHECK(res.model_objective == doctest::Approx(1.67480e-3).epsilon(1e-5));
    CHECK(std::fabs(res.model_objective - res.eval_energy) <=
          1e-6 * std::fabs(res.eval_energy));
}

TEST_CASE("verify_solution flags an overlap") {
    PowerModel pw = paper_platform();
    auto g = make({2000000, 2000000}, {});
    MilpModel md = build_isct_model(g, pw, 1);
    Schedule s;
    s.period = g.period;
    s.processors = 1;
    double w = 2000000.0;
    s.tasks.push_back({1, 1, 0.0, {{3, w}}});
    s.tasks.push_back({2, 1, 0.5e-3, {{3, w}}});  // starts inside task 1
    s.switches.assign(1, {});
    for (const IdleInterval& iv : idle_intervals(pw, s))
        s.switches[iv.processor - 1].push_back(iv.length >= break_even(pw));
    Solution sol = embed_schedule(md, g, pw, s);
    VerifyResult res = verify_solution(md, g, pw, sol);
    bool overlap = false;
    for (const Violation& v : res.violations) overlap |= v.rule == "overlap";
    CHECK(overlap);
}

TEST_CASE("verify_solution flags a workload shortfall") {
    PowerModel pw = paper_platform();
    auto g = make({2000000}, {});
    MilpModel md = build_isct_model(g, pw, 1);
    Schedule s = simple_schedule(g, pw, 1);
    Solution sol = embed_schedule(md, g, pw, s);
    sol["n_1_3"] = sol.at("n_1_3") - 1000.0;  // lose cycles
    VerifyResult res = verify_solution(md, g, pw, sol);
    bool split = false, row = false;
    for (const Violation& v : res.violations) {
        split |= v.rule == "split";
        row |= v.rule == "row";
    }
    CHECK(split);
    CHECK(row);  // the workload row itself is also violated
}

TEST_CASE("anti-drift: embedded schedules satisfy every row and match eval energy") {
    PowerModel pw = paper_platform();
    for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull}) {
        GenParams p;
        p.task_count = 5;
        p.seed = seed;
        TaskGraph g = random_taskgraph(p);
        // generous period so the cheapest-frequency round-robin placement fits
        g.period = 4.0 * static_cast<double>(g.total_workload()) / 1.53e9;

        for (int K : {1, 2}) {
            Schedule s = simple_schedule(g, pw, K);
            MilpModel md = build_isct_model(g, pw, K);
            Solution sol = embed_schedule(md, g, pw, s);
            auto values = solution_values(md, sol);
            auto bad = check_solution(md, values);
            if (!bad.empty()) {
                CAPTURE(bad.front().rule);
                CAPTURE(bad.front().message);
            }
            CHECK(bad.empty());
            double obj = md.objective_value(values);
            double ev = schedule_energy(g, pw, s, SwitchPolicy::AsFlagged).total_energy;
            CHECK(std::fabs(obj - ev) <= 1e-6 * std::max(1e-12, std::fabs(ev)));

            // the baseline model sees the same schedule's execution energy
            MilpModel base = build_isc_t_model(g, pw, K);
            Solution bsol = embed_schedule(base, g, pw, s);
            auto bvalues = solution_values(base, bsol);
            CHECK(check_solution(base, bvalues).empty());
            double bobj = base.objective_value(bvalues);
            double bev = schedule_energy(g, pw, s, SwitchPolicy::AsFlagged).exec_energy;
            CHECK(std::fabs(bobj - bev) <= 1e-6 * std::max(1e-12, std::fabs(bev)));
        }
    }
}
