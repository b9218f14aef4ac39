#include <set>

#include "doctest.h"
#include "esched/taskgraph.hpp"

using namespace esched;

namespace {

TaskGraph make(std::vector<std::int64_t> workloads, std::vector<std::pair<int, int>> edges,
               double period = 8e-3) {
    TaskGraph g;
    for (size_t i = 0; i < workloads.size(); ++i)
        g.tasks.push_back({static_cast<int>(i) + 1, workloads[i]});
    g.edges = std::move(edges);
    g.period = period;
    return g;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
    for (const Violation& x : v)
        if (x.rule == rule) return true;
    return false;
}

}  // namespace

TEST_CASE("validate accepts the smallest DAG") {
    CHECK(validate(make({1000, 1000}, {{1, 2}})).empty());
}

TEST_CASE("validate flags a 2-cycle") {
    auto v = validate(make({1000, 1000}, {{1, 2}, {2, 1}}));
    CHECK(has_rule(v, "cycle"));
}

TEST_CASE("validate flags nonpositive workload and period") {
    auto v = validate(make({0}, {}));
    CHECK(has_rule(v, "workload"));
    auto g = make({5}, {});
    g.period = 0.0;
    CHECK(has_rule(validate(g), "period"));
}

TEST_CASE("validate flags dangling and duplicate edges, deterministic order") {
    auto v = validate(make({10, 10}, {{1, 7}, {1, 2}, {1, 2}}));
    CHECK(has_rule(v, "dangling-edge"));
    CHECK(has_rule(v, "duplicate-edge"));
    for (size_t i = 1; i < v.size(); ++i) CHECK(v[i - 1].rule <= v[i].rule);
}

TEST_CASE("topological order of a chain") {
    CHECK(topological_order(make({1, 1, 1}, {{1, 2}, {2, 3}})) == std::vector<int>{1, 2, 3});
}

TEST_CASE("topological order breaks ties by id (diamond)") {
    CHECK(topological_order(make({1, 1, 1, 1}, {{1, 2}, {1, 3}, {2, 4}, {3, 4}})) ==
          std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("topological order of a single task") {
    CHECK(topological_order(make({1}, {})) == std::vector<int>{1});
}

TEST_CASE("topological order names a cycle member") {
    CHECK_THROWS_WITH_AS(topological_order(make({1, 1}, {{1, 2}, {2, 1}})),
                         doctest::Contains("cycle"), InfeasibleError);
}

TEST_CASE("upward ranks on a chain") {
    auto g = make({2000000, 2000000}, {{1, 2}});
    auto r = upward_ranks(g, 2.1e9);
    CHECK(r.at(2) == doctest::Approx(2e6 / 2.1e9).epsilon(1e-12));   // 0.9524 ms
    CHECK(r.at(1) == doctest::Approx(2 * 2e6 / 2.1e9).epsilon(1e-12));  // 1.9048 ms
}

TEST_CASE("upward rank of a single task is its f_max duration") {
    auto g = make({2100000}, {});
    CHECK(upward_ranks(g, 2.1e9).at(1) == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("upward rank of a diamond source is three hops") {
    const std::int64_t w = 1500000;
    auto g = make({w, w, w, w}, {{1, 2}, {1, 3}, {2, 4}, {3, 4}});
    auto r = upward_ranks(g, 2.1e9);
    CHECK(r.at(1) == doctest::Approx(3.0 * static_cast<double>(w) / 2.1e9).epsilon(1e-12));
}

TEST_CASE("random_taskgraph with one task is a single isolated node") {
    GenParams p;
    p.task_count = 1;
    p.seed = 42;
    p.period = 8e-3;
    TaskGraph g = random_taskgraph(p);
    CHECK(g.task_count() == 1);
    CHECK(g.edges.empty());
    CHECK(validate(g).empty());
}

TEST_CASE("random_taskgraph honors the degree caps") {
    GenParams p;
    p.task_count = 15;
    p.mean_workload = 2000000;
    p.workload_spread = 0.5;
    p.max_in_degree = 2;
    p.max_out_degree = 3;
    p.period = 8e-3;
    p.seed = 7;
    TaskGraph g = random_taskgraph(p);
    REQUIRE(validate(g).empty());
    std::vector<int> indeg(16, 0), outdeg(16, 0);
    for (auto [u, v] : g.edges) {
        outdeg[u]++;
        indeg[v]++;
    }
    for (int i = 1; i <= 15; ++i) {
        CHECK(indeg[i] <= 2);
        CHECK(outdeg[i] <= 3);
    }
    for (const Task& t : g.tasks) {
        CHECK(t.workload >= 1000000);
        CHECK(t.workload <= 3000000);
    }
}

TEST_CASE("different seeds give different edge sets") {
    GenParams p;
    p.task_count = 15;
    p.period = 8e-3;
    p.seed = 7;
    TaskGraph a = random_taskgraph(p);
    p.seed = 8;
    TaskGraph b = random_taskgraph(p);
    CHECK(a.edges != b.edges);
}

TEST_CASE("generation is a pure function of the parameters") {
    GenParams p;
    p.task_count = 12;
    p.period = 10e-3;
    p.seed = 31337;
    CHECK(save_graph(random_taskgraph(p)) == save_graph(random_taskgraph(p)));
}

TEST_CASE("save then load is the identity on the canonical form") {
    auto g = make({1500000, 2000000, 2500000, 1000000}, {{1, 2}, {1, 3}, {2, 4}, {3, 4}});
    TaskGraph r = load_graph(save_graph(g));
    CHECK(save_graph(r) == save_graph(g));
    CHECK(r.period == g.period);
    CHECK(r.edges == g.edges);
}

TEST_CASE("malformed task line reports its line number") {
    try {
        load_graph("taskgraph v1\nperiod 8 ms\ntask x\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("period units convert on load") {
    TaskGraph g = load_graph("taskgraph v1\nperiod 8 ms\ntask 1 10\ntask 2 10\ntask 3 10\n"
                             "task 4 10\ntask 5 10\ntask 6 10\ntask 7 10\n");
    CHECK(g.period == doctest::Approx(0.008).epsilon(1e-15));
    CHECK(g.task_count() == 7);
}

TEST_CASE("dot export mentions every task and edge") {
    auto g = make({10, 20}, {{1, 2}});
    std::string dot = save_dot(g);
    CHECK(dot.find("t1 -> t2") != std::string::npos);
    CHECK(dot.find("digraph") != std::string::npos);
}

TEST_CASE("properties: topological order, rank monotonicity, rank sort") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull, 99ull}) {
        GenParams p;
        p.task_count = 20;
        p.period = 12e-3;
        p.seed = seed;
        TaskGraph g = random_taskgraph(p);
        REQUIRE(validate(g).empty());

        auto order = topological_order(g);
        CHECK(order.size() == 20);
        CHECK(std::set<int>(order.begin(), order.end()).size() == 20);
        std::vector<int> pos(21, 0);
        for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
        for (auto [u, v] : g.edges) CHECK(pos[u] < pos[v]);

        auto ranks = upward_ranks(g, 2.1e9);
        for (auto [u, v] : g.edges) CHECK(ranks.at(u) > ranks.at(v));

        // decreasing-rank order is itself a topological order
        auto by_rank = rank_order(g, 2.1e9);
        for (size_t i = 0; i < by_rank.size(); ++i) pos[by_rank[i]] = static_cast<int>(i);
        for (auto [u, v] : g.edges) CHECK(pos[u] < pos[v]);

        // and so is the seeded-tie-break variant
        auto seeded = rank_order(g, 2.1e9, 123);
        for (size_t i = 0; i < seeded.size(); ++i) pos[seeded[i]] = static_cast<int>(i);
        for (auto [u, v] : g.edges) CHECK(pos[u] < pos[v]);
    }
}
