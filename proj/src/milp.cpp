#include "esched/milp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace esched {

namespace {
constexpr double kBinaryTol = 1e-6;
constexpr double kTimeTol = 1e-9;
}  // namespace

int MilpModel::add_var(const std::string& name, VarKind kind, double lo, double hi) {
    VarRef v;
    v.name = name;
    v.kind = kind;
    v.lo = lo;
    v.hi = hi;
    vars.push_back(std::move(v));
    return static_cast<int>(vars.size()) - 1;
}

void MilpModel::add_row(const std::string& family, const std::string& name, LinExpr expr, Rel rel,
                        double rhs) {
    rows.push_back({name, family, std::move(expr), rel, rhs});
}

int MilpModel::linearize_bool_times_real(const std::string& family, const std::string& t_name,
                                         int b, const LinExpr& x, double s1, double s2) {
    if (!std::isfinite(s1) || !std::isfinite(s2))
        throw std::invalid_argument("linearize_bool_times_real: x must have finite bounds");
    int t = add_var(t_name, VarKind::Continuous, -s1, s2);
    vars[t].def = VarRef::Def::Product;
    vars[t].product_binary = b;
    vars[t].def_expr = x;

    // t <= s2*b
    add_row(family, t_name + "_r1", LinExpr::of(t).add(b, -s2), Rel::LE, 0.0);
    // -s1*b <= t
    add_row(family, t_name + "_r2", LinExpr::of(t, -1.0).add(b, -s1), Rel::LE, 0.0);
    // t + s1*b - x <= s1
    LinExpr r3 = LinExpr::of(t).add(b, s1);
    for (auto [ix, coef] : x.terms) r3.add(ix, -coef);
    add_row(family, t_name + "_r3", std::move(r3), Rel::LE, s1 + x.constant);
    // x - t + s2*b <= s2   (equivalently t - s2*b - x + s2 >= 0)
    LinExpr r4 = LinExpr::of(t, -1.0).add(b, s2);
    for (auto [ix, coef] : x.terms) r4.add(ix, coef);
    add_row(family, t_name + "_r4", std::move(r4), Rel::LE, s2 - x.constant);
    return t;
}

int MilpModel::linearize_bool_times_bool(const std::string& family, const std::string& z_name,
                                         int x, int y) {
    int z = add_var(z_name, VarKind::Binary, 0.0, 1.0);
    vars[z].def = VarRef::Def::Product;
    vars[z].product_binary = x;
    vars[z].def_expr = LinExpr::of(y);

    add_row(family, z_name + "_r1", LinExpr::of(z).add(x, -1.0), Rel::LE, 0.0);
    add_row(family, z_name + "_r2", LinExpr::of(z).add(y, -1.0), Rel::LE, 0.0);
    add_row(family, z_name + "_r3", LinExpr::of(x).add(y, 1.0).add(z, -1.0), Rel::LE, 1.0);
    return z;
}

int MilpModel::var_index(const std::string& name) const {
    for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == name) return static_cast<int>(i);
    return -1;
}

int MilpModel::count_vars_with_prefix(const std::string& prefix) const {
    int c = 0;
    for (const VarRef& v : vars)
        if (v.name.rfind(prefix, 0) == 0) ++c;
    return c;
}

int MilpModel::count_rows_in_family(const std::string& family) const {
    int c = 0;
    for (const ModelRow& r : rows)
        if (r.family == family) ++c;
    return c;
}

double MilpModel::eval(const LinExpr& expr, const std::vector<double>& values) const {
    double s = expr.constant;
    for (auto [ix, coef] : expr.terms) s += coef * values.at(ix);
    return s;
}

double MilpModel::objective_value(const std::vector<double>& values) const {
    return eval(objective, values);
}

namespace {

MilpModel build_model(const TaskGraph& g, const PowerModel& pw, int K, ModelKind kind) {
    auto viol = validate(g);
    if (!viol.empty())
        throw std::invalid_argument("cannot build model: " + viol.front().rule + ": " +
                                    viol.front().message);
    if (pw.freq_count() < 1) throw std::invalid_argument("cannot build model: empty frequency set");
    if (K < 1) throw std::invalid_argument("cannot build model: processor count must be >= 1");

    MilpModel md;
    md.kind = kind;
    md.n = g.task_count();
    md.m = pw.freq_count();
    md.K = K;
    md.period = g.period;
    md.t_be = break_even(pw);

    const int n = md.n;
    const int m = md.m;
    const double td = g.period;

    md.start_ix.assign(n + 1, -1);
    md.dur_ix.assign(n + 1, -1);
    md.i_ix.assign(n + 1, -1);
    md.sw_ix.assign(n + 1, -1);
    md.first_ix.assign(n + 1, -1);
    md.n_ix.assign(n + 1, {});
    md.p_ix.assign(K + 1, std::vector<int>(n + 1, -1));
    md.o_ix.assign(K + 1, std::vector<std::vector<int>>(n + 1, std::vector<int>(n + 2, -1)));
    md.ip_ix.assign(K + 1, -1);
    md.swp_ix.assign(K + 1, -1);
    md.used_ix.assign(K + 1, -1);

    // Core variables, declaration order fixed for the LP export.
    for (int u = 1; u <= n; ++u)
        md.start_ix[u] =
            md.add_var("start_" + std::to_string(u), VarKind::Continuous, 0.0, td);
    for (int u = 1; u <= n; ++u)
        md.dur_ix[u] = md.add_var("dur_" + std::to_string(u), VarKind::Continuous, 0.0, td);
    for (int u = 1; u <= n; ++u) {
        md.n_ix[u].resize(m);
        double w = static_cast<double>(g.task(u).workload);
        for (int i = 0; i < m; ++i)
            md.n_ix[u][i] = md.add_var(
                "n_" + std::to_string(u) + "_" + std::to_string(i + 1), VarKind::Continuous, 0.0, w);
    }
    for (int k = 1; k <= K; ++k)
        for (int u = 1; u <= n; ++u)
            md.p_ix[k][u] =
                md.add_var("p_" + std::to_string(k) + "_" + std::to_string(u), VarKind::Binary,
                           0.0, 1.0);
    for (int k = 1; k <= K; ++k)
        for (int u = 0; u <= n; ++u)
            for (int v = 1; v <= n + 1; ++v) {
                if (u == v) continue;
                md.o_ix[k][u][v] = md.add_var("o_" + std::to_string(k) + "_" + std::to_string(u) +
                                                  "_" + std::to_string(v),
                                              VarKind::Binary, 0.0, 1.0);
            }

    // C1: task duration from the cycle split.
    for (int u = 1; u <= n; ++u) {
        LinExpr def;
        for (int i = 0; i < m; ++i) def.add(md.n_ix[u][i], 1.0 / pw.freqs[i]);
        md.vars[md.dur_ix[u]].def = VarRef::Def::Defined;
        md.vars[md.dur_ix[u]].def_expr = def;
        LinExpr row = LinExpr::of(md.dur_ix[u]);
        for (auto [ix, coef] : def.terms) row.add(ix, -coef);
        md.add_row("C1", "c1_dur_" + std::to_string(u), std::move(row), Rel::EQ, 0.0);
    }
    // C2: the split covers the whole workload.
    for (int u = 1; u <= n; ++u) {
        LinExpr row;
        for (int i = 0; i < m; ++i) row.add(md.n_ix[u][i], 1.0);
        md.add_row("C2", "c2_wl_" + std::to_string(u), std::move(row), Rel::EQ,
                   static_cast<double>(g.task(u).workload));
    }
    // C3: finish before the period.
    for (int u = 1; u <= n; ++u)
        md.add_row("C3", "c3_dl_" + std::to_string(u),
                   LinExpr::of(md.start_ix[u]).add(md.dur_ix[u], 1.0), Rel::LE, td);
    // C4: precedence per edge.
    for (auto [u, v] : g.edges)
        md.add_row("C4", "c4_prec_" + std::to_string(u) + "_" + std::to_string(v),
                   LinExpr::of(md.start_ix[u]).add(md.dur_ix[u], 1.0).add(md.start_ix[v], -1.0),
                   Rel::LE, 0.0);
    // C5: unique processor assignment.
    for (int u = 1; u <= n; ++u) {
        LinExpr row;
        for (int k = 1; k <= K; ++k) row.add(md.p_ix[k][u], 1.0);
        md.add_row("C5", "c5_asg_" + std::to_string(u), std::move(row), Rel::EQ, 1.0);
    }
    // C6: successor/predecessor structure of the per-processor orders.
    // p_k_0 and p_k_{n+1} are the constant 1.
    for (int k = 1; k <= K; ++k) {
        for (int u = 0; u <= n; ++u) {
            LinExpr row;
            for (int v = 1; v <= n + 1; ++v)
                if (v != u) row.add(md.o_ix[k][u][v], 1.0);
            double rhs = 0.0;
            if (u == 0)
                rhs = 1.0;
            else
                row.add(md.p_ix[k][u], -1.0);
            md.add_row("C6", "c6_next_" + std::to_string(k) + "_" + std::to_string(u),
                       std::move(row), Rel::EQ, rhs);
        }
        for (int v = 1; v <= n + 1; ++v) {
            LinExpr row;
            for (int u = 0; u <= n; ++u)
                if (u != v) row.add(md.o_ix[k][u][v], 1.0);
            double rhs = 0.0;
            if (v == n + 1)
                rhs = 1.0;
            else
                row.add(md.p_ix[k][v], -1.0);
            md.add_row("C6", "c6_prev_" + std::to_string(k) + "_" + std::to_string(v),
                       std::move(row), Rel::EQ, rhs);
        }
    }
    // C7: non-overlap big-M rows with M = Td.
    for (int k = 1; k <= K; ++k)
        for (int u = 1; u <= n; ++u)
            for (int v = 1; v <= n; ++v) {
                if (u == v) continue;
                md.add_row("C7",
                           "c7_novl_" + std::to_string(k) + "_" + std::to_string(u) + "_" +
                               std::to_string(v),
                           LinExpr::of(md.start_ix[u])
                               .add(md.dur_ix[u], 1.0)
                               .add(md.start_ix[v], -1.0)
                               .add(md.o_ix[k][u][v], td),
                           Rel::LE, td);
            }

    if (kind == ModelKind::Isct) {
        // C8: idle time before each task that is not first on its processor.
        for (int v = 1; v <= n; ++v) {
            std::vector<int> inner;
            for (int k = 1; k <= K; ++k)
                for (int u = 1; u <= n; ++u) {
                    if (u == v) continue;
                    LinExpr x = LinExpr::of(md.start_ix[u]).add(md.dur_ix[u], 1.0);
                    inner.push_back(md.linearize_bool_times_real("C8", md.fresh_aux_name(),
                                                                 md.o_ix[k][u][v], x, 0.0, td));
                }
            int first = md.add_var(md.fresh_aux_name(), VarKind::Binary, 0.0, 1.0);
            md.first_ix[v] = first;
            LinExpr fdef;
            for (int k = 1; k <= K; ++k) fdef.add(md.o_ix[k][0][v], 1.0);
            md.vars[first].def = VarRef::Def::Defined;
            md.vars[first].def_expr = fdef;
            LinExpr frow = LinExpr::of(first);
            for (auto [ix, coef] : fdef.terms) frow.add(ix, -coef);
            md.add_row("C8", "c8_first_" + std::to_string(v), std::move(frow), Rel::EQ, 0.0);

            LinExpr xv = LinExpr::of(md.start_ix[v]);
            for (int t : inner) xv.add(t, -1.0);
            int tout = md.linearize_bool_times_real("C8", md.fresh_aux_name(), first, xv, td, td);

            int iv = md.add_var("i_" + std::to_string(v), VarKind::Continuous, 0.0, td);
            md.i_ix[v] = iv;
            LinExpr idef = xv;
            idef.add(tout, -1.0);
            md.vars[iv].def = VarRef::Def::Defined;
            md.vars[iv].def_expr = idef;
            LinExpr irow = LinExpr::of(iv);
            for (auto [ix, coef] : idef.terms) irow.add(ix, -coef);
            md.add_row("C8", "c8_idle_" + std::to_string(v), std::move(irow), Rel::EQ, 0.0);
        }
        // C9: idle before the first task of each processor, wrapping around
        // the period boundary.
        for (int k = 1; k <= K; ++k) {
            std::vector<int> tails, heads;
            for (int u = 1; u <= n; ++u) {
                LinExpr x = LinExpr::of(md.start_ix[u]).add(md.dur_ix[u], 1.0);
                tails.push_back(md.linearize_bool_times_real("C9", md.fresh_aux_name(),
                                                             md.o_ix[k][u][n + 1], x, 0.0, td));
            }
            for (int v = 1; v <= n; ++v)
                heads.push_back(md.linearize_bool_times_real("C9", md.fresh_aux_name(),
                                                             md.o_ix[k][0][v],
                                                             LinExpr::of(md.start_ix[v]), 0.0, td));
            int ipk = md.add_var("ip_" + std::to_string(k), VarKind::Continuous, 0.0, td);
            md.ip_ix[k] = ipk;
            LinExpr def;
            def.constant = td;
            for (int t : tails) def.add(t, -1.0);
            for (int h : heads) def.add(h, 1.0);
            md.vars[ipk].def = VarRef::Def::Defined;
            md.vars[ipk].def_expr = def;
            LinExpr row = LinExpr::of(ipk);
            for (int t : tails) row.add(t, 1.0);
            for (int h : heads) row.add(h, -1.0);
            md.add_row("C9", "c9_idle_" + std::to_string(k), std::move(row), Rel::EQ, td);
        }
        // C10: switch and usage indicators.
        for (int v = 1; v <= n; ++v) {
            md.sw_ix[v] = md.add_var("sw_" + std::to_string(v), VarKind::Binary, 0.0, 1.0);
            md.add_row("C10", "c10_swlo_" + std::to_string(v),
                       LinExpr::of(md.i_ix[v]).add(md.sw_ix[v], -td), Rel::LE, md.t_be);
            md.add_row("C10", "c10_swhi_" + std::to_string(v),
                       LinExpr::of(md.sw_ix[v], md.t_be).add(md.i_ix[v], -1.0), Rel::LE, 0.0);
        }
        for (int k = 1; k <= K; ++k) {
            md.swp_ix[k] = md.add_var("swp_" + std::to_string(k), VarKind::Binary, 0.0, 1.0);
            md.add_row("C10", "c10_swplo_" + std::to_string(k),
                       LinExpr::of(md.ip_ix[k]).add(md.swp_ix[k], -td), Rel::LE, md.t_be);
            md.add_row("C10", "c10_swphi_" + std::to_string(k),
                       LinExpr::of(md.swp_ix[k], md.t_be).add(md.ip_ix[k], -1.0), Rel::LE, 0.0);
        }
        for (int k = 1; k <= K; ++k) {
            md.used_ix[k] = md.add_var("used_" + std::to_string(k), VarKind::Binary, 0.0, 1.0);
            md.add_row("C10", "c10_used_" + std::to_string(k),
                       LinExpr::of(md.ip_ix[k]).add(md.used_ix[k], td), Rel::GE, td);
        }
    }

    // Objective: execution energy, plus the idle energy terms for the full
    // model. Products of decision variables are linearized on the fly (C11).
    LinExpr obj;
    for (int u = 1; u <= n; ++u)
        for (int i = 0; i < m; ++i) obj.add(md.n_ix[u][i], energy_per_cycle_index(pw, i));

    if (kind == ModelKind::Isct) {
        for (int v = 1; v <= n; ++v) {
            int y = md.linearize_bool_times_real("C11", md.fresh_aux_name(), md.sw_ix[v],
                                                 LinExpr::of(md.i_ix[v]), 0.0, td);
            obj.add(md.sw_ix[v], pw.e_sw);
            obj.add(md.i_ix[v], pw.c);
            obj.add(y, -pw.c);
        }
        for (int k = 1; k <= K; ++k) {
            int w = md.linearize_bool_times_real("C11", md.fresh_aux_name(), md.used_ix[k],
                                                 LinExpr::of(md.ip_ix[k]), 0.0, td);
            int z = md.linearize_bool_times_bool("C11", md.fresh_aux_name(), md.used_ix[k],
                                                 md.swp_ix[k]);
            int v2 = md.linearize_bool_times_real("C11", md.fresh_aux_name(), md.swp_ix[k],
                                                  LinExpr::of(w), 0.0, td);
            obj.add(z, pw.e_sw);
            obj.add(w, pw.c);
            obj.add(v2, -pw.c);
        }
    }
    md.objective = std::move(obj);
    return md;
}

}  // namespace

MilpModel build_isct_model(const TaskGraph& graph, const PowerModel& power, int K) {
    return build_model(graph, power, K, ModelKind::Isct);
}

MilpModel build_isc_t_model(const TaskGraph& graph, const PowerModel& power, int K) {
    return build_model(graph, power, K, ModelKind::IscPlusT);
}

namespace {

// Appends "<sign> <coef> <name>" chunks with deterministic line wrapping.
void append_terms(std::string& out, const LinExpr& expr, const std::vector<VarRef>& vars) {
    if (expr.terms.empty()) {
        out += "0";
        return;
    }
    size_t line_len = out.size() - (out.rfind('\n') == std::string::npos
                                        ? 0
                                        : out.rfind('\n') + 1);
    bool first = true;
    for (auto [ix, coef] : expr.terms) {
        if (coef == 0.0) continue;
        std::string chunk;
        if (first) {
            chunk = (coef < 0 ? "- " : "") + format_double(std::fabs(coef), 12) + " " +
                    vars[ix].name;
            first = false;
        } else {
            chunk = (coef < 0 ? " - " : " + ") + format_double(std::fabs(coef), 12) + " " +
                    vars[ix].name;
        }
        if (line_len + chunk.size() > 76) {
            out += "\n  ";
            line_len = 2;
            if (chunk[0] == ' ') chunk.erase(0, 1);
        }
        out += chunk;
        line_len += chunk.size();
    }
    if (first) out += "0";
}

}  // namespace

std::string export_lp(const MilpModel& model) {
    std::string out = "Minimize\n obj: ";
    append_terms(out, model.objective, model.vars);
    out += "\nSubject To\n";
    for (const ModelRow& r : model.rows) {
        out += " " + r.name + ": ";
        append_terms(out, r.expr, model.vars);
        const char* rel = r.rel == Rel::LE ? " <= " : (r.rel == Rel::EQ ? " = " : " >= ");
        out += rel + format_double(r.rhs - r.expr.constant, 12) + "\n";
    }
    bool any_cont = false, any_bin = false;
    for (const VarRef& v : model.vars) {
        if (v.kind == VarKind::Binary)
            any_bin = true;
        else
            any_cont = true;
    }
    if (any_cont) {
        out += "Bounds\n";
        for (const VarRef& v : model.vars) {
            if (v.kind == VarKind::Binary) continue;
            if (std::isfinite(v.hi))
                out += " " + format_double(v.lo, 12) + " <= " + v.name + " <= " +
                       format_double(v.hi, 12) + "\n";
            else
                out += " " + v.name + " >= " + format_double(v.lo, 12) + "\n";
        }
    }
    if (any_bin) {
        out += "Binary\n";
        for (const VarRef& v : model.vars)
            if (v.kind == VarKind::Binary) out += " " + v.name + "\n";
    }
    out += "End\n";
    return out;
}

Solution parse_solution(const std::string& text, const MilpModel& model) {
    Solution sol;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name)) continue;
        std::string value_tok;
        if (!(ls >> value_tok)) throw ParseError("missing value for '" + name + "'", lineno);
        int ix = model.var_index(name);
        if (ix < 0) throw ParseError("unknown variable '" + name + "'", lineno);
        double value;
        try {
            size_t pos = 0;
            value = std::stod(value_tok, &pos);
            if (pos != value_tok.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ParseError("non-numeric value '" + value_tok + "' for '" + name + "'", lineno);
        }
        if (sol.count(name)) throw ParseError("duplicate entry for '" + name + "'", lineno);
        if (model.vars[ix].kind == VarKind::Binary && std::fabs(value - std::round(value)) <= kBinaryTol)
            value = std::round(value);
        sol[name] = value;
    }
    for (const VarRef& v : model.vars)
        if (!sol.count(v.name)) throw ParseError("solution is missing variable '" + v.name + "'");
    return sol;
}

std::vector<double> solution_values(const MilpModel& model, const Solution& solution) {
    std::vector<double> values(model.vars.size(), 0.0);
    for (size_t i = 0; i < model.vars.size(); ++i) {
        auto it = solution.find(model.vars[i].name);
        if (it == solution.end())
            throw std::invalid_argument("solution is missing variable '" + model.vars[i].name + "'");
        values[i] = it->second;
    }
    return values;
}

std::vector<Violation> check_solution(const MilpModel& model, const std::vector<double>& values) {
    std::vector<Violation> out;
    for (size_t i = 0; i < model.vars.size(); ++i) {
        const VarRef& v = model.vars[i];
        double x = values[i];
        double tol = 1e-6 * std::max(1.0, std::max(std::fabs(v.lo), std::fabs(v.hi)));
        if (x < v.lo - tol || (std::isfinite(v.hi) && x > v.hi + tol))
            out.push_back({"bounds", v.name + " = " + format_double(x) + " outside [" +
                                         format_double(v.lo) + ", " + format_double(v.hi) + "]"});
        if (v.kind == VarKind::Binary && std::fabs(x - std::round(x)) > kBinaryTol)
            out.push_back({"integrality", v.name + " = " + format_double(x) + " is not integral"});
    }
    for (const ModelRow& r : model.rows) {
        double lhs = model.eval(r.expr, values);
        double scale = std::max(1.0, std::fabs(r.rhs));
        for (auto [ix, coef] : r.expr.terms)
            scale = std::max(scale, std::fabs(coef * values[ix]));
        double tol = 1e-6 * scale;
        bool ok = true;
        switch (r.rel) {
            case Rel::LE: ok = lhs <= r.rhs + tol; break;
            case Rel::EQ: ok = std::fabs(lhs - r.rhs) <= tol; break;
            case Rel::GE: ok = lhs >= r.rhs - tol; break;
        }
        if (!ok)
            out.push_back({"row", r.name + ": lhs " + format_double(lhs) + " vs rhs " +
                                      format_double(r.rhs)});
    }
    return out;
}

Solution embed_schedule(const MilpModel& model, const TaskGraph& graph, const PowerModel& power,
                        const Schedule& schedule) {
    const int n = model.n;
    const int K = model.K;
    if (graph.task_count() != n || power.freq_count() != model.m)
        throw std::invalid_argument("embed_schedule: instance does not match the model");
    std::vector<double> values(model.vars.size(),
                               std::numeric_limits<double>::quiet_NaN());
    auto set = [&](int ix, double v) {
        if (ix >= 0) values[ix] = v;
    };

    // Base variables straight from the placements.
    std::vector<std::vector<const TaskPlacement*>> per(K);
    for (int u = 1; u <= n; ++u) {
        const TaskPlacement& p = schedule.placement(u);
        set(model.start_ix[u], p.start);
        for (int i = 0; i < model.m; ++i) set(model.n_ix[u][i], 0.0);
        for (auto [ix, cycles] : p.split) set(model.n_ix[u][ix - 1], cycles);
        for (int k = 1; k <= K; ++k) set(model.p_ix[k][u], p.processor == k ? 1.0 : 0.0);
        if (p.processor >= 1 && p.processor <= K) per[p.processor - 1].push_back(&p);
    }
    for (auto& v : per)
        std::sort(v.begin(), v.end(), [](const TaskPlacement* a, const TaskPlacement* b) {
            if (a->start != b->start) return a->start < b->start;
            return a->task_id < b->task_id;
        });
    for (int k = 1; k <= K; ++k)
        for (int u = 0; u <= n; ++u)
            for (int v = 1; v <= n + 1; ++v)
                if (model.o_ix[k][u][v] >= 0) values[model.o_ix[k][u][v]] = 0.0;
    for (int k = 1; k <= K; ++k) {
        const auto& seq = per[k - 1];
        if (seq.empty()) {
            values[model.o_ix[k][0][n + 1]] = 1.0;
            continue;
        }
        values[model.o_ix[k][0][seq.front()->task_id]] = 1.0;
        for (size_t i = 1; i < seq.size(); ++i)
            values[model.o_ix[k][seq[i - 1]->task_id][seq[i]->task_id]] = 1.0;
        values[model.o_ix[k][seq.back()->task_id][n + 1]] = 1.0;
    }

    // Remaining variables in declaration order: definitional and product
    // variables evaluate from earlier values; the free indicator binaries
    // follow their interval semantics.
    for (size_t ix = 0; ix < model.vars.size(); ++ix) {
        if (!std::isnan(values[ix])) continue;
        const VarRef& v = model.vars[ix];
        if (v.def == VarRef::Def::Defined) {
            values[ix] = model.eval(v.def_expr, values);
        } else if (v.def == VarRef::Def::Product) {
            double b = values.at(v.product_binary);
            values[ix] = b * model.eval(v.def_expr, values);
        } else {
            int id = static_cast<int>(ix);
            bool handled = false;
            for (int u = 1; u <= n && !handled; ++u)
                if (model.sw_ix[u] == id) {
                    values[ix] = (values[model.i_ix[u]] + kTimeTol >= model.t_be) ? 1.0 : 0.0;
                    handled = true;
                }
            for (int k = 1; k <= K && !handled; ++k) {
                if (model.swp_ix[k] == id) {
                    values[ix] = (values[model.ip_ix[k]] + kTimeTol >= model.t_be) ? 1.0 : 0.0;
                    handled = true;
                } else if (model.used_ix[k] == id) {
                    values[ix] = per[k - 1].empty() ? 0.0 : 1.0;
                    handled = true;
                }
            }
            if (!handled)
                throw std::logic_error("embed_schedule: unassigned variable " + v.name);
        }
    }

    Solution sol;
    for (size_t i = 0; i < model.vars.size(); ++i) sol[model.vars[i].name] = values[i];
    return sol;
}

VerifyResult verify_solution(const MilpModel& model, const TaskGraph& graph,
                             const PowerModel& power, const Solution& solution) {
    VerifyResult res;
    std::vector<double> values = solution_values(model, solution);

    res.violations = check_solution(model, values);
    res.model_objective = model.objective_value(values);

    // Rebuild the schedule from start / n / p values only.
    Schedule s;
    s.period = model.period;
    s.processors = model.K;
    for (int u = 1; u <= model.n; ++u) {
        TaskPlacement p;
        p.task_id = u;
        p.start = values[model.start_ix[u]];
        int best_k = 1;
        double best_v = -1.0;
        for (int k = 1; k <= model.K; ++k) {
            double pv = values[model.p_ix[k][u]];
            if (pv > best_v) {
                best_v = pv;
                best_k = k;
            }
        }
        p.processor = best_k;
        for (int i = 0; i < model.m; ++i) {
            double c = values[model.n_ix[u][i]];
            if (c > 1e-9) p.split.emplace_back(i + 1, c);
        }
        s.tasks.push_back(std::move(p));
    }

    // Switch flags from the model when it has them, optimal policy otherwise.
    const double t_be = break_even(power);
    s.switches.assign(s.processors, {});
    for (const IdleInterval& iv : idle_intervals(power, s)) {
        if (iv.kind == IdleKind::WholePeriod) continue;
        bool sw;
        if (model.kind == ModelKind::Isct) {
            if (iv.kind == IdleKind::BetweenTasks)
                sw = values[model.sw_ix[iv.before_task]] > 0.5;
            else
                sw = values[model.swp_ix[iv.processor]] > 0.5;
        } else {
            sw = iv.length + kTimeTol >= t_be;
        }
        s.switches[iv.processor - 1].push_back(sw);
    }

    auto sched_viol = validate_schedule(graph, power, s);
    for (auto& v : sched_viol) res.violations.push_back(v);

    if (sched_viol.empty()) {
        EvalReport rep = schedule_energy(graph, power, s, SwitchPolicy::AsFlagged);
        res.eval_energy = rep.total_energy;
    } else {
        res.eval_energy = std::numeric_limits<double>::quiet_NaN();
    }
    res.schedule = std::move(s);
    return res;
}

}  // namespace esched
