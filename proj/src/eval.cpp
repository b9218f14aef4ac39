#include "esched/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace esched {

namespace {
constexpr double kTimeTol = 1e-9;

std::vector<std::vector<const TaskPlacement*>> by_processor(const Schedule& s) {
    std::vector<std::vector<const TaskPlacement*>> per(s.processors);
    for (const TaskPlacement& p : s.tasks) {
        if (p.processor >= 1 && p.processor <= s.processors)
            per[p.processor - 1].push_back(&p);
    }
    for (auto& v : per)
        std::sort(v.begin(), v.end(), [](const TaskPlacement* a, const TaskPlacement* b) {
            if (a->start != b->start) return a->start < b->start;
            return a->task_id < b->task_id;
        });
    return per;
}

}  // namespace

double TaskPlacement::duration(const PowerModel& power) const {
    double d = 0.0;
    for (auto [ix, cycles] : split) d += cycles / power.freqs.at(ix - 1);
    return d;
}

const TaskPlacement& Schedule::placement(int task_id) const {
    for (const TaskPlacement& p : tasks)
        if (p.task_id == task_id) return p;
    throw std::out_of_range("no placement for task " + std::to_string(task_id));
}

bool Schedule::processor_used(int k) const {
    return std::any_of(tasks.begin(), tasks.end(),
                       [k](const TaskPlacement& p) { return p.processor == k; });
}

std::vector<Violation> validate_schedule(const TaskGraph& graph, const PowerModel& power,
                                         const Schedule& schedule) {
    std::vector<Violation> out;
    const double td = schedule.period;
    const double t_be = break_even(power);

    // assignment: every graph task placed exactly once
    std::map<int, int> seen;
    for (const TaskPlacement& p : schedule.tasks) seen[p.task_id]++;
    for (const Task& t : graph.tasks) {
        auto it = seen.find(t.id);
        if (it == seen.end())
            out.push_back({"assignment", "task " + std::to_string(t.id) + " is not placed"});
        else if (it->second > 1)
            out.push_back({"assignment", "task " + std::to_string(t.id) + " placed more than once"});
    }
    for (const TaskPlacement& p : schedule.tasks) {
        if (!graph.has_task(p.task_id))
            out.push_back({"assignment", "placement references unknown task " +
                                             std::to_string(p.task_id)});
        if (p.processor < 1 || p.processor > schedule.processors)
            out.push_back({"assignment", "task " + std::to_string(p.task_id) +
                                             " assigned to invalid processor " +
                                             std::to_string(p.processor)});
    }

    // deadline and split checks
    for (const TaskPlacement& p : schedule.tasks) {
        if (!graph.has_task(p.task_id)) continue;
        double cycles = 0.0;
        for (auto [ix, c] : p.split) {
            if (ix < 1 || ix > power.freq_count()) {
                out.push_back({"split", "task " + std::to_string(p.task_id) +
                                            " uses invalid frequency index " + std::to_string(ix)});
                continue;
            }
            if (c < -1e-6)
                out.push_back({"split", "task " + std::to_string(p.task_id) +
                                            " has negative cycle count"});
            cycles += c;
        }
        const double w = static_cast<double>(graph.task(p.task_id).workload);
        if (std::fabs(cycles - w) > std::max(1e-6, 1e-9 * w))
            out.push_back({"split", "task " + std::to_string(p.task_id) + " split sums to " +
                                        format_double(cycles) + ", workload is " +
                                        format_double(w)});
        if (p.start < -kTimeTol)
            out.push_back({"deadline", "task " + std::to_string(p.task_id) + " starts before 0"});
        if (p.start + p.duration(power) > td + kTimeTol)
            out.push_back({"deadline", "task " + std::to_string(p.task_id) +
                                           " finishes after the period"});
    }

    // non-overlap per processor
    auto per = by_processor(schedule);
    for (int k = 0; k < schedule.processors; ++k) {
        for (size_t i = 1; i < per[k].size(); ++i) {
            const TaskPlacement* a = per[k][i - 1];
            const TaskPlacement* b = per[k][i];
            if (a->start + a->duration(power) > b->start + kTimeTol)
                out.push_back({"overlap", "tasks " + std::to_string(a->task_id) + " and " +
                                              std::to_string(b->task_id) + " overlap on processor " +
                                              std::to_string(k + 1)});
        }
    }

    // precedence
    for (auto [u, v] : graph.edges) {
        const TaskPlacement* pu = nullptr;
        const TaskPlacement* pv = nullptr;
        for (const TaskPlacement& p : schedule.tasks) {
            if (p.task_id == u) pu = &p;
            if (p.task_id == v) pv = &p;
        }
        if (!pu || !pv) continue;
        if (pu->start + pu->duration(power) > pv->start + kTimeTol)
            out.push_back({"precedence", "edge (" + std::to_string(u) + "," + std::to_string(v) +
                                             ") violated"});
    }

    // switch flags require break-even length
    auto intervals = idle_intervals(power, schedule);
    for (const IdleInterval& iv : intervals) {
        if (iv.switched && iv.kind != IdleKind::WholePeriod && iv.length < t_be - kTimeTol)
            out.push_back({"switch", "interval on processor " + std::to_string(iv.processor) +
                                         " switched but shorter than break-even"});
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const Violation& a, const Violation& b) { return a.rule < b.rule; });
    return out;
}

std::vector<IdleInterval> idle_intervals(const PowerModel& power, const Schedule& schedule) {
    std::vector<IdleInterval> out;
    auto per = by_processor(schedule);
    const double td = schedule.period;

    for (int k = 0; k < schedule.processors; ++k) {
        const auto& tasks = per[k];
        std::vector<IdleInterval> mine;
        if (tasks.empty()) {
            mine.push_back({k + 1, 0.0, td, IdleKind::WholePeriod, false, 0});
        } else {
            for (size_t i = 1; i < tasks.size(); ++i) {
                double prev_end = tasks[i - 1]->start + tasks[i - 1]->duration(power);
                double gap = tasks[i]->start - prev_end;
                if (gap >= kTimeTol)
                    mine.push_back({k + 1, prev_end, gap, IdleKind::BetweenTasks, false,
                                    tasks[i]->task_id});
            }
            double tail_begin = tasks.back()->start + tasks.back()->duration(power);
            double wrap = (td - tail_begin) + tasks.front()->start;
            if (wrap >= kTimeTol)
                mine.push_back({k + 1, tail_begin, wrap, IdleKind::WrapAround, false, 0});
        }
        if (k < static_cast<int>(schedule.switches.size()) &&
            schedule.switches[k].size() == mine.size()) {
            for (size_t i = 0; i < mine.size(); ++i) mine[i].switched = schedule.switches[k][i];
        }
        for (auto& iv : mine) out.push_back(iv);
    }
    return out;
}

EvalReport schedule_energy(const TaskGraph& graph, const PowerModel& power,
                           const Schedule& schedule, SwitchPolicy policy) {
    auto violations = validate_schedule(graph, power, schedule);
    if (!violations.empty())
        throw InfeasibleError("invalid schedule: " + violations.front().rule + ": " +
                              violations.front().message);

    EvalReport rep;
    rep.per_processor.resize(schedule.processors);
    for (int k = 0; k < schedule.processors; ++k) rep.per_processor[k].processor = k + 1;

    for (const TaskPlacement& p : schedule.tasks) {
        double e = 0.0;
        for (auto [ix, cycles] : p.split) e += cycles * energy_per_cycle_index(power, ix - 1);
        rep.exec_energy += e;
        auto& pb = rep.per_processor[p.processor - 1];
        pb.exec_energy += e;
        pb.busy += p.duration(power);
    }

    const double t_be = break_even(power);
    for (const IdleInterval& iv : idle_intervals(power, schedule)) {
        if (iv.kind == IdleKind::WholePeriod) continue;  // unused processor
        bool sw = false;
        switch (policy) {
            case SwitchPolicy::Optimal: sw = iv.length + kTimeTol >= t_be; break;
            case SwitchPolicy::AsFlagged: sw = iv.switched; break;
            case SwitchPolicy::Never: sw = false; break;
        }
        double e = sw ? power.e_sw : power.c * iv.length;
        rep.idle_energy += e;
        rep.idle_interval_count++;
        rep.total_idle_time += iv.length;
        auto& pb = rep.per_processor[iv.processor - 1];
        pb.idle_energy += e;
        pb.idle += iv.length;
        pb.idle_intervals++;
    }

    for (int k = 1; k <= schedule.processors; ++k)
        if (schedule.processor_used(k)) rep.used_processors++;

    rep.total_energy = rep.exec_energy + rep.idle_energy;
    return rep;
}

Schedule apply_dpm_post(const PowerModel& power, const Schedule& schedule) {
    Schedule out = schedule;
    out.switches.assign(out.processors, {});
    const double t_be = break_even(power);
    Schedule bare = schedule;
    bare.switches.clear();
    for (const IdleInterval& iv : idle_intervals(power, bare)) {
        if (iv.kind == IdleKind::WholePeriod) continue;  // unused processor
        out.switches[iv.processor - 1].push_back(iv.length + kTimeTol >= t_be);
    }
    return out;
}

CompareRow compare_schedules(const std::string& name, const TaskGraph& graph,
                             const PowerModel& power, const Schedule& isct, double isct_energy,
                             const Schedule& baseline) {
    CompareRow row;
    row.name = name;
    row.tasks = graph.task_count();
    row.total_workload = graph.total_workload();
    row.period = graph.period;

    EvalReport base = schedule_energy(graph, power, baseline, SwitchPolicy::AsFlagged);
    EvalReport mine = schedule_energy(graph, power, isct, SwitchPolicy::AsFlagged);

    row.baseline_energy = base.total_energy;
    row.isct_energy = isct_energy;
    row.saving_percent = base.total_energy > 0.0
                             ? (base.total_energy - isct_energy) / base.total_energy * 100.0
                             : 0.0;
    row.baseline_idle_count = base.idle_interval_count;
    row.isct_idle_count = mine.idle_interval_count;
    row.baseline_idle_time = base.total_idle_time;
    row.isct_idle_time = mine.total_idle_time;
    row.baseline_used = base.used_processors;
    row.isct_used = mine.used_processors;
    return row;
}

namespace {

std::string pad(const std::string& s, size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string format_compare_table(const std::vector<CompareRow>& rows) {
    static const char* headers[] = {"instance", "tasks", "workload(Mcy)", "Td(ms)",
                                    "E_base(mJ)", "E_isct(mJ)", "saving(%)",
                                    "idle#_base", "idle#_isct", "idleT_base(ms)",
                                    "idleT_isct(ms)", "procs_base", "procs_isct"};
    std::vector<std::vector<std::string>> cells;
    double sum_base = 0, sum_isct = 0, sum_saving = 0, sum_it_base = 0, sum_it_isct = 0;
    long sum_ic_base = 0, sum_ic_isct = 0;
    for (const CompareRow& r : rows) {
        cells.push_back({r.name, std::to_string(r.tasks),
                         format_fixed(static_cast<double>(r.total_workload) * 1e-6, 2),
                         format_fixed(r.period * 1e3, 2), format_fixed(r.baseline_energy * 1e3, 5),
                         format_fixed(r.isct_energy * 1e3, 5), format_fixed(r.saving_percent, 2),
                         std::to_string(r.baseline_idle_count), std::to_string(r.isct_idle_count),
                         format_fixed(r.baseline_idle_time * 1e3, 2),
                         format_fixed(r.isct_idle_time * 1e3, 2), std::to_string(r.baseline_used),
                         std::to_string(r.isct_used)});
        sum_base += r.baseline_energy;
        sum_isct += r.isct_energy;
        sum_saving += r.saving_percent;
        sum_ic_base += r.baseline_idle_count;
        sum_ic_isct += r.isct_idle_count;
        sum_it_base += r.baseline_idle_time;
        sum_it_isct += r.isct_idle_time;
    }
    if (!rows.empty()) {
        double n = static_cast<double>(rows.size());
        cells.push_back({"average", "", "", "", format_fixed(sum_base / n * 1e3, 5),
                         format_fixed(sum_isct / n * 1e3, 5), format_fixed(sum_saving / n, 2),
                         format_fixed(static_cast<double>(sum_ic_base) / n, 2),
                         format_fixed(static_cast<double>(sum_ic_isct) / n, 2),
                         format_fixed(sum_it_base / n * 1e3, 2),
                         format_fixed(sum_it_isct / n * 1e3, 2), "", ""});
    }

    const size_t ncol = sizeof(headers) / sizeof(headers[0]);
    std::vector<size_t> width(ncol);
    for (size_t c = 0; c < ncol; ++c) width[c] = std::string(headers[c]).size();
    for (const auto& row : cells)
        for (size_t c = 0; c < ncol; ++c) width[c] = std::max(width[c], row[c].size());

    auto emit_line = [&](const std::vector<std::string>& row) {
        std::string line;
        for (size_t c = 0; c < ncol; ++c) line += pad(row[c], width[c] + 2);
        while (!line.empty() && line.back() == ' ') line.pop_back();
        return line + "\n";
    };
    std::string out;
    out += emit_line(std::vector<std::string>(headers, headers + ncol));
    for (const auto& row : cells) out += emit_line(row);
    return out;
}

std::string format_compare_records(const std::vector<CompareRow>& rows) {
    std::string out;
    for (const CompareRow& r : rows) {
        out += "instance=" + r.name + " tasks=" + std::to_string(r.tasks) +
               " workload_cycles=" + std::to_string(r.total_workload) +
               " period_s=" + format_double(r.period) +
               " baseline_energy_j=" + format_double(r.baseline_energy) +
               " isct_energy_j=" + format_double(r.isct_energy) +
               " saving_percent=" + format_double(r.saving_percent, 6) +
               " baseline_idle_count=" + std::to_string(r.baseline_idle_count) +
               " isct_idle_count=" + std::to_string(r.isct_idle_count) +
               " baseline_idle_time_s=" + format_double(r.baseline_idle_time) +
               " isct_idle_time_s=" + format_double(r.isct_idle_time) +
               " baseline_used=" + std::to_string(r.baseline_used) +
               " isct_used=" + std::to_string(r.isct_used) + "\n";
    }
    return out;
}

namespace {

const char* kFreqPalette[] = {"#9ecae1", "#6baed6", "#4292c6", "#2171b5", "#084594",
                              "#74c476", "#31a354", "#006d2c"};

std::string svg_rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& extra = "") {
    return "<rect x=\"" + format_fixed(x, 2) + "\" y=\"" + format_fixed(y, 2) + "\" width=\"" +
           format_fixed(w, 2) + "\" height=\"" + format_fixed(h, 2) + "\" fill=\"" + fill + "\"" +
           (extra.empty() ? "" : " " + extra) + "/>\n";
}

}  // namespace

std::string gantt_svg(const TaskGraph& graph, const PowerModel& power, const Schedule& schedule) {
    const double margin_left = 70.0, margin_top = 30.0, lane_h = 46.0, box_h = 32.0;
    const double plot_w = 820.0;
    const int lanes = schedule.processors;
    const double td = schedule.period;
    const double width = margin_left + plot_w + 20.0;
    const double height = margin_top + lanes * lane_h + 30.0;
    auto xpos = [&](double t) { return margin_left + (td > 0 ? t / td * plot_w : 0.0); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_fixed(width, 0) +
         "\" height=\"" + format_fixed(height, 0) + "\" font-family=\"monospace\" font-size=\"12\">\n";
    s += "<defs>\n<pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
         "patternTransform=\"rotate(45)\">\n";
    s += "<rect width=\"6\" height=\"6\" fill=\"#f4f4f4\"/>\n";
    s += "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#b0b0b0\" stroke-width=\"2\"/>\n";
    s += "</pattern>\n</defs>\n";
    s += "<text x=\"" + format_fixed(margin_left, 2) + "\" y=\"18\">period " +
         format_double(td * 1e3, 6) + " ms</text>\n";

    for (int k = 0; k < lanes; ++k) {
        double y = margin_top + k * lane_h;
        s += "<text x=\"8\" y=\"" + format_fixed(y + box_h * 0.7, 2) + "\">p" +
             std::to_string(k + 1) + "</text>\n";
        s += svg_rect(xpos(0.0), y, plot_w, box_h, "none", "stroke=\"#888888\"");
    }

    // idle intervals (drawn under the task boxes)
    for (const IdleInterval& iv : idle_intervals(power, schedule)) {
        double y = margin_top + (iv.processor - 1) * lane_h;
        std::string mark = iv.switched ? " stroke=\"#d62728\" stroke-width=\"1.5\"" : "";
        if (iv.kind == IdleKind::WrapAround) {
            double tail = td - iv.begin;
            if (tail > 0)
                s += svg_rect(xpos(iv.begin), y, plot_w - (xpos(iv.begin) - margin_left), box_h,
                              "url(#hatch)", "stroke=\"#cccccc\"" + mark);
            double head = iv.length - tail;
            if (head > 1e-12)
                s += svg_rect(xpos(0.0), y, head / td * plot_w, box_h, "url(#hatch)",
                              "stroke=\"#cccccc\"" + mark);
        } else {
            s += svg_rect(xpos(iv.begin), y, iv.length / td * plot_w, box_h, "url(#hatch)",
                          "stroke=\"#cccccc\"" + mark);
        }
        if (iv.switched) {
            double labelx = iv.kind == IdleKind::WrapAround ? xpos(iv.begin) + 4 : xpos(iv.begin) + 2;
            s += "<text x=\"" + format_fixed(labelx, 2) + "\" y=\"" +
                 format_fixed(y + box_h + 12, 2) + "\" fill=\"#d62728\">sleep</text>\n";
        }
    }

    auto placements = schedule.tasks;
    std::sort(placements.begin(), placements.end(),
              [](const TaskPlacement& a, const TaskPlacement& b) { return a.task_id < b.task_id; });
    for (const TaskPlacement& p : placements) {
        double y = margin_top + (p.processor - 1) * lane_h;
        double x = xpos(p.start);
        for (auto [ix, cycles] : p.split) {
            double seg = cycles / power.freqs.at(ix - 1);
            if (seg <= 0) continue;
            double w = seg / td * plot_w;
            s += svg_rect(x, y, w, box_h, kFreqPalette[(ix - 1) % 8], "stroke=\"#333333\"");
            x += w;
        }
        double mid = xpos(p.start + p.duration(power) / 2.0);
        s += "<text x=\"" + format_fixed(mid - 4, 2) + "\" y=\"" +
             format_fixed(y + box_h * 0.7, 2) + "\">" + std::to_string(p.task_id) + "</text>\n";
    }

    s += "</svg>\n";
    return s;
}

std::string save_schedule(const Schedule& schedule) {
    std::string out = "schedule v1\n";
    auto tasks = schedule.tasks;
    std::sort(tasks.begin(), tasks.end(),
              [](const TaskPlacement& a, const TaskPlacement& b) { return a.task_id < b.task_id; });
    for (const TaskPlacement& p : tasks)
        out += "task " + std::to_string(p.task_id) + " proc " + std::to_string(p.processor) +
               " start " + format_double(p.start) + "\n";
    for (const TaskPlacement& p : tasks) {
        auto split = p.split;
        std::sort(split.begin(), split.end());
        for (auto [ix, cycles] : split) {
            if (cycles <= 0.0) continue;
            out += "split " + std::to_string(p.task_id) + " " + std::to_string(ix) + " " +
                   format_double(cycles) + "\n";
        }
    }
    for (size_t k = 0; k < schedule.switches.size(); ++k)
        for (size_t i = 0; i < schedule.switches[k].size(); ++i)
            out += "switch " + std::to_string(k + 1) + " " + std::to_string(i) + " " +
                   (schedule.switches[k][i] ? "1" : "0") + "\n";
    return out;
}

Schedule load_schedule(const std::string& text, const TaskGraph& graph, const PowerModel& power) {
    Schedule s;
    s.period = graph.period;
    s.processors = power.processors;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool saw_header = false;
    std::vector<std::tuple<int, int, bool>> switch_lines;

    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (!saw_header) {
            std::string ver;
            if (tok != "schedule" || !(ls >> ver) || ver != "v1")
                throw ParseError("expected 'schedule v1' header", lineno);
            saw_header = true;
            continue;
        }
        if (tok == "task") {
            int id, proc;
            double start;
            std::string kproc, kstart;
            if (!(ls >> id >> kproc >> proc >> kstart >> start) || kproc != "proc" ||
                kstart != "start")
                throw ParseError("malformed task line", lineno);
            if (!graph.has_task(id))
                throw ParseError("schedule references unknown task " + std::to_string(id), lineno);
            s.tasks.push_back({id, proc, start, {}});
        } else if (tok == "split") {
            int id, ix;
            double cycles;
            if (!(ls >> id >> ix >> cycles)) throw ParseError("malformed split line", lineno);
            bool found = false;
            for (TaskPlacement& p : s.tasks)
                if (p.task_id == id) {
                    p.split.emplace_back(ix, cycles);
                    found = true;
                }
            if (!found)
                throw ParseError("split before task line for task " + std::to_string(id), lineno);
        } else if (tok == "switch") {
            int proc, index, flag;
            if (!(ls >> proc >> index >> flag) || (flag != 0 && flag != 1))
                throw ParseError("malformed switch line", lineno);
            switch_lines.emplace_back(proc, index, flag == 1);
        } else {
            throw ParseError("unknown directive '" + tok + "'", lineno);
        }
    }
    if (!saw_header) throw ParseError("missing 'schedule v1' header", 1);

    std::sort(s.tasks.begin(), s.tasks.end(),
              [](const TaskPlacement& a, const TaskPlacement& b) { return a.task_id < b.task_id; });

    // Size the per-processor switch vectors from the derived idle intervals;
    // whole-period intervals of unused processors carry no flag.
    std::vector<int> counts(s.processors, 0);
    for (const IdleInterval& iv : idle_intervals(power, s))
        if (iv.kind != IdleKind::WholePeriod) counts[iv.processor - 1]++;
    s.switches.resize(s.processors);
    for (int k = 0; k < s.processors; ++k) s.switches[k].assign(counts[k], false);
    for (auto [proc, index, flag] : switch_lines) {
        if (proc < 1 || proc > s.processors || index < 0 || index >= counts[proc - 1])
            throw ParseError("switch line references unknown interval (proc " +
                             std::to_string(proc) + ", index " + std::to_string(index) + ")");
        s.switches[proc - 1][index] = flag;
    }
    return s;
}

}  // namespace esched
