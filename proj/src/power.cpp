#include "esched/power.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace esched {

namespace {
constexpr double kTimeTol = 1e-9;  // absolute tolerance for time comparisons
}

int PowerModel::freq_index(double f) const {
    for (int i = 0; i < freq_count(); ++i)
        if (freqs[i] == f) return i;
    return -1;
}

std::vector<Violation> validate(const PowerModel& model) {
    std::vector<Violation> out;
    if (model.freqs.empty()) out.push_back({"freqs", "at least one frequency required"});
    for (size_t i = 0; i < model.freqs.size(); ++i) {
        if (model.freqs[i] <= 0.0)
            out.push_back({"freqs", "frequency " + format_double(model.freqs[i]) + " not positive"});
        if (i > 0 && model.freqs[i] <= model.freqs[i - 1])
            out.push_back({"freqs", "frequencies must be strictly ascending"});
    }
    if (model.p_dep.size() != model.freqs.size())
        out.push_back({"freqs", "one p_dep entry required per frequency"});
    if (model.c < 0.0) out.push_back({"params", "c must be >= 0"});
    if (model.e_sw < 0.0) out.push_back({"params", "esw must be >= 0"});
    if (model.t_sw < 0.0) out.push_back({"params", "tsw must be >= 0"});
    if (model.fit && model.fit->alpha <= 1.0) out.push_back({"params", "alpha must be > 1"});
    if (model.processors < 1) out.push_back({"params", "processors must be >= 1"});
    return out;
}

double power_at(const PowerModel& model, double f) {
    if (!(f > 0.0)) throw std::invalid_argument("power_at: frequency must be positive");
    int ix = model.freq_index(f);
    if (ix >= 0) return model.p_dep[ix] + model.c;
    if (!model.fit)
        throw std::invalid_argument("power_at: no table entry for " + format_double(f) +
                                    " Hz and no fitted curve");
    const double ghz = f * 1e-9;
    const double dep_mw = model.fit->a * std::pow(ghz, model.fit->alpha) + model.fit->b * ghz;
    return dep_mw * 1e-3 + model.c;
}

double energy_per_cycle(const PowerModel& model, double f) {
    int ix = model.freq_index(f);
    if (ix < 0)
        throw std::invalid_argument("energy_per_cycle: " + format_double(f) +
                                    " Hz is not in the frequency set");
    return energy_per_cycle_index(model, ix);
}

double energy_per_cycle_index(const PowerModel& model, int freq_index) {
    return (model.p_dep.at(freq_index) + model.c) / model.freqs.at(freq_index);
}

double break_even(const PowerModel& model) {
    if (model.c <= 0.0) return model.t_sw;
    return std::max(model.t_sw, model.e_sw / model.c);
}

double idle_energy(const PowerModel& model, double idle, double period) {
    if (idle < -kTimeTol || idle > period + kTimeTol)
        throw std::invalid_argument("idle_energy: idle length outside [0, period]");
    if (idle >= period - kTimeTol) return 0.0;
    const double t_be = break_even(model);
    if (idle + kTimeTol >= t_be) return model.e_sw;
    return model.c * std::max(0.0, idle);
}

EnergyEnvelope exec_envelope(const PowerModel& model, std::int64_t workload) {
    if (workload < 1) throw std::invalid_argument("exec_envelope: workload must be >= 1");
    const double w = static_cast<double>(workload);

    // Candidate vertices, ascending duration (descending frequency).
    std::vector<EnergyEnvelope::Point> pts;
    for (int i = model.freq_count() - 1; i >= 0; --i)
        pts.push_back({w / model.freqs[i], w * energy_per_cycle_index(model, i), i});

    // Monotone-chain lower hull in the (duration, energy) plane.
    std::vector<EnergyEnvelope::Point> hull;
    for (const auto& p : pts) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull[hull.size() - 1];
            double cross = (b.duration - a.duration) * (p.energy - a.energy) -
                           (p.duration - a.duration) * (b.energy - a.energy);
            if (cross <= 0.0)
                hull.pop_back();
            else
                break;
        }
        // Drop dominated points (same duration, higher energy cannot occur
        // with strictly ascending frequencies).
        hull.push_back(p);
    }
    EnergyEnvelope env;
    env.points = std::move(hull);
    return env;
}

double EnergyEnvelope::energy_at(double duration) const {
    if (points.empty()) throw std::logic_error("empty envelope");
    if (duration <= points.front().duration) return points.front().energy;
    if (duration >= points.back().duration) return points.back().energy;
    for (size_t i = 1; i < points.size(); ++i) {
        if (duration <= points[i].duration) {
            const auto& a = points[i - 1];
            const auto& b = points[i];
            double t = (duration - a.duration) / (b.duration - a.duration);
            return a.energy + t * (b.energy - a.energy);
        }
    }
    return points.back().energy;
}

PowerModel load_platform(const std::string& text) {
    PowerModel m;
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
            if (tok != "platform" || !(ls >> ver) || ver != "v1")
                throw ParseError("expected 'platform v1' header", lineno);
            saw_header = true;
            continue;
        }
        if (tok == "c") {
            double mw;
            if (!(ls >> mw)) throw ParseError("malformed c line", lineno);
            m.c = mw * 1e-3;
        } else if (tok == "freq") {
            double ghz, pdep_mw;
            if (!(ls >> ghz >> pdep_mw)) throw ParseError("malformed freq line", lineno);
            m.freqs.push_back(ghz * 1e9);
            m.p_dep.push_back(pdep_mw * 1e-3);
        } else if (tok == "fit") {
            PowerFit fit;
            std::string ka, kb, kalpha;
            if (!(ls >> ka >> fit.a >> kb >> fit.b >> kalpha >> fit.alpha) || ka != "a" ||
                kb != "b" || kalpha != "alpha")
                throw ParseError("malformed fit line (want: fit a <v> b <v> alpha <v>)", lineno);
            m.fit = fit;
        } else if (tok == "esw") {
            double uj;
            if (!(ls >> uj)) throw ParseError("malformed esw line", lineno);
            m.e_sw = uj * 1e-6;
        } else if (tok == "tsw") {
            double ms;
            if (!(ls >> ms)) throw ParseError("malformed tsw line", lineno);
            m.t_sw = ms * 1e-3;
        } else if (tok == "processors") {
            if (!(ls >> m.processors)) throw ParseError("malformed processors line", lineno);
        } else {
            throw ParseError("unknown directive '" + tok + "'", lineno);
        }
    }
    if (!saw_header) throw ParseError("missing 'platform v1' header", 1);

    auto violations = validate(m);
    if (!violations.empty())
        throw ParseError("invalid platform: " + violations.front().rule + ": " +
                         violations.front().message);
    return m;
}

std::string save_platform(const PowerModel& m) {
    std::string out = "platform v1\n";
    out += "c " + format_double(m.c * 1e3) + "\n";
    for (int i = 0; i < m.freq_count(); ++i)
        out += "freq " + format_double(m.freqs[i] * 1e-9) + " " + format_double(m.p_dep[i] * 1e3) +
               "\n";
    if (m.fit)
        out += "fit a " + format_double(m.fit->a) + " b " + format_double(m.fit->b) + " alpha " +
               format_double(m.fit->alpha) + "\n";
    out += "esw " + format_double(m.e_sw * 1e6) + "\n";
    out += "tsw " + format_double(m.t_sw * 1e3) + "\n";
    out += "processors " + std::to_string(m.processors) + "\n";
    return out;
}

}  // namespace esched
