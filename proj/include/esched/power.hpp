#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esched/util.hpp"

namespace esched {

/// Fitted form of the frequency-dependent power curve, kept in the units it
/// is usually quoted in (mW, GHz) and converted on evaluation.
struct PowerFit {
    double a = 0.0;      // mW / GHz^alpha
    double b = 0.0;      // mW / GHz
    double alpha = 3.0;  // dimensionless, > 1
};

/// Platform energy parameters: static power, the discrete frequency set with
/// measured frequency-dependent power, and the sleep-transition overheads.
///
/// Total power at frequency f is p_dep(f) + c. When a measured table entry
/// exists for f it is authoritative; the fitted curve covers everything else.
struct PowerModel {
    double c = 0.0;                  // W, frequency-independent power
    std::vector<double> freqs;       // Hz, strictly ascending
    std::vector<double> p_dep;       // W, frequency-dependent power per table entry
    std::optional<PowerFit> fit;
    double e_sw = 0.0;               // J, sleep transition energy (both directions)
    double t_sw = 0.0;               // s, sleep transition time (both directions)
    int processors = 1;              // K

    int freq_count() const { return static_cast<int>(freqs.size()); }
    double f_min() const { return freqs.front(); }
    double f_max() const { return freqs.back(); }
    // Index of f in the frequency set, or -1.
    int freq_index(double f) const;
};

/// Piecewise-linear convex lower envelope of execution energy versus duration
/// for a fixed workload. Each breakpoint runs all cycles at one frequency.
struct EnergyEnvelope {
    struct Point {
        double duration;  // s
        double energy;    // J
        int freq_index;   // index into PowerModel::freqs
    };
    std::vector<Point> points;  // ascending duration, convex energy chain

    // Minimum execution energy at the given duration (linear interpolation
    // between breakpoints). Duration outside the span is clamped to it.
    double energy_at(double duration) const;
};

std::vector<Violation> validate(const PowerModel& model);

// Total power at frequency f (W). Table entries are authoritative; the
// fitted curve is used for off-table frequencies.
double power_at(const PowerModel& model, double f);

// Energy per clock cycle at frequency f (J), equal to power_at(f) / f.
// f must be one of the model's discrete frequencies.
double energy_per_cycle(const PowerModel& model, double f);
double energy_per_cycle_index(const PowerModel& model, int freq_index);

// Break-even time: max(t_sw, e_sw / c). With c == 0 this degenerates to
// t_sw (the energy arm of the max has no meaning without static power).
double break_even(const PowerModel& model);

// Energy of one idle interval of length I within a period:
//   c * I          for 0 <= I < t_be
//   e_sw           for t_be <= I < period
//   0              for I == period (processor unused)
// Comparisons use a 1e-9 s absolute tolerance.
double idle_energy(const PowerModel& model, double idle, double period);

// Lower convex envelope of execution energy over feasible durations
// [W/f_max, W/f_min] for workload W.
EnergyEnvelope exec_envelope(const PowerModel& model, std::int64_t workload);

// Platform config text format round trip:
//   platform v1
//   c <mW>
//   freq <GHz> <pdep_mW>     (repeated, ascending)
//   fit a <val> b <val> alpha <val>
//   esw <uJ>
//   tsw <ms>
//   processors <K>
PowerModel load_platform(const std::string& text);
std::string save_platform(const PowerModel& model);

}  // namespace esched
