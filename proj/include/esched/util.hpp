#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace esched {

/// A broken invariant or constraint, reported as data rather than thrown.
struct Violation {
    std::string rule;     // stable rule id, e.g. "cycle", "overlap"
    std::string message;  // human-readable detail
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, int line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}
    int line() const { return line_; }

  private:
    int line_;
};

class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class BudgetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Locale-independent double formatting (round-trip shortest form).
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Locale-independent formatting with a fixed number of significant digits.
inline std::string format_double(double v, int significant_digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general,
                             significant_digits);
    return std::string(buf, res.ptr);
}

// Fixed-point formatting, e.g. format_fixed(1.5, 3) == "1.500".
inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

// Deterministic RNG helpers. std::mt19937_64 has a standardized sequence;
// the distributions below are hand-rolled because the standard library's
// distribution classes are implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform real in [0, 1) with 53 bits of precision.
    double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double real(double lo, double hi) { return lo + (hi - lo) * real01(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace esched
