#ifndef JACSHIELD_COMMON_HPP
#define JACSHIELD_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace jacshield {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite values / diverged optimization (CLI exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
};

// File-system and format failures (CLI exit code 4).
class IoError : public Error {
public:
    using Error::Error;
};

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const Shape& shape);

// Deterministic, self-contained RNG (splitmix64 + Box-Muller). We do not
// use std::normal_distribution because its output is implementation
// defined; reproducibility of checkpoints depends on this stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double gaussian();

    // uniform integer in [0, n)
    std::size_t uniform_index(std::size_t n);

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stream-splitting helper: derive an independent seed from (seed, tag).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

// Kahan-compensated accumulator; keeps dataset-level means deterministic
// and order-stable.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace jacshield

#endif
