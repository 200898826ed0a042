#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace dlpde {

// Error hierarchy. Every failure raised by the library derives from Error so
// callers (the CLI in particular) can record the stage and keep going.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error { public: using Error::Error; };
class GridError : public Error { public: using Error::Error; };
class ConfigurationError : public Error { public: using Error::Error; };
class CoordinateError : public Error { public: using Error::Error; };
class UsageError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class RankError : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

class TrainingError : public Error {
public:
    TrainingError(const std::string& what, long step) : Error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

class AssemblyError : public Error {
public:
    AssemblyError(const std::string& what, std::size_t point) : Error(what), point_(point) {}
    std::size_t point() const { return point_; }

private:
    std::size_t point_;
};

class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, std::string term)
        : Error(what), term_(std::move(term)) {}
    const std::string& term() const { return term_; }

private:
    std::string term_;
};

/// Seeded 64-bit generator with platform-independent variates.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not, so the variates built on
/// top of it are constructed here by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [-1, 1): e = 2U - 1.
    double symmetric() { return 2.0 * uniform() - 1.0; }

    /// Uniform integer in [0, n), rejection-sampled so there is no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw ParameterError("Rng::below: empty range");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = engine_(); } while (v >= limit);
        return v % n;
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; derives independent sub-seeds from one user seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace dlpde
