#pragma once

// Basic value types, error types and deterministic random numbers shared by
// every nmvi header.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nmvi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A mapping or a difference quotient produced NaN or infinity.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// A value violates a documented invariant (bad parameters, bad shapes).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Membership tolerance used throughout unless a caller overrides it.
inline constexpr double kMembershipTol = 1e-12;

inline bool all_finite(const Vector& x) {
    return x.allFinite();
}

inline bool all_finite(const Matrix& m) {
    return m.allFinite();
}

inline void require_finite(const Vector& x, const char* what) {
    if (!all_finite(x)) {
        throw NonFiniteError(std::string(what) + ": non-finite entry");
    }
}

inline void require_dim(Index got, Index expected, const char* what) {
    if (got != expected) {
        throw DimensionError(std::string(what) + ": dimension " + std::to_string(got) +
                             " does not match expected " + std::to_string(expected));
    }
}

/// splitmix64-seeded xoshiro256** generator. Every draw below is defined in
/// terms of raw 64-bit outputs, so sequences are identical on every platform
/// (the standard distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            word = splitmix(s);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vector uniform_vector(const Vector& lo, const Vector& hi) {
        Vector v(lo.size());
        for (Index i = 0; i < lo.size(); ++i) {
            v[i] = uniform(lo[i], hi[i]);
        }
        return v;
    }

    /// Uniform direction on the unit sphere of the given dimension.
    Vector direction(Index dim) {
        Vector v(dim);
        double n = 0.0;
        while (n < 1e-12) {
            for (Index i = 0; i < dim; ++i) {
                v[i] = normal();
            }
            n = v.norm();
        }
        return v / n;
    }

private:
    static std::uint64_t splitmix(std::uint64_t& s) {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
};

} // namespace nmvi
