// SPDX-License-Identifier: Apache-2.0
//
// Shared small utilities: error taxonomy, complex alias, deterministic RNG,
// and a thread helper honoring the HELMDG_THREADS cap.

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace helmdg {

using cplx = std::complex<double>;

// Base of all errors raised by the library. Subclasses distinguish the
// failure modes that callers (tests, CLI) react to differently.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Mesh connectivity violations (non-matching triangulations, bad adjacency).
class StructuralError : public Error {
public:
  using Error::Error;
};

// Problem description is incomplete or inconsistent (unlabeled boundary
// edges, unknown config keys, invalid study parameters).
class SpecificationError : public Error {
public:
  using Error::Error;
};

// Degenerate geometry (zero-area triangles, singular element maps).
class GeometryError : public Error {
public:
  using Error::Error;
};

// Invalid arguments to an operation (out-of-range ids, empty mark sets).
class InputError : public Error {
public:
  using Error::Error;
};

// Request beyond an implemented table or size limit.
class CapabilityError : public Error {
public:
  using Error::Error;
};

// Numerical breakdown. Carries a condition estimate when one is available
// (near-singular solves at resonances report through this).
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what, double cond = 0.0)
      : Error(what), condition_estimate(cond) {}
  double condition_estimate;
};

// PCG32: small deterministic generator. Own implementation so that random
// property suites produce identical streams on every platform and run.
class Pcg32 {
public:
  explicit Pcg32(std::uint64_t seed = 0x853c49e6748fea9bULL,
                 std::uint64_t seq = 0xda3e39cb94b95bdbULL) {
    state_ = 0U;
    inc_ = (seq << 1u) | 1u;
    next();
    state_ += seed;
    next();
  }

  std::uint32_t next() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  // Uniform in [0, 1).
  double uniform() { return next() * (1.0 / 4294967296.0); }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  cplx unit_disc() {
    // Rejection-free: uniform angle and sqrt-radius.
    double r = std::sqrt(uniform());
    double t = 6.283185307179586476925286766559 * uniform();
    return cplx(r * std::cos(t), r * std::sin(t));
  }

private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

// Number of worker threads to use: HELMDG_THREADS if set (min 1), else the
// hardware concurrency. All reductions in the library stay in deterministic
// slot order, so the thread count never changes computed values.
int thread_budget();

// Runs fn(i) for i in [0, n). Work is split into contiguous static chunks;
// fn must only write to per-index slots. Falls back to a plain loop when the
// budget is 1 or n is small.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace helmdg
