#pragma once

#include <cstdint>
#include <vector>

#include "twl/finite_law.hpp"

namespace twl::measure {

inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr int kMaxBisectionIterations = 200;

struct TiltParams {
  double beta = 0.0;    // positive root of E exp(beta X) = 1
  double c = 0.0;       // normalizer of the tilted law
  double sigma2 = 0.0;  // variance of the limiting Brownian motion
  std::uint64_t m = 1;  // scale index
};

struct TiltReport {
  TiltParams params;
  FiniteLaw base;
  FiniteLaw tilted;
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
};

// Positive root of s -> E exp(s X) - 1 for a law with negative mean and mass
// on both sides of 0. Bracketing by doubling, then bisection.
// Throws NonNegativeDrift, NoPositivePart, ZeroAtom.
double solve_beta(const FiniteLaw& law);

// Sum over v > 0 of (e^{beta v} - 1) mu(v). Throws IdentityViolation when the
// negative-side expression disagrees beyond kIdentityTolerance.
double compute_c(const FiniteLaw& law, double beta);

double compute_sigma2(const FiniteLaw& law, double beta, double c);

// beta, c and sigma2 for `law` at scale `m`.
TiltParams make_params(const FiniteLaw& law, std::uint64_t m);

// Signed atom masses of the tilted construction, index-aligned with
// `law.atoms()`. No sign validation.
std::vector<double> tilted_masses(const FiniteLaw& law, double beta, double c,
                                  std::uint64_t m);

// Smallest m >= 1 at which every tilted mass is nonnegative.
std::uint64_t min_valid_m(const FiniteLaw& law, double beta, double c);

// Builds the tilted law by exact pair enumeration and checks the mean and
// second-moment identities. Throws NegativeMass, ZeroAtom, IdentityViolation.
TiltReport tilt(const FiniteLaw& law, double beta, double c, std::uint64_t m);
TiltReport tilt(const FiniteLaw& law, const TiltParams& params);

// Closed-form second moment c^{-1} sum (e^{bv}-e^{bu})(-uv - b(u+v)/(2 sqrt m)).
double second_moment_formula(const FiniteLaw& law, double beta, double c,
                             std::uint64_t m);

// Variance of one tilted increment via the closed form (second moment minus
// beta^2/(4m)); throws IdentityViolation if it disagrees with the variance of
// the tilted atoms.
double variance_formula(const TiltReport& report);

// sup over m >= m_from of the closed-form increment variance. The variance is
// a concave quadratic in 1/sqrt(m), so the supremum is attained at an
// endpoint or at the vertex.
double variance_upper_bound(const FiniteLaw& law, double beta, double c,
                            std::uint64_t m_from);

}  // namespace twl::measure
