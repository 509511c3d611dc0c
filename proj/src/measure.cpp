#include "twl/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twl/error.hpp"

namespace twl::measure {

namespace {

// Accumulated masses below this magnitude are treated as exact zeros.
constexpr double kZeroMassSlack = 1e-15;

double moment_generating_minus_one(const FiniteLaw& law, double s) {
  double acc = 0.0;
  for (const Atom& a : law.atoms()) acc += a.prob * std::expm1(s * a.value);
  return acc;
}

void check_exponent_preconditions(const FiniteLaw& law) {
  const double mean = law.mean();
  if (mean >= 0.0) throw NonNegativeDrift(mean);
  if (law.max_value() <= 0.0) throw NoPositivePart();
  for (const Atom& a : law.atoms())
    if (a.value == 0.0) throw ZeroAtom();
}

// Visits every (negative atom, positive atom) pair.
template <typename F>
void for_each_pair(const FiniteLaw& law, F&& f) {
  for (std::size_t i = 0; i < law.size(); ++i) {
    if (!(law[i].value < 0.0)) continue;
    for (std::size_t j = 0; j < law.size(); ++j) {
      if (!(law[j].value > 0.0)) continue;
      f(i, j);
    }
  }
}

bool masses_nonnegative(const std::vector<double>& masses) {
  for (double w : masses)
    if (w < -kZeroMassSlack) return false;
  return true;
}

}  // namespace

double solve_beta(const FiniteLaw& law) {
  check_exponent_preconditions(law);

  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; moment_generating_minus_one(law, hi) <= 0.0; ++i) {
    lo = hi;
    hi *= 2.0;
    if (i > 1100) throw IdentityViolation("exponent bracket", hi, 0.0);
  }

  double best = hi;
  double best_err = std::abs(moment_generating_minus_one(law, hi));
  for (int it = 0; it < kMaxBisectionIterations; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f = moment_generating_minus_one(law, mid);
    if (std::abs(f) < best_err) {
      best = mid;
      best_err = std::abs(f);
    }
    if (f < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_err > kIdentityTolerance)
    throw IdentityViolation("E exp(beta X) = 1", best_err + 1.0, 1.0);
  return best;
}

double compute_c(const FiniteLaw& law, double beta) {
  double positive_side = 0.0;
  double negative_side = 0.0;
  for (const Atom& a : law.atoms()) {
    if (a.value > 0.0) positive_side += a.prob * std::expm1(beta * a.value);
    if (a.value < 0.0) negative_side -= a.prob * std::expm1(beta * a.value);
  }
  if (std::abs(positive_side - negative_side) > kIdentityTolerance)
    throw IdentityViolation("two-sided normalizer", positive_side,
                            negative_side);
  return positive_side;
}

double compute_sigma2(const FiniteLaw& law, double beta, double c) {
  double acc = 0.0;
  for_each_pair(law, [&](std::size_t i, std::size_t j) {
    const double u = law[i].value;
    const double v = law[j].value;
    acc += (std::exp(beta * v) - std::exp(beta * u)) * u * v * law[i].prob *
           law[j].prob;
  });
  return -acc / c;
}

TiltParams make_params(const FiniteLaw& law, std::uint64_t m) {
  if (m < 1) throw InvalidArgument("scale index m must be >= 1");
  TiltParams p;
  p.beta = solve_beta(law);
  p.c = compute_c(law, p.beta);
  p.sigma2 = compute_sigma2(law, p.beta, p.c);
  p.m = m;
  return p;
}

std::vector<double> tilted_masses(const FiniteLaw& law, double beta, double c,
                                  std::uint64_t m) {
  const double shift = beta / (2.0 * std::sqrt(static_cast<double>(m)));
  std::vector<double> masses(law.size(), 0.0);
  for_each_pair(law, [&](std::size_t i, std::size_t j) {
    const double u = law[i].value;
    const double v = law[j].value;
    const double w = (std::exp(beta * v) - std::exp(beta * u)) * law[i].prob *
                     law[j].prob / c;
    // Coefficients on u and v sum to one, so w is split between the pair.
    masses[i] += w * (v + shift) / (v - u);
    masses[j] += w * (-u - shift) / (v - u);
  });
  return masses;
}

std::uint64_t min_valid_m(const FiniteLaw& law, double beta, double c) {
  auto valid = [&](std::uint64_t m) {
    return masses_nonnegative(tilted_masses(law, beta, c, m));
  };
  if (valid(1)) return 1;
  std::uint64_t bad = 1;
  std::uint64_t good = 2;
  while (!valid(good)) {
    bad = good;
    if (good > (std::numeric_limits<std::uint64_t>::max() >> 2))
      throw IdentityViolation("tilted masses never become nonnegative", 0, 0);
    good *= 2;
  }
  while (good - bad > 1) {
    const std::uint64_t mid = bad + (good - bad) / 2;
    if (valid(mid)) {
      good = mid;
    } else {
      bad = mid;
    }
  }
  return good;
}

double second_moment_formula(const FiniteLaw& law, double beta, double c,
                             std::uint64_t m) {
  const double shift = beta / (2.0 * std::sqrt(static_cast<double>(m)));
  double acc = 0.0;
  for_each_pair(law, [&](std::size_t i, std::size_t j) {
    const double u = law[i].value;
    const double v = law[j].value;
    acc += (std::exp(beta * v) - std::exp(beta * u)) * (-u * v - shift * (u + v)) *
           law[i].prob * law[j].prob;
  });
  return acc / c;
}

TiltReport tilt(const FiniteLaw& law, double beta, double c, std::uint64_t m) {
  if (m < 1) throw InvalidArgument("scale index m must be >= 1");
  for (const Atom& a : law.atoms())
    if (a.value == 0.0) throw ZeroAtom();

  const std::vector<double> masses = tilted_masses(law, beta, c, m);
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] < -kZeroMassSlack)
      throw NegativeMass(law[i].value, masses[i], m, min_valid_m(law, beta, c));
  }

  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < masses.size(); ++i)
    if (masses[i] > kZeroMassSlack) atoms.push_back({law[i].value, masses[i]});

  TiltReport report{.params = {beta, c, compute_sigma2(law, beta, c), m},
                    .base = law,
                    .tilted = FiniteLaw(std::move(atoms))};
  report.mean = report.tilted.mean();
  report.second_moment = report.tilted.expect([](double x) { return x * x; });
  report.variance = report.second_moment - report.mean * report.mean;

  const double expected_mean = -beta / (2.0 * std::sqrt(static_cast<double>(m)));
  if (std::abs(report.mean - expected_mean) > kIdentityTolerance)
    throw IdentityViolation("tilted mean", report.mean, expected_mean);
  const double expected_second = second_moment_formula(law, beta, c, m);
  if (std::abs(report.second_moment - expected_second) > kIdentityTolerance)
    throw IdentityViolation("tilted second moment", report.second_moment,
                            expected_second);
  return report;
}

TiltReport tilt(const FiniteLaw& law, const TiltParams& params) {
  return tilt(law, params.beta, params.c, params.m);
}

double variance_formula(const TiltReport& report) {
  const TiltParams& p = report.params;
  const double d =
      second_moment_formula(report.base, p.beta, p.c, p.m) -
      p.beta * p.beta / (4.0 * static_cast<double>(p.m));
  if (std::abs(d - report.variance) > kIdentityTolerance)
    throw IdentityViolation("increment variance", d, report.variance);
  return d;
}

double variance_upper_bound(const FiniteLaw& law, double beta, double c,
                            std::uint64_t m_from) {
  // D(s) = sigma2 + a s - (beta^2/4) s^2 with s = 1/sqrt(m).
  const double sigma2 = compute_sigma2(law, beta, c);
  double a = 0.0;
  for_each_pair(law, [&](std::size_t i, std::size_t j) {
    const double u = law[i].value;
    const double v = law[j].value;
    a -= (std::exp(beta * v) - std::exp(beta * u)) * (u + v) * 0.5 * beta *
         law[i].prob * law[j].prob;
  });
  a /= c;
  const double q = 0.25 * beta * beta;
  auto d = [&](double s) { return sigma2 + a * s - q * s * s; };
  const double s_max = 1.0 / std::sqrt(static_cast<double>(m_from));
  double best = std::max(d(0.0), d(s_max));
  const double vertex = a / (2.0 * q);
  if (vertex > 0.0 && vertex < s_max) best = std::max(best, d(vertex));
  return best;
}

}  // namespace twl::measure
