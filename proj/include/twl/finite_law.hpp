#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace twl {

struct Atom {
  double value;
  double prob;
  bool operator==(const Atom&) const = default;
};

// A probability measure with finitely many atoms, stored with strictly
// increasing values and strictly positive probabilities summing to 1.
class FiniteLaw {
 public:
  static constexpr double kMassTolerance = 1e-12;
  static constexpr double kMaxAbsValue = 1e3;

  // Sorts by value and validates. Throws InvalidLaw.
  explicit FiniteLaw(std::vector<Atom> atoms);

  // Sums the probabilities of atoms whose values agree within `tol` (after
  // sorting), then validates.
  static FiniteLaw merged(std::vector<Atom> atoms, double tol);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  double min_value() const noexcept { return atoms_.front().value; }
  double max_value() const noexcept { return atoms_.back().value; }
  double diameter() const noexcept { return max_value() - min_value(); }

  double expect(const std::function<double(double)>& f) const;
  double mean() const;
  double variance() const;
  double mass_where(const std::function<bool(double)>& pred) const;

  bool operator==(const FiniteLaw&) const = default;

 private:
  std::vector<Atom> atoms_;
};

// Text format: one `value<TAB>prob` pair per line, `#` starts a comment.
FiniteLaw parse_finite_law(std::istream& in);
FiniteLaw parse_finite_law(const std::string& text);
FiniteLaw load_finite_law(const std::string& path);
std::string format_finite_law(const FiniteLaw& law);

}  // namespace twl
