#include "twl/finite_law.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "twl/error.hpp"
#include "twl/io.hpp"

namespace twl {

namespace {

void sort_by_value(std::vector<Atom>& atoms) {
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.value < b.value; });
}

}  // namespace

FiniteLaw::FiniteLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvalidLaw("law has no atoms");
  sort_by_value(atoms_);
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (!std::isfinite(a.value) || !std::isfinite(a.prob))
      throw InvalidLaw("non-finite atom");
    if (std::abs(a.value) > kMaxAbsValue)
      throw InvalidLaw("atom value " + io::format_double(a.value) +
                       " exceeds magnitude bound");
    if (!(a.prob > 0.0))
      throw InvalidLaw("atom at " + io::format_double(a.value) +
                       " has non-positive probability");
    if (i > 0 && !(atoms_[i - 1].value < a.value))
      throw InvalidLaw("duplicate atom value " + io::format_double(a.value));
    total += a.prob;
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw InvalidLaw("probabilities sum to " + io::format_double(total));
}

FiniteLaw FiniteLaw::merged(std::vector<Atom> atoms, double tol) {
  sort_by_value(atoms);
  std::vector<Atom> out;
  for (const Atom& a : atoms) {
    if (!out.empty() && std::abs(a.value - out.back().value) <= tol) {
      out.back().prob += a.prob;
    } else {
      out.push_back(a);
    }
  }
  return FiniteLaw(std::move(out));
}

double FiniteLaw::expect(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.prob * f(a.value);
  return s;
}

double FiniteLaw::mean() const {
  return expect([](double x) { return x; });
}

double FiniteLaw::variance() const {
  const double mu = mean();
  return expect([mu](double x) { return (x - mu) * (x - mu); });
}

double FiniteLaw::mass_where(const std::function<bool(double)>& pred) const {
  double s = 0.0;
  for (const Atom& a : atoms_)
    if (pred(a.value)) s += a.prob;
  return s;
}

FiniteLaw parse_finite_law(std::istream& in) {
  std::vector<Atom> atoms;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string value_tok, prob_tok, extra;
    if (!(fields >> value_tok >> prob_tok) || (fields >> extra))
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected `value<TAB>prob`");
    try {
      atoms.push_back({io::parse_double(value_tok), io::parse_double(prob_tok)});
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return FiniteLaw(std::move(atoms));
}

FiniteLaw parse_finite_law(const std::string& text) {
  std::istringstream in(text);
  return parse_finite_law(in);
}

FiniteLaw load_finite_law(const std::string& path) {
  return parse_finite_law(io::read_file(path));
}

std::string format_finite_law(const FiniteLaw& law) {
  std::string out;
  for (const Atom& a : law.atoms()) {
    out += io::format_double(a.value);
    out += '\t';
    out += io::format_double(a.prob);
    out += '\n';
  }
  return out;
}

}  // namespace twl
