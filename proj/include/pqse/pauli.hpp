#pragma once

// Hermitian qubit operators as real-weighted Pauli strings, the disordered
// Heisenberg ring, and the plain-text Pauli-sum file format.
//
// File format:
//   line 1:            qubit count n
//   following lines:   <coefficient> <string>   (string over I,X,Y,Z, length n)
//   '#' starts a comment; "# ref: <bits>" carries a suggested reference state.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "pqse/random.hpp"

namespace pqse {

/// Terms whose merged coefficient falls below this are dropped.
inline constexpr double kTermDropTolerance = 1e-14;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class PauliString {
 public:
  explicit PauliString(std::string letters) : letters_(std::move(letters)) {
    if (letters_.empty()) throw std::invalid_argument("PauliString: zero qubits");
    for (char c : letters_) {
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
        throw std::invalid_argument(std::string("PauliString: invalid letter '") + c + "'");
    }
  }

  /// Identity on n qubits with single-qubit factors placed at the given sites.
  static PauliString with_factors(std::size_t n,
                                  std::initializer_list<std::pair<std::size_t, char>> factors) {
    std::string s(n, 'I');
    for (auto [site, letter] : factors) s.at(site) = letter;
    return PauliString(std::move(s));
  }

  [[nodiscard]] std::size_t num_qubits() const noexcept { return letters_.size(); }
  [[nodiscard]] const std::string& letters() const noexcept { return letters_; }
  [[nodiscard]] char operator[](std::size_t q) const { return letters_[q]; }
  [[nodiscard]] bool is_diagonal() const noexcept {
    return std::all_of(letters_.begin(), letters_.end(),
                       [](char c) { return c == 'I' || c == 'Z'; });
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::string letters_;
};

struct PauliTerm {
  double coefficient;
  PauliString string;

  friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
};

/// Canonical sum of Pauli terms: one entry per distinct string, in order of
/// first appearance, with negligible coefficients removed.
class PauliSum {
 public:
  explicit PauliSum(std::size_t num_qubits) : n_(num_qubits) {
    if (n_ == 0) throw std::invalid_argument("PauliSum: zero qubits");
  }

  PauliSum(std::size_t num_qubits, const std::vector<PauliTerm>& terms) : PauliSum(num_qubits) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<PauliTerm> merged;
    for (const auto& t : terms) {
      if (t.string.num_qubits() != n_)
        throw std::invalid_argument("PauliSum: string length " +
                                    std::to_string(t.string.num_qubits()) + " != " +
                                    std::to_string(n_));
      if (!std::isfinite(t.coefficient)) throw std::invalid_argument("PauliSum: non-finite coefficient");
      auto [it, inserted] = index.emplace(t.string.letters(), merged.size());
      if (inserted)
        merged.push_back(t);
      else
        merged[it->second].coefficient += t.coefficient;
    }
    for (auto& t : merged)
      if (std::abs(t.coefficient) >= kTermDropTolerance) terms_.push_back(std::move(t));
  }

  [[nodiscard]] std::size_t num_qubits() const noexcept { return n_; }
  [[nodiscard]] const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
  [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }

  [[nodiscard]] PauliSum scaled(double factor) const {
    std::vector<PauliTerm> t = terms_;
    for (auto& term : t) term.coefficient *= factor;
    return PauliSum(n_, t);
  }

  friend bool operator==(const PauliSum&, const PauliSum&) = default;

 private:
  std::size_t n_;
  std::vector<PauliTerm> terms_;
};

/// A parsed Hamiltonian file together with its optional reference bitstring.
struct PauliFile {
  PauliSum hamiltonian;
  std::optional<std::string> reference_bits;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline bool is_bitstring(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '1'; });
}

inline double parse_coefficient(std::string_view tok, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(value)) return value;
  if (tok.find_first_of("ijJ") != std::string_view::npos || tok.front() == '(')
    throw ParseError(line, "non-real coefficient '" + std::string(tok) + "'");
  throw ParseError(line, "malformed coefficient '" + std::string(tok) + "'");
}

}  // namespace detail

inline PauliFile parse_pauli_file(std::string_view text) {
  std::optional<std::size_t> n;
  std::optional<std::string> ref;
  std::vector<PauliTerm> terms;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    std::string_view content = raw;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
      std::string_view comment = detail::trim(raw.substr(hash + 1));
      if (comment.starts_with("ref:")) {
        std::string_view bits = detail::trim(comment.substr(4));
        if (!detail::is_bitstring(bits)) throw ParseError(line_no, "malformed ref bitstring");
        ref = std::string(bits);
      }
      content = raw.substr(0, hash);
    }
    content = detail::trim(content);
    if (content.empty()) continue;

    const auto tokens = detail::split_ws(content);
    if (!n) {
      std::size_t value = 0;
      auto [ptr, ec] = std::from_chars(tokens[0].data(), tokens[0].data() + tokens[0].size(), value);
      if (tokens.size() != 1 || ec != std::errc() || ptr != tokens[0].data() + tokens[0].size() ||
          value == 0)
        throw ParseError(line_no, "expected a positive qubit count");
      n = value;
      continue;
    }
    if (tokens.size() != 2) throw ParseError(line_no, "expected '<coefficient> <string>'");
    const double coefficient = detail::parse_coefficient(tokens[0], line_no);
    const std::string_view letters = tokens[1];
    if (letters.size() != *n)
      throw ParseError(line_no, "string length " + std::to_string(letters.size()) +
                                    " does not match declared qubit count " + std::to_string(*n));
    for (char c : letters)
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
        throw ParseError(line_no, std::string("invalid Pauli letter '") + c + "'");
    terms.push_back({coefficient, PauliString(std::string(letters))});
  }
  if (!n) throw ParseError(line_no, "missing qubit count");
  if (ref && ref->size() != *n) throw ParseError(line_no, "ref bitstring length does not match n");
  return {PauliSum(*n, terms), std::move(ref)};
}

inline PauliSum parse_pauli_sum(std::string_view text) { return parse_pauli_file(text).hamiltonian; }

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string serialize_pauli_sum(const PauliSum& h,
                                       const std::optional<std::string>& reference_bits = std::nullopt) {
  std::string out = std::to_string(h.num_qubits()) + "\n";
  if (reference_bits) out += "# ref: " + *reference_bits + "\n";
  for (const auto& t : h.terms()) out += format_real(t.coefficient) + " " + t.string.letters() + "\n";
  return out;
}

struct DisorderSpec {
  double coupling = 1.0;        // J
  double disorder_bound = 1.0;  // h
  std::variant<std::vector<double>, std::uint64_t> fields = std::uint64_t{0};
};

/// Fields h_i drawn uniformly from the open interval (-h, h) with the
/// disorder stream of CounterRng keyed on (seed, 0).
inline std::vector<double> draw_disorder(std::size_t n, double bound, std::uint64_t seed) {
  if (!(bound > 0.0)) throw std::invalid_argument("disorder bound must be positive");
  const CounterRng rng(seed, 0, StreamId::disorder);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = bound * (2.0 * rng.uniform_open(i) - 1.0);
  return h;
}

inline std::vector<double> resolve_fields(std::size_t n, const DisorderSpec& spec) {
  if (const auto* explicit_fields = std::get_if<std::vector<double>>(&spec.fields)) {
    if (explicit_fields->size() != n)
      throw std::invalid_argument("DisorderSpec: expected " + std::to_string(n) + " fields");
    return *explicit_fields;
  }
  return draw_disorder(n, spec.disorder_bound, std::get<std::uint64_t>(spec.fields));
}

/// Periodic Heisenberg ring  sum_i J sigma_i . sigma_{i+1} + h_i Z_i.
inline PauliSum build_spin_ring(std::size_t n, const DisorderSpec& spec) {
  if (n < 3) throw std::invalid_argument("spin ring needs at least 3 sites");
  const auto h = resolve_fields(n, spec);
  std::vector<PauliTerm> terms;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    for (char p : {'X', 'Y', 'Z'})
      terms.push_back({spec.coupling, PauliString::with_factors(n, {{i, p}, {j, p}})});
  }
  for (std::size_t i = 0; i < n; ++i)
    terms.push_back({h[i], PauliString::with_factors(n, {{i, 'Z'}})});
  return PauliSum(n, terms);
}

/// Ground bitstring of sum_i h_i Z_i: bit i is 1 when h_i > 0.
inline std::string field_only_ground_bits(const std::vector<double>& fields) {
  std::string bits(fields.size(), '0');
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i] > 0.0) bits[i] = '1';
  return bits;
}

}  // namespace pqse
