#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tarski/exec.hpp"

namespace tarski {

/// Thrown when two values live over different ground sets (or backends).
class GroundMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A join was requested over a family containing an incompatible pair.
class IncompatiblePair : public std::invalid_argument {
 public:
  IncompatiblePair(std::size_t i, std::size_t j)
      : std::invalid_argument("parts " + std::to_string(i) + " and " + std::to_string(j) + " are not compatible"),
        first(i),
        second(j) {}
  std::size_t first, second;
};

class CapExceeded : public std::runtime_error {
 public:
  explicit CapExceeded(std::size_t cap)
      : std::runtime_error("monoid closure exceeded the element budget of " + std::to_string(cap)), cap(cap) {}
  std::size_t cap;
};

/// Finite injective partial map on {0, ..., n-1}: an element of the
/// symmetric inverse monoid I(n). Stored as an image table with -1 for
/// points outside the domain.
class PartialBijection {
 public:
  PartialBijection() = default;
  /// The empty map (zero) on a ground set of the given size.
  explicit PartialBijection(std::size_t ground_size) : image_(ground_size, -1) {}

  /// Builds from parallel domain/image lists; throws std::invalid_argument
  /// on repeated sources, repeated targets or out-of-range points.
  static PartialBijection from_pairs(std::size_t ground_size, std::span<const int> dom, std::span<const int> img);
  static PartialBijection identity(std::size_t ground_size);
  /// Identity restricted to the given points.
  static PartialBijection identity_on(std::size_t ground_size, std::span<const int> points);
  /// Total bijection from a permutation table.
  static PartialBijection permutation(std::span<const int> table);

  std::size_t ground_size() const { return image_.size(); }
  /// Image of x, or -1 when x is outside the domain.
  int operator()(std::size_t x) const { return image_[x]; }
  bool defined_at(std::size_t x) const { return image_[x] >= 0; }

  std::vector<int> domain() const;
  std::vector<int> range() const;
  std::size_t rank() const;

  bool is_zero() const { return rank() == 0; }
  bool is_idempotent() const;
  bool is_total() const { return rank() == ground_size(); }

  /// Identity on dom(s), written s*s.
  PartialBijection dom_idempotent() const;
  /// Identity on ran(s), written ss*.
  PartialBijection ran_idempotent() const;
  /// Restriction to the points of the idempotent e.
  PartialBijection restrict_to(const PartialBijection& e) const;

  const std::vector<int>& table() const { return image_; }

  auto operator<=>(const PartialBijection&) const = default;
  bool operator==(const PartialBijection&) const = default;

 private:
  std::vector<int> image_;
};

struct PartialBijectionHash {
  std::size_t operator()(const PartialBijection& p) const noexcept;
};

std::string to_string(const PartialBijection& p);

/// "a then b": x -> b(a(x)) wherever both steps are defined.
PartialBijection compose(const PartialBijection& a, const PartialBijection& b);
PartialBijection star(const PartialBijection& a);

struct Relations {
  bool leq = false;
  bool compatible = false;
  bool orthogonal = false;
};

/// Natural order, compatibility and orthogonality of a pair.
Relations relations(const PartialBijection& a, const PartialBijection& b);

/// Least upper bound of a pairwise compatible family; throws
/// IncompatiblePair naming the first offending pair.
PartialBijection join(std::span<const PartialBijection> parts);

/// Finite inverse submonoid of I(n) with a deterministic element order.
class FiniteInverseMonoid {
 public:
  FiniteInverseMonoid() = default;
  FiniteInverseMonoid(std::size_t ground_size, std::vector<PartialBijection> elements, std::vector<std::size_t> generators);

  std::size_t ground_size() const { return ground_size_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<PartialBijection>& elements() const { return elements_; }
  const PartialBijection& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<std::size_t>& generators() const { return generators_; }

  std::optional<std::size_t> index_of(const PartialBijection& p) const;
  bool contains(const PartialBijection& p) const { return index_of(p).has_value(); }

  std::vector<std::size_t> idempotents() const;
  /// Index of the largest idempotent if it is a two-sided identity.
  std::optional<std::size_t> identity() const;
  std::optional<std::size_t> zero() const;
  /// Elements s with s*s = ss* = identity (empty when there is no identity).
  std::vector<std::size_t> units() const;

  /// table[i][j] = index of compose(elements[i], elements[j]).
  std::vector<std::vector<std::size_t>> multiplication_table() const;

 private:
  std::size_t ground_size_ = 0;
  std::vector<PartialBijection> elements_;
  std::vector<std::size_t> generators_;
  std::unordered_map<PartialBijection, std::size_t, PartialBijectionHash> index_;
};

/// Closure of gens and their inverses under composition, with zero
/// adjoined (and the full identity when requested). Elements are listed
/// breadth-first by word length; each level is sorted.
FiniteInverseMonoid generate_monoid(std::span<const PartialBijection> gens, std::size_t cap = 100000,
                                    bool adjoin_identity = false);

/// I(n), generated by a transposition, an n-cycle and the identity on
/// {0..n-2}.
FiniteInverseMonoid symmetric_inverse_monoid(std::size_t n, std::size_t cap = 100000);

struct GreenClasses {
  std::vector<std::size_t> idempotents;               // element indices into S
  std::vector<std::vector<std::size_t>> d_classes;    // element indices
  std::vector<std::size_t> class_of;                  // per idempotent position
  std::vector<std::vector<char>> leq_j;               // [e][f] over idempotent positions
  bool dj_equal = true;
  /// For each D-class member, an element with source the class
  /// representative and target the member.
  std::vector<std::pair<std::size_t, std::size_t>> d_witnesses;  // (member idempotent, element index)
};

GreenClasses green_classify(const FiniteInverseMonoid& s, Exec exec = Exec::Parallel);

/// leq_j[e][f] over the given idempotent positions: some e' <= f lies in
/// the D-class of e.
std::vector<std::vector<char>> j_preorder(const FiniteInverseMonoid& s, const std::vector<std::size_t>& idempotents,
                                          const std::vector<std::size_t>& class_of, Exec exec);

struct AxiomCheck {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  std::string first_violation;
  bool ok() const { return violations == 0; }
};

/// Exhaustive recheck over all pairs: product and star closure,
/// ss*s = s and s*ss* = s*, idempotents commute.
AxiomCheck verify_inverse_monoid(const FiniteInverseMonoid& s, Exec exec = Exec::Parallel);

}  // namespace tarski
