#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tarski/core.hpp"
#include "tarski/lp.hpp"
#include "tarski/rational.hpp"

namespace tarski {

class BackendMismatch : public GroundMismatch {
 public:
  using GroundMismatch::GroundMismatch;
};

class WordOutsideDomain : public std::invalid_argument {
 public:
  explicit WordOutsideDomain(const std::string& w)
      : std::invalid_argument("word '" + w + "' does not extend any domain word"), word(w) {}
  std::string word;
};

/// Finite word over {0, ..., arity-1}, one digit character per letter.
using Word = std::string;

bool is_prefix(const Word& u, const Word& w);
void validate_word(const Word& w, int arity);

/// Clopen subset of the Cantor space {0..n-1}^N as a reduced prefix code:
/// an antichain of words that never contains all n children of a word.
/// The reduced form is unique, so equality is structural.
class PrefixCode {
 public:
  explicit PrefixCode(int arity = 2) : arity_(arity) {}

  /// Canonicalizes an arbitrary word list (drops covered words, merges
  /// complete sibling sets).
  static PrefixCode from_words(int arity, std::vector<Word> words);
  static PrefixCode unit(int arity) { return from_words(arity, {Word{}}); }
  static PrefixCode cylinder(int arity, const Word& w) { return from_words(arity, {w}); }

  int arity() const { return arity_; }
  const std::vector<Word>& words() const { return words_; }
  bool is_zero() const { return words_.empty(); }
  bool is_unit() const { return words_.size() == 1 && words_[0].empty(); }
  std::size_t max_depth() const;
  /// Some code word is a prefix of w.
  bool covers(const Word& w) const;
  /// All words of length d inside the set; requires d >= max_depth().
  std::vector<Word> expand(std::size_t depth) const;

  auto operator<=>(const PrefixCode&) const = default;
  bool operator==(const PrefixCode&) const = default;

 private:
  int arity_ = 2;
  std::vector<Word> words_;
};

/// Subset of a finite ground set, kept sorted.
class FinSubset {
 public:
  FinSubset() = default;
  FinSubset(std::size_t ground_size, std::vector<int> points);

  std::size_t ground_size() const { return ground_size_; }
  const std::vector<int>& points() const { return points_; }
  bool contains(int x) const;
  bool is_zero() const { return points_.empty(); }
  PartialBijection idempotent() const { return PartialBijection::identity_on(ground_size_, points_); }

  auto operator<=>(const FinSubset&) const = default;
  bool operator==(const FinSubset&) const = default;

 private:
  std::size_t ground_size_ = 0;
  std::vector<int> points_;
};

enum class Backend { Finite, Prefix };

/// Clopen set in one of the two exact Stone-space backends.
class Clopen {
 public:
  Clopen() = default;
  Clopen(FinSubset s) : v_(std::move(s)) {}
  Clopen(PrefixCode c) : v_(std::move(c)) {}

  Backend backend() const { return v_.index() == 0 ? Backend::Finite : Backend::Prefix; }
  const FinSubset& finite() const { return std::get<FinSubset>(v_); }
  const PrefixCode& prefix() const { return std::get<PrefixCode>(v_); }
  bool is_zero() const;

  auto operator<=>(const Clopen&) const = default;
  bool operator==(const Clopen&) const = default;

 private:
  std::variant<FinSubset, PrefixCode> v_;
};

std::string to_string(const Clopen& c);

enum class BooleanOp { Meet, Join, Complement, Leq };

Clopen meet(const Clopen& e, const Clopen& f);
Clopen join(const Clopen& e, const Clopen& f);
Clopen complement(const Clopen& e);
bool leq(const Clopen& e, const Clopen& f);
/// Dispatcher; complement ignores f.
std::variant<Clopen, bool> boolean_op(BooleanOp kind, const Clopen& e, const Clopen& f);

/// Prefix exchange u_i w -> v_i w on infinite words: an element of the
/// Boolean inverse monoid C(P_n). Kept in canonical form: pairs sorted by
/// source word, and no complete sibling family u c -> v c remains.
class PrefixMap {
 public:
  struct Pair {
    Word from, to;
    auto operator<=>(const Pair&) const = default;
    bool operator==(const Pair&) const = default;
  };

  explicit PrefixMap(int arity = 2) : arity_(arity) {}

  /// Throws std::invalid_argument when either side is not an antichain.
  static PrefixMap from_pairs(int arity, std::vector<Pair> pairs);
  /// JSON layout: dom[i] -> ran[perm[i]].
  static PrefixMap from_codes(int arity, const std::vector<Word>& dom, const std::vector<Word>& ran,
                              const std::vector<int>& perm);
  static PrefixMap identity_on(const PrefixCode& e);
  /// The polycyclic generator x -> i x (i counted from 0).
  static PrefixMap generator(int arity, int letter);

  int arity() const { return arity_; }
  const std::vector<Pair>& pairs() const { return pairs_; }
  PrefixCode domain() const;
  PrefixCode range() const;
  bool is_zero() const { return pairs_.empty(); }
  bool is_idempotent() const;
  std::size_t max_depth() const;

  /// u_i w -> v_i w; throws WordOutsideDomain.
  Word apply(const Word& w) const;
  std::optional<Word> try_apply(const Word& w) const;

  auto operator<=>(const PrefixMap&) const = default;
  bool operator==(const PrefixMap&) const = default;

 private:
  int arity_ = 2;
  std::vector<Pair> pairs_;
};

std::string to_string(const PrefixMap& m);

PrefixMap compose(const PrefixMap& a, const PrefixMap& b);
PrefixMap star(const PrefixMap& a);
Relations relations(const PrefixMap& a, const PrefixMap& b);
PrefixMap join(std::span<const PrefixMap> parts);

/// Equality oracle independent of canonical forms: agreement (including
/// definedness) on every word of the given length.
bool agree_on_words(const PrefixMap& a, const PrefixMap& b, std::size_t length);
/// All words of the given length over the alphabet, lexicographic.
std::vector<Word> all_words(int arity, std::size_t length);

/// Element of a Boolean inverse monoid in one of the two backends.
class BimElement {
 public:
  BimElement() = default;
  BimElement(PartialBijection p) : v_(std::move(p)) {}
  BimElement(PrefixMap m) : v_(std::move(m)) {}

  Backend backend() const { return v_.index() == 0 ? Backend::Finite : Backend::Prefix; }
  const PartialBijection& finite() const { return std::get<PartialBijection>(v_); }
  const PrefixMap& prefix() const { return std::get<PrefixMap>(v_); }

  Clopen source() const;  // s*s
  Clopen target() const;  // ss*
  bool is_zero() const;
  bool is_idempotent() const;

  auto operator<=>(const BimElement&) const = default;
  bool operator==(const BimElement&) const = default;

 private:
  std::variant<PartialBijection, PrefixMap> v_;
};

std::string to_string(const BimElement& s);

BimElement bim_compose(const BimElement& a, const BimElement& b);
BimElement bim_star(const BimElement& a);
BimElement bim_join(std::span<const BimElement> parts);
Relations bim_relations(const BimElement& a, const BimElement& b);
BimElement identity_on(const Clopen& e);
/// s restricted to the part of its domain inside e.
BimElement restrict_to(const BimElement& s, const Clopen& e);

/// A Boolean inverse monoid to compute in: a finite inverse submonoid of
/// I(n), or the polycyclic C(P_n) given by prefix-map generators.
struct BimInstance {
  Backend backend = Backend::Finite;
  std::optional<FiniteInverseMonoid> monoid;
  int arity = 2;
  std::vector<PrefixMap> generators;

  static BimInstance finite(FiniteInverseMonoid m);
  /// C(P_n) with its canonical generators x -> i x.
  static BimInstance polycyclic(int arity = 2);

  Clopen unit() const;
  /// Finite backend: the atoms of the Boolean algebra generated by E(S),
  /// restricted to the support of S.
  std::vector<std::vector<int>> atoms() const;
};

struct DWitnessResult {
  std::optional<BimElement> witness;
  /// True when "no witness" is a proof rather than a budget cutoff.
  bool exhaustive = true;
};

/// An element s with source e and target f. Prefix backend: constructive
/// by leaf splitting; `budget` bounds the number of splits. Finite
/// backend: search inside the instance monoid, `budget` bounds the scan.
DWitnessResult d_witness(const BimInstance& instance, const Clopen& e, const Clopen& f, std::size_t budget = 4096);

/// Refines a word list by splitting the lexicographically least among the
/// longest leaves until it has at least `count` leaves. Returns false when
/// the split budget runs out.
bool refine_leaves(std::vector<Word>& leaves, int arity, std::size_t count, std::size_t& budget);

enum class MeanVerdict { Feasible, Infeasible, FeasibleUpToDepth };
std::string to_string(MeanVerdict v);

/// Nonnegative rational weights on atoms (finite backend) or on the
/// cylinders of one depth (prefix backend).
struct Mean {
  Backend backend = Backend::Finite;
  std::vector<std::vector<int>> atoms;  // finite
  std::vector<Word> cylinders;          // prefix
  std::vector<Rational> weights;
  Clopen normalization;

  std::vector<std::string> labels() const;
  /// Weight of a clopen expressible in the atoms/cylinders.
  Rational measure(const Clopen& e) const;
};

struct MeanResult {
  MeanVerdict verdict = MeanVerdict::Infeasible;
  std::optional<Mean> mean;
  std::optional<lp::Certificate> certificate;
  lp::Problem problem;
  /// Human-readable form of each LP row, aligned with problem.rows.
  std::vector<std::string> constraints;
  std::size_t depth = 0;
  Clopen normalization;
};

/// Decides existence of an invariant mean by exact LP. Variables are the
/// atom/cylinder weights; rows are mu(s*s) = mu(ss*) for every element of
/// the finite monoid, or for every generator restricted to each cylinder of
/// length <= depth (prefix backend, where only Infeasible is final).
MeanResult invariant_mean(const BimInstance& instance, std::size_t depth = 3,
                          std::optional<Clopen> normalization = std::nullopt);

/// The feasible set of a Feasible result is a single point.
bool mean_is_unique(const MeanResult& r);

struct FaithfulMean {
  bool exists = false;
  std::optional<Mean> mean;
  std::vector<Rational> max_weight;  // per atom/cylinder
};

/// Maximizes each weight separately; a faithful mean exists iff every
/// maximum is positive, and then the average of the maximizers is one.
FaithfulMean faithful_mean(const MeanResult& r);

/// Rebuilds the constraints from the instance and checks the mean or the
/// certificate of r exactly.
bool recheck_mean(const BimInstance& instance, const MeanResult& r);

/// Point measure induced by a finite-backend mean (atom weight spread
/// evenly over the atom's points).
std::vector<Rational> unit_space_measure(const Mean& m, std::size_t ground_size);

}  // namespace tarski
