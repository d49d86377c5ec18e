#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tarski/bim.hpp"
#include "tarski/exec.hpp"

namespace tarski {

struct NotComplete : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotTight : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotOrthogonal : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Element of Thompson's group V_n: a prefix map whose domain and range are
/// both the whole Cantor space.
class VElement {
 public:
  /// Throws NotComplete unless both sides cover the unit.
  explicit VElement(PrefixMap m);
  static VElement identity(int arity = 2);
  static VElement from_codes(int arity, const std::vector<Word>& dom, const std::vector<Word>& ran,
                             const std::vector<int>& perm);

  int arity() const { return map_.arity(); }
  const PrefixMap& map() const { return map_; }
  /// Number of leaves of the reduced tree pair.
  std::size_t leaves() const { return map_.pairs().size(); }

  auto operator<=>(const VElement&) const = default;
  bool operator==(const VElement&) const = default;

 private:
  PrefixMap map_;
};

std::string to_string(const VElement& g);

enum class VOp { Multiply, Invert, Identity };

/// Group operations. multiply(g, h) is g h as maps: h first, then g.
VElement multiply(const VElement& g, const VElement& h);
VElement invert(const VElement& g);
/// Multiply takes two operands, Invert one, Identity none (arity 2).
VElement v_op(VOp kind, std::span<const VElement> args);

/// Every reduced element with at most max_leaves leaves, sorted.
std::vector<VElement> enumerate_v(int arity, std::size_t max_leaves);

/// g -> join_i w(v_i) w(u_i)* for the pairs u_i -> v_i of g, where w spells a
/// word in the letters s (0) and t (1).
class VEmbedding {
 public:
  /// Throws NotOrthogonal or NotTight; std::invalid_argument when the
  /// sources differ or are zero.
  VEmbedding(BimElement s, BimElement t);

  const BimElement& s() const { return s_; }
  const BimElement& t() const { return t_; }
  const Clopen& base() const { return base_; }
  BimElement word(const Word& w) const;
  BimElement operator()(const VElement& g) const;

 private:
  BimElement s_, t_;
  Clopen base_;
};

/// Product g h in the target, matching multiply().
BimElement bim_product(const BimElement& g, const BimElement& h);

struct EmbeddingFailure {
  std::size_t i, j;
};

struct EmbeddingReport {
  bool homomorphism_ok = true;
  bool injective_on_test_set = true;
  std::size_t pairs_checked = 0;
  std::vector<EmbeddingFailure> failures;        // image(g_i g_j) != image(g_i) image(g_j)
  std::vector<EmbeddingFailure> collisions;      // distinct g_i, g_j with equal images
};

EmbeddingReport verify_embedding(const VEmbedding& h, const std::vector<VElement>& test_set,
                                 Exec exec = Exec::Parallel);

}  // namespace tarski
