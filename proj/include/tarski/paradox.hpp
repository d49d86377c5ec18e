#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tarski/bim.hpp"
#include "tarski/matrix.hpp"
#include "tarski/typesg.hpp"

namespace tarski {

/// k elements with common source `base`, ranges pairwise disjoint and
/// inside `base`.
struct TarskiMatrix {
  Clopen base;
  std::vector<BimElement> entries;

  std::size_t degree() const { return entries.size(); }
};

struct TarskiCheck {
  bool degree_ok = false;        // k >= 2
  bool base_nonzero = false;
  bool sources_ok = false;       // every entry has source = base
  bool ranges_inside = false;    // every range <= base
  bool ranges_disjoint = false;  // ranges pairwise orthogonal
  std::vector<std::string> failures;

  bool ok() const { return degree_ok && base_nonzero && sources_ok && ranges_inside && ranges_disjoint; }
};

/// Exact check of every axiom; throws BackendMismatch on mixed input.
TarskiCheck check_tarski(const TarskiMatrix& t);

struct TarskiSearch {
  std::optional<TarskiMatrix> matrix;
  /// "None" is a proof only when exhaustive.
  bool exhaustive = true;
  std::size_t nodes = 0;
};

/// Prefix backend: splits e into `degree` pieces of e's class and maps e
/// onto each with d_witness. Finite backend: backtracking over the
/// instance monoid, at most `budget` search nodes.
TarskiSearch find_tarski(const BimInstance& instance, const Clopen& e, std::size_t degree, std::size_t budget = 100000);

struct Normalization {
  std::size_t k = 0, l = 0;
  /// k[e] <= l[e] in the type semigroup.
  CompareResult comparison;
  bool kl_paradoxical = false;
  /// Degree-2 search on e.
  TarskiSearch degree_two;
  /// D = J and almost unperforation were both verified (finite backend,
  /// within the scan bounds); otherwise the (2,1) reduction is unproven.
  bool hypotheses_verified = false;
  bool dj_equal = false;
  bool unperforated_within_bounds = false;
};

/// Reduces (k,l)-paradoxicality of e to a degree-2 Tarski search.
Normalization normalize_paradoxicality(const BimInstance& instance, const Clopen& e, std::size_t k, std::size_t l,
                                       std::size_t budget = 100000);

/// Orbit representation of the eventually-zero sequences of Cantor space
/// (the orbit of 0^inf), restricted to finitely many orbit points. A point
/// w 0^inf is written as w without trailing zeros; "" is 0^inf itself.
class OrbitRep {
 public:
  OrbitRep(int arity, std::vector<Word> points);
  /// Points with words of length <= depth, together with their images
  /// under every map and its inverse.
  static OrbitRep window(int arity, std::size_t depth, const std::vector<PrefixMap>& maps);

  int arity() const { return arity_; }
  std::size_t dim() const { return points_.size(); }
  const std::vector<Word>& points() const { return points_; }
  std::optional<std::size_t> index_of(const Word& point) const;

  /// delta_x -> delta_{s(x)}; throws std::out_of_range when the window
  /// misses an image of one of its own points.
  RatMatrix operator()(const PrefixMap& s) const;
  /// Projection onto the points of length <= depth.
  RatMatrix window_projection(std::size_t depth) const;

 private:
  int arity_;
  std::vector<Word> points_;
};

/// Image of the orbit point w 0^inf under s, or nothing outside dom s.
std::optional<Word> orbit_apply(const PrefixMap& s, const Word& point);

struct ProjectionCheck {
  bool precondition = false;       // check_tarski passed
  bool isometry = false;           // (VP)*(VP) = (P pi(e) P) (x) 1_k
  bool range_projection = false;   // (VP)(VP)* is a projection <= pi(e)
  bool proper = false;             // diag((VP)(VP)*, 0..0) < pi(e) (x) 1_k
  std::size_t window_rank = 0;     // rank of P pi(e) P
  std::size_t dim = 0;

  bool ok() const { return precondition && isometry && range_projection && proper; }
};

/// Exact matrix form of "AA* is an infinite projection" on a finite window
/// of the orbit representation. V is the block row (pi(a_1) ... pi(a_k)).
ProjectionCheck infinite_projection_check(const TarskiMatrix& t, const OrbitRep& rep, std::size_t window_depth);

struct P2Pair {
  BimElement s, t;
  bool tight = false;
  /// Present when the input was not tight: (s, t') with t' mapping the
  /// base onto the complement of ran s.
  std::optional<std::pair<BimElement, BimElement>> tightened;
};

/// (a_1, a_2) as a representation of P_2 on the base; throws
/// std::invalid_argument unless t is a valid degree-2 Tarski matrix, and
/// std::domain_error when tightening is impossible (finite backend).
P2Pair p2_from_tarski(const TarskiMatrix& t);

}  // namespace tarski
