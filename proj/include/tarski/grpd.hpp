#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tarski/core.hpp"
#include "tarski/exec.hpp"
#include "tarski/matrix.hpp"
#include "tarski/rational.hpp"

namespace tarski {

struct NotInGroupoid : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotUnitary : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SupportsNotSeparated : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Principal groupoid on {0..n-1}: the equivalence relation with the given
/// blocks. Blocks are kept sorted, in order of their least point.
class FiniteGroupoid {
 public:
  /// Throws std::invalid_argument unless the blocks partition the points.
  FiniteGroupoid(std::size_t n, std::vector<std::vector<int>> blocks);
  static FiniteGroupoid discrete(std::size_t n);
  static FiniteGroupoid transitive(std::size_t n);

  std::size_t size() const { return n_; }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  std::size_t block_of(int x) const { return block_of_[x]; }
  std::size_t arrows() const;
  bool is_minimal() const { return blocks_.size() == 1; }
  /// Every arrow x -> s(x) of s stays in the groupoid.
  bool contains(const PartialBijection& s) const;
  bool is_invariant(const std::vector<int>& u) const;
  /// G restricted to U, relabelled along sorted U.
  FiniteGroupoid restrict_to(std::vector<int> u) const;
  /// Points listed block by block: the basis order of block matrices.
  std::vector<int> basis_order() const;

 private:
  std::size_t n_;
  std::vector<std::vector<int>> blocks_;
  std::vector<std::size_t> block_of_;
};

struct GroupData {
  std::vector<PartialBijection> generators;
  BigInt order;
};

/// Product of the symmetric groups on the blocks, generated by adjacent
/// transpositions inside each block.
GroupData full_group(const FiniteGroupoid& g);

struct RigidStabilizer {
  GroupData group;
  BigInt restricted_order;  // |F(G|_U)|
  bool verified = false;
};

/// Elements of the full group acting trivially off U.
RigidStabilizer rigid_stabilizer(const FiniteGroupoid& g, std::vector<int> u);

/// Closure of permutations under composition; throws CapExceeded.
std::vector<PartialBijection> enumerate_group(const std::vector<PartialBijection>& gens, std::size_t cap = 100000);

/// All partial bijections inside the groupoid (its bisection monoid).
std::vector<PartialBijection> bisections(const FiniteGroupoid& g, std::size_t cap = 200000);

struct GermResult {
  FiniteGroupoid groupoid;
  bool piecewise_factorisable = false;
  std::size_t checked = 0;
};

/// Orbit relation of the action; every bisection is decomposed as a join
/// of restrictions of group elements and the join is rechecked.
GermResult germ_groupoid(std::size_t n, const std::vector<PartialBijection>& gens);

/// st with t applied first.
PartialBijection product(const PartialBijection& s, const PartialBijection& t);

/// e_x -> e_{s(x)}.
RatMatrix partial_permutation_matrix(const PartialBijection& s);

/// lambda(s) delta_t = delta_{st} when tt* <= s*s, else 0. Indexed like S.
std::vector<RatMatrix> left_regular_monoid(const FiniteInverseMonoid& s);

struct RepCheck {
  std::size_t pairs_checked = 0;
  std::size_t multiplicative_failures = 0;
  std::size_t star_failures = 0;
  bool idempotents_project = true;
  bool units_unitary = true;

  bool ok() const { return multiplicative_failures == 0 && star_failures == 0 && idempotents_project && units_unitary; }
};

/// Checks images[i] images[j] = images[index of product] over all pairs, and
/// images[s*] = adjoint of images[s] for the inner product with Gram matrix
/// `gram`.
RepCheck check_rep(const FiniteInverseMonoid& s, const std::vector<RatMatrix>& images, const RatMatrix& gram,
                   Exec exec = Exec::Parallel);

struct OrbitBlock {
  std::size_t representative = 0;
  std::vector<std::size_t> members;
  std::vector<std::size_t> stabilizer;  // unit indices fixing the representative
  std::size_t idempotent = 0;           // t t* of the representative
  bool permutation_isomorphic = false;  // u U_e -> u t is an equivariant bijection
};

struct IdempotentClass {
  std::size_t idempotent = 0;  // representative under conjugation by units
  std::size_t multiplicity = 0;
  std::vector<std::size_t> stabilizer;
};

struct DecompositionReport {
  std::vector<std::size_t> units;
  std::vector<OrbitBlock> orbits;  // orbits of t -> ut
  std::vector<IdempotentClass> classes;
  std::vector<long> character_res, character_sum;  // per unit
  bool characters_equal = false;
};

/// Restriction of the left regular representation to the unit group, split
/// into orbits and compared with the quasi-regular representations.
DecompositionReport restriction_decomposition(const FiniteInverseMonoid& s);

/// Representation of the units of S, unitary for the Gram matrix.
struct UnitRep {
  std::vector<std::size_t> units;
  std::vector<RatMatrix> matrices;
  RatMatrix gram;

  std::size_t dim() const { return gram.rows(); }
};

UnitRep trivial_unit_rep(const FiniteInverseMonoid& s);
UnitRep sign_unit_rep(const FiniteInverseMonoid& s);
/// The permutation action of the units on the support of the identity,
/// restricted to the sum-zero vectors, in the basis e_i - e_last.
UnitRep standard_unit_rep(const FiniteInverseMonoid& s);

struct Induced {
  std::vector<RatMatrix> images;  // per element of S
  RatMatrix gram;
  std::size_t dim = 0;
  /// dim Hom_U(pi, Res Ind pi).
  std::size_t multiplicity = 0;
  RepCheck check;
};

/// Functions f with f(su) = pi(u)^-1 f(s), one coordinate block per right
/// orbit; (Ind(s) f)(x) = f(s* x) when xx* <= ss*, else 0. Throws
/// NotUnitary when pi is not a unitary representation of the units.
Induced induce(const FiniteInverseMonoid& s, const UnitRep& pi);

/// Koopman operator of a bisection in the basis delta_x: entry
/// sqrt(mu(x) / mu(s(x))) at (s(x), x). Entries are kept as their squares,
/// which makes products and adjoints exact.
class KoopmanMatrix {
 public:
  KoopmanMatrix(std::size_t n, std::vector<int> target, std::vector<Rational> squared);

  std::size_t size() const { return target_.size(); }
  int target(std::size_t col) const { return target_[col]; }
  const Rational& squared(std::size_t col) const { return squared_[col]; }
  /// The matrix when every entry is rational.
  std::optional<RatMatrix> exact() const;
  Eigen::MatrixXd numeric() const;
  bool is_permutation_matrix() const;

  friend KoopmanMatrix operator*(const KoopmanMatrix& a, const KoopmanMatrix& b);
  bool operator==(const KoopmanMatrix&) const = default;

 private:
  std::vector<int> target_;
  std::vector<Rational> squared_;
};

void validate_measure(const std::vector<Rational>& mu, std::size_t n);
bool is_invariant_measure(const FiniteGroupoid& g, const std::vector<Rational>& mu);
KoopmanMatrix koopman(const FiniteGroupoid& g, const std::vector<Rational>& mu, const PartialBijection& s);
/// Adjoint for the inner product sum_x mu(x) f(x) g(x).
KoopmanMatrix koopman_adjoint(const KoopmanMatrix& a, const std::vector<Rational>& mu);
bool is_partial_isometry(const KoopmanMatrix& a, const std::vector<Rational>& mu);

struct TightnessReport {
  std::size_t pairs_checked = 0;
  std::size_t failures = 0;
  bool ok() const { return failures == 0; }
};

/// kappa(e v f) + kappa(e ^ f) = kappa(e) + kappa(f) over all pairs of
/// idempotents (subsets of the points).
TightnessReport koopman_tightness(const FiniteGroupoid& g, const std::vector<Rational>& mu, Exec exec = Exec::Parallel);

/// Block permutation matrix of a bisection in the basis order of the blocks.
RatMatrix groupoid_rep(const FiniteGroupoid& g, const PartialBijection& s);

struct FormalTerm {
  Rational coef;
  PartialBijection element;
};
using FormalElement = std::vector<FormalTerm>;

/// Like terms merged, zero coefficients dropped, sorted by element.
FormalElement normalize(FormalElement a);

struct AlgKernel {
  bool identity_holds = false;  // 1 + pi(g1) pi(g2) = pi(g1) + pi(g2)
  FormalElement formal;         // g1 g2 - g1 - g2 + 1 in the group algebra
  bool formal_nonzero = false;
};

/// Throws SupportsNotSeparated unless no block meets both supports.
AlgKernel algkern_check(const FiniteGroupoid& g, const PartialBijection& g1, const PartialBijection& g2);

/// A representation of the full group as a direct sum of dense blocks.
using BlockRep = std::function<std::vector<Eigen::MatrixXd>(const PartialBijection&)>;

/// Koopman representation in the orthonormal basis delta_x / sqrt(mu(x)).
BlockRep koopman_rep(const FiniteGroupoid& g, const std::vector<Rational>& mu);
/// Restriction of the left regular representation of the bisection monoid
/// to the full group: one block per stabilizer type of the domain orbits.
/// Throws std::invalid_argument past kMaxLambdaDim total dimensions.
inline constexpr std::size_t kMaxLambdaDim = 4096;
BlockRep pi_lambda_rep(const FiniteGroupoid& g);

/// Largest singular value of a in each representation. Throws
/// NotInGroupoid for a term outside the full group.
std::vector<double> norm_compare(const FiniteGroupoid& g, const std::vector<BlockRep>& reps, const FormalElement& a);

}  // namespace tarski
