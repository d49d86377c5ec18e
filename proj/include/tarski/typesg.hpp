#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tarski/bim.hpp"
#include "tarski/exec.hpp"

namespace tarski {

/// Formal sum of clopens: an element of the type semigroup. Summands are
/// sorted and zero summands dropped, so equal multisets compare equal.
class TypeElement {
 public:
  TypeElement() = default;
  explicit TypeElement(std::vector<Clopen> summands);

  const std::vector<Clopen>& summands() const { return summands_; }
  std::size_t size() const { return summands_.size(); }
  bool is_zero() const { return summands_.empty(); }

  auto operator<=>(const TypeElement&) const = default;
  bool operator==(const TypeElement&) const = default;

 private:
  std::vector<Clopen> summands_;
};

std::string to_string(const TypeElement& x);

TypeElement type_add(const TypeElement& x, const TypeElement& y);
/// k copies of x.
TypeElement type_scale(const TypeElement& x, std::size_t k);

/// One block of a witness: an element carrying a piece of summand
/// `source_slot` of the left side onto a piece of summand `target_slot` of
/// the right side.
struct WitnessBlock {
  BimElement element;
  std::size_t source_slot = 0;
  std::size_t target_slot = 0;
};

struct EquivalenceWitness {
  std::vector<WitnessBlock> blocks;
};

enum class Comparison { Equal, Leq, NotLeq, Unknown };
std::string to_string(Comparison c);

struct CompareResult {
  Comparison verdict = Comparison::Unknown;
  std::optional<EquivalenceWitness> witness;
  /// NotLeq is a proof only when exhaustive.
  bool exhaustive = false;
};

/// Decides x <= y in the type semigroup of the instance.
/// Finite backend: exact, by matching the atoms of both sides along
/// D-equivalence. Prefix backend: constructive leaf refinement; `budget`
/// bounds the number of splits.
CompareResult type_compare(const BimInstance& instance, const TypeElement& x, const TypeElement& y,
                           std::size_t budget = 4096);

/// Independent recheck: block sources partition each left summand, block
/// targets are pairwise disjoint inside each right summand (and cover it
/// when `equal`), and every block lies in the instance.
bool recheck_witness(const BimInstance& instance, const TypeElement& x, const TypeElement& y,
                     const EquivalenceWitness& w, bool equal);

/// Witness for x <= z from witnesses for x <= y and y <= z.
EquivalenceWitness compose_witnesses(const EquivalenceWitness& xy, const EquivalenceWitness& yz);

struct PerforationViolation {
  TypeElement x, y;
  std::size_t n = 0;
};

struct PerforationReport {
  std::size_t checked = 0;
  std::size_t unknown = 0;
  std::vector<PerforationViolation> violations;
};

/// Candidate summands for the scan: nonzero idempotent sets (finite) or
/// cylinders of length <= 1 (prefix).
std::vector<Clopen> default_pool(const BimInstance& instance);

/// Checks (n+1)x <= ny  =>  x <= y for all x, y with at most `size_bound`
/// summands from the pool and 1 <= n <= n_max.
PerforationReport almost_unperforated(const BimInstance& instance, std::size_t n_max, std::size_t size_bound,
                                      const std::vector<Clopen>& pool, Exec exec = Exec::Parallel);

}  // namespace tarski
