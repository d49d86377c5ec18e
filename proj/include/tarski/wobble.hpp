#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tarski/core.hpp"
#include "tarski/exec.hpp"
#include "tarski/rational.hpp"

namespace tarski {

enum class MetricKind { Path, Grid, Tree, Matrix, CayleyBall };

std::string to_string(MetricKind k);
MetricKind parse_metric_kind(const std::string& s);

/// Points 0..n-1 with an exact metric. Path, grid and tree are graph metrics
/// kept as adjacency lists; Matrix and Cayley balls store the distances.
class FiniteMetricSpace {
 public:
  static FiniteMetricSpace path(std::size_t n);
  /// side x side grid with the L1 (graph) metric; point = row * side + col.
  static FiniteMetricSpace grid(std::size_t side);
  /// Rooted binary tree with levels 0..depth, heap numbering (root 0,
  /// children 2v+1 and 2v+2).
  static FiniteMetricSpace tree(std::size_t depth);
  /// Validates symmetry, zero diagonal, positivity off it and the triangle
  /// inequality; throws std::invalid_argument naming the offending triple.
  static FiniteMetricSpace from_matrix(std::vector<std::vector<Rational>> d);
  /// Ball of the given radius around the identity in the Cayley graph of the
  /// group generated by the permutations (and their inverses), with the word
  /// metric of the whole group. Point 0 is the identity.
  static FiniteMetricSpace cayley_ball(const std::vector<std::vector<int>>& generators, std::size_t radius);

  MetricKind kind() const { return kind_; }
  std::size_t size() const { return n_; }
  Rational distance(int x, int y) const;
  /// Points within distance c of x, sorted.
  std::vector<int> ball(int x, const Rational& c) const;
  /// Sorted union of balls around the set.
  std::vector<int> neighbourhood(const std::vector<int>& set, const Rational& c) const;
  /// Distinguished base point: centre for path and grid, root, identity.
  int base_point() const { return base_; }
  std::vector<std::vector<Rational>> distance_matrix() const;

 private:
  MetricKind kind_ = MetricKind::Path;
  std::size_t n_ = 0, side_ = 0;
  int base_ = 0;
  std::vector<std::vector<int>> adj_;
  std::vector<std::vector<Rational>> matrix_;

  std::vector<int> bfs(int x, std::size_t limit) const;
};

struct DisplacementExceeded : std::invalid_argument {
  int point;
  DisplacementExceeded(int x, const std::string& msg) : std::invalid_argument(msg), point(x) {}
};

struct PartialTranslation {
  PartialBijection pb;
  Rational bound;
  /// max d(x, pb(x)) over the domain.
  Rational tight_bound;
};

PartialTranslation make_translation(const PartialBijection& pb, const FiniteMetricSpace& x, const Rational& c);

/// Total, bijective and c-bounded.
bool wobbling_membership(const PartialBijection& pb, const FiniteMetricSpace& x, const Rational& c);

/// phi(e_i, copy) = targets[2 i + copy], i indexing the sorted set E.
struct Injection {
  std::vector<int> targets;
};

/// Copies (point, copy) whose joint c-neighbourhood is too small.
struct HallViolator {
  std::vector<std::pair<int, int>> copies;
  std::vector<int> neighbourhood;
};

using DoublingCertificate = std::variant<Injection, HallViolator>;

/// Injection of E x {0,1} into N_c(E) with displacement <= c, or a deficient
/// set, via maximum bipartite matching.
DoublingCertificate doubling_certificate(const FiniteMetricSpace& x, std::vector<int> e, const Rational& c);

/// Recheck without the matching: distances for an injection, balls for a
/// violator.
bool recheck_certificate(const FiniteMetricSpace& x, std::vector<int> e, const Rational& c,
                         const DoublingCertificate& cert);

struct ScanFamily {
  MetricKind kind = MetricKind::Path;
  std::vector<std::vector<int>> generators;  // CayleyBall only
};

/// Space and set for one radius: balls around the base point, sized so the
/// c-neighbourhood fits, or for trees the interior of a tree of that depth.
std::pair<FiniteMetricSpace, std::vector<int>> family_member(const ScanFamily& f, std::size_t radius,
                                                             const Rational& c);

struct ScanEntry {
  std::size_t radius = 0;
  std::size_t e_size = 0, n_size = 0;
  Rational ratio;  // |N_c(E)| / |E|
  DoublingCertificate certificate;
  bool rechecked = false;
};

struct ScanReport {
  std::vector<ScanEntry> entries;  // radius order
  std::optional<std::size_t> first_injection, first_violator;
  /// Property A is an input assumption, never computed; without it the scan
  /// is one-directional evidence only.
  bool property_a_assumed = false;
};

ScanReport supramenability_scan(const ScanFamily& f, std::size_t r_min, std::size_t r_max, const Rational& c,
                                bool property_a_assumed = false, Exec exec = Exec::Parallel);

}  // namespace tarski
