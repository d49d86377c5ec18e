#include "tarski/grpd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>

namespace tarski {

namespace {

BigInt factorial(std::size_t k) {
  BigInt f = 1;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<unsigned long>(i);
  return f;
}

BigInt rook_number(std::size_t m) {
  BigInt total = 0;
  for (std::size_t k = 0; k <= m; ++k) {
    BigInt c = 1;
    for (std::size_t i = 0; i < k; ++i) {
      c *= static_cast<unsigned long>(m - i);
      c /= static_cast<unsigned long>(i + 1);
    }
    total += c * c * factorial(k);
  }
  return total;
}

std::vector<int> normalize_points(std::vector<int> u, std::size_t n) {
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  for (int x : u)
    if (x < 0 || static_cast<std::size_t>(x) >= n) throw std::invalid_argument("point " + std::to_string(x) + " outside the ground set");
  return u;
}

void require_full_group(const FiniteGroupoid& g, const PartialBijection& s) {
  if (s.ground_size() != g.size() || !s.is_total() || !g.contains(s))
    throw NotInGroupoid(to_string(s) + " is not in the full group");
}

void require_bisection(const FiniteGroupoid& g, const PartialBijection& s) {
  if (s.ground_size() != g.size() || !g.contains(s)) throw NotInGroupoid(to_string(s) + " leaves the groupoid");
}

std::vector<PartialBijection> adjacent_transpositions(std::size_t n, const std::vector<int>& pts) {
  std::vector<PartialBijection> out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    std::vector<int> t(n);
    std::iota(t.begin(), t.end(), 0);
    std::swap(t[pts[i]], t[pts[i + 1]]);
    out.push_back(PartialBijection::permutation(t));
  }
  return out;
}

bool subset_of(const std::vector<int>& a, const PartialBijection& defined) {
  return std::all_of(a.begin(), a.end(), [&](int x) { return defined.defined_at(x); });
}

// Range of a inside range of b.
bool range_leq(const PartialBijection& a, const PartialBijection& b) {
  return subset_of(a.range(), star(b));
}

std::size_t index_or_throw(const FiniteInverseMonoid& s, const PartialBijection& p) {
  auto i = s.index_of(p);
  if (!i) throw std::logic_error("monoid not closed at " + to_string(p));
  return *i;
}

// Basis with an identity submatrix at the pivot rows, so coordinates of a
// vector in the span are read off those rows.
struct SpanBasis {
  RatMatrix b;
  std::vector<std::size_t> pivots;
};

SpanBasis span_basis(const RatMatrix& columns) {
  RatMatrix r = columns.transpose();
  auto piv = row_reduce(r);
  RatMatrix b(columns.rows(), piv.size());
  for (std::size_t j = 0; j < piv.size(); ++j)
    for (std::size_t i = 0; i < columns.rows(); ++i) b(i, j) = r(j, i);
  return {b, piv};
}

RatMatrix coordinates(const SpanBasis& sb, const RatMatrix& v) {
  RatMatrix d(sb.pivots.size(), v.cols());
  for (std::size_t i = 0; i < sb.pivots.size(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) d(i, j) = v(sb.pivots[i], j);
  if (!(sb.b * d == v)) throw std::logic_error("vector outside the fixed subspace");
  return d;
}

double top_singular_value(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

FiniteGroupoid::FiniteGroupoid(std::size_t n, std::vector<std::vector<int>> blocks)
    : n_(n), blocks_(std::move(blocks)), block_of_(n, n) {
  std::size_t seen = 0;
  for (auto& b : blocks_) {
    if (b.empty()) throw std::invalid_argument("empty block");
    std::sort(b.begin(), b.end());
    for (int x : b) {
      if (x < 0 || static_cast<std::size_t>(x) >= n) throw std::invalid_argument("point " + std::to_string(x) + " outside the ground set");
      if (block_of_[x] != n) throw std::invalid_argument("point " + std::to_string(x) + " in two blocks");
      block_of_[x] = 0;
      ++seen;
    }
  }
  if (seen != n) throw std::invalid_argument("blocks do not cover the ground set");
  std::sort(blocks_.begin(), blocks_.end());
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    for (int x : blocks_[i]) block_of_[x] = i;
}

FiniteGroupoid FiniteGroupoid::discrete(std::size_t n) {
  std::vector<std::vector<int>> b;
  for (std::size_t i = 0; i < n; ++i) b.push_back({static_cast<int>(i)});
  return FiniteGroupoid(n, b);
}

FiniteGroupoid FiniteGroupoid::transitive(std::size_t n) {
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  return FiniteGroupoid(n, n ? std::vector<std::vector<int>>{all} : std::vector<std::vector<int>>{});
}

std::size_t FiniteGroupoid::arrows() const {
  std::size_t a = 0;
  for (const auto& b : blocks_) a += b.size() * b.size();
  return a;
}

bool FiniteGroupoid::contains(const PartialBijection& s) const {
  if (s.ground_size() != n_) return false;
  for (std::size_t x = 0; x < n_; ++x)
    if (s.defined_at(x) && block_of_[x] != block_of_[s(x)]) return false;
  return true;
}

bool FiniteGroupoid::is_invariant(const std::vector<int>& u) const {
  auto pts = normalize_points(u, n_);
  std::vector<char> in(n_, 0);
  for (int x : pts) in[x] = 1;
  for (int x : pts)
    for (int y : blocks_[block_of_[x]])
      if (!in[y]) return false;
  return true;
}

FiniteGroupoid FiniteGroupoid::restrict_to(std::vector<int> u) const {
  u = normalize_points(std::move(u), n_);
  std::vector<int> label(n_, -1);
  for (std::size_t i = 0; i < u.size(); ++i) label[u[i]] = static_cast<int>(i);
  std::vector<std::vector<int>> blocks;
  for (const auto& b : blocks_) {
    std::vector<int> nb;
    for (int x : b)
      if (label[x] >= 0) nb.push_back(label[x]);
    if (!nb.empty()) blocks.push_back(nb);
  }
  return FiniteGroupoid(u.size(), blocks);
}

std::vector<int> FiniteGroupoid::basis_order() const {
  std::vector<int> out;
  for (const auto& b : blocks_) out.insert(out.end(), b.begin(), b.end());
  return out;
}

GroupData full_group(const FiniteGroupoid& g) {
  GroupData d{{}, 1};
  for (const auto& b : g.blocks()) {
    auto t = adjacent_transpositions(g.size(), b);
    d.generators.insert(d.generators.end(), t.begin(), t.end());
    d.order *= factorial(b.size());
  }
  return d;
}

RigidStabilizer rigid_stabilizer(const FiniteGroupoid& g, std::vector<int> u) {
  u = normalize_points(std::move(u), g.size());
  std::vector<char> in(g.size(), 0);
  for (int x : u) in[x] = 1;
  RigidStabilizer r{{{}, 1}, 0, false};
  for (const auto& b : g.blocks()) {
    std::vector<int> part;
    for (int x : b)
      if (in[x]) part.push_back(x);
    auto t = adjacent_transpositions(g.size(), part);
    r.group.generators.insert(r.group.generators.end(), t.begin(), t.end());
    r.group.order *= factorial(part.size());
  }
  r.restricted_order = full_group(g.restrict_to(u)).order;
  bool trivial_off_u = std::all_of(r.group.generators.begin(), r.group.generators.end(), [&](const PartialBijection& p) {
    for (std::size_t x = 0; x < g.size(); ++x)
      if (!in[x] && p(x) != static_cast<int>(x)) return false;
    return g.contains(p);
  });
  bool orders = r.group.order == r.restricted_order;
  if (orders && r.restricted_order <= 40320) {
    auto elems = enumerate_group(r.group.generators.empty() ? std::vector<PartialBijection>{PartialBijection::identity(g.size())}
                                                            : r.group.generators);
    orders = BigInt(static_cast<unsigned long>(elems.size())) == r.restricted_order;
  }
  r.verified = trivial_off_u && orders;
  return r;
}

std::vector<PartialBijection> enumerate_group(const std::vector<PartialBijection>& gens, std::size_t cap) {
  if (gens.empty()) throw std::invalid_argument("no generators");
  const std::size_t n = gens[0].ground_size();
  for (const auto& p : gens)
    if (p.ground_size() != n || !p.is_total()) throw std::invalid_argument("generator " + to_string(p) + " is not a permutation");
  std::set<PartialBijection> seen{PartialBijection::identity(n)};
  std::vector<PartialBijection> frontier{PartialBijection::identity(n)};
  while (!frontier.empty()) {
    std::vector<PartialBijection> next;
    for (const auto& x : frontier)
      for (const auto& s : gens) {
        auto y = compose(x, s);
        if (seen.insert(y).second) {
          if (seen.size() > cap) throw CapExceeded(cap);
          next.push_back(y);
        }
      }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

std::vector<PartialBijection> bisections(const FiniteGroupoid& g, std::size_t cap) {
  BigInt count = 1;
  for (const auto& b : g.blocks()) count *= rook_number(b.size());
  if (count > BigInt(static_cast<unsigned long>(cap))) throw CapExceeded(cap);
  const std::size_t n = g.size();
  std::vector<PartialBijection> out;
  std::vector<int> table(n, -1);
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self, std::size_t x) -> void {
    if (x == n) {
      std::vector<int> dom, img;
      for (std::size_t i = 0; i < n; ++i)
        if (table[i] >= 0) {
          dom.push_back(static_cast<int>(i));
          img.push_back(table[i]);
        }
      out.push_back(PartialBijection::from_pairs(n, dom, img));
      return;
    }
    table[x] = -1;
    self(self, x + 1);
    for (int y : g.blocks()[g.block_of(static_cast<int>(x))]) {
      if (used[y]) continue;
      used[y] = 1;
      table[x] = y;
      self(self, x + 1);
      used[y] = 0;
    }
    table[x] = -1;
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  return out;
}

GermResult germ_groupoid(std::size_t n, const std::vector<PartialBijection>& gens) {
  for (const auto& p : gens)
    if (p.ground_size() != n || !p.is_total()) throw std::invalid_argument("generator " + to_string(p) + " is not a bijection");
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& p : gens)
    for (std::size_t x = 0; x < n; ++x) parent[find(static_cast<int>(x))] = find(p(x));
  std::map<int, std::vector<int>> orbit;
  for (std::size_t x = 0; x < n; ++x) orbit[find(static_cast<int>(x))].push_back(static_cast<int>(x));
  std::vector<std::vector<int>> blocks;
  for (auto& [root, pts] : orbit) blocks.push_back(pts);
  GermResult r{FiniteGroupoid(n, blocks), true, 0};

  auto group = enumerate_group(gens.empty() ? std::vector<PartialBijection>{PartialBijection::identity(n)} : gens);
  for (const auto& a : bisections(r.groupoid)) {
    std::map<std::size_t, std::vector<int>> pieces;
    for (int x : a.domain()) {
      auto it = std::find_if(group.begin(), group.end(), [&](const PartialBijection& g) { return g(x) == a(x); });
      if (it == group.end()) {
        r.piecewise_factorisable = false;
        break;
      }
      pieces[static_cast<std::size_t>(it - group.begin())].push_back(x);
    }
    std::vector<PartialBijection> parts{PartialBijection(n)};
    for (const auto& [gi, pts] : pieces) parts.push_back(group[gi].restrict_to(PartialBijection::identity_on(n, pts)));
    if (join(parts) != a) r.piecewise_factorisable = false;
    ++r.checked;
  }
  return r;
}

PartialBijection product(const PartialBijection& s, const PartialBijection& t) { return compose(t, s); }

RatMatrix partial_permutation_matrix(const PartialBijection& s) {
  RatMatrix m(s.ground_size(), s.ground_size());
  for (std::size_t x = 0; x < s.ground_size(); ++x)
    if (s.defined_at(x)) m(s(x), x) = 1;
  return m;
}

std::vector<RatMatrix> left_regular_monoid(const FiniteInverseMonoid& s) {
  const std::size_t n = s.size();
  auto table = s.multiplication_table();
  std::vector<RatMatrix> out(n, RatMatrix(n, n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < n; ++t)
      if (subset_of(s[t].range(), s[i])) out[i](table[t][i], t) = 1;
  return out;
}

RepCheck check_rep(const FiniteInverseMonoid& s, const std::vector<RatMatrix>& images, const RatMatrix& gram, Exec exec) {
  const std::size_t n = s.size();
  if (images.size() != n) throw std::invalid_argument("one image per element expected");
  for (const auto& m : images)
    if (m.rows() != gram.rows() || m.cols() != gram.rows()) throw std::invalid_argument("image of the wrong size");
  auto table = s.multiplication_table();
  RepCheck r;
  r.pairs_checked = n * n;
  std::vector<char> bad(n * n, 0), bad_star(n, 0), bad_idem(n, 0), bad_unit(n, 0);
  for_each_index(n * n, exec, [&](std::size_t k) {
    std::size_t i = k / n, j = k % n;
    bad[k] = !(images[i] * images[j] == images[table[j][i]]);
  });
  auto units = s.units();
  std::vector<char> is_unit(n, 0);
  for (auto u : units) is_unit[u] = 1;
  for_each_index(n, exec, [&](std::size_t i) {
    std::size_t si = index_or_throw(s, star(s[i]));
    const RatMatrix& m = images[i];
    RatMatrix mt = m.transpose();
    bad_star[i] = !(gram * images[si] == mt * gram);
    if (s[i].is_idempotent()) bad_idem[i] = !(m * m == m && gram * m == mt * gram);
    if (is_unit[i]) bad_unit[i] = !(mt * gram * m == gram);
  });
  for (char b : bad) r.multiplicative_failures += b;
  for (char b : bad_star) r.star_failures += b;
  r.idempotents_project = std::none_of(bad_idem.begin(), bad_idem.end(), [](char c) { return c; });
  r.units_unitary = std::none_of(bad_unit.begin(), bad_unit.end(), [](char c) { return c; });
  return r;
}

DecompositionReport restriction_decomposition(const FiniteInverseMonoid& s) {
  DecompositionReport rep;
  rep.units = s.units();
  if (rep.units.empty()) throw std::invalid_argument("monoid has no identity");
  const auto& units = rep.units;
  auto table = s.multiplication_table();
  const std::size_t n = s.size();

  auto stabilizer_of_idempotent = [&](std::size_t e) {
    std::vector<std::size_t> st;
    for (auto u : units)
      if (table[e][u] == e) st.push_back(u);
    return st;
  };
  auto class_rep = [&](std::size_t e) {
    std::size_t best = e;
    for (auto u : units) best = std::min(best, index_or_throw(s, compose(compose(star(s[u]), s[e]), s[u])));
    return best;
  };
  // #{cosets v U_e fixed by u}
  auto quasi_regular_character = [&](std::size_t e, std::size_t u, std::size_t stab) {
    long fixed = 0;
    for (auto v : units) {
      auto w = index_or_throw(s, compose(compose(s[v], s[u]), star(s[v])));
      if (table[e][w] == e) ++fixed;
    }
    return fixed / static_cast<long>(stab);
  };

  std::vector<char> seen(n, 0);
  std::map<std::size_t, std::size_t> class_index;
  for (std::size_t t = 0; t < n; ++t) {
    if (seen[t]) continue;
    OrbitBlock ob;
    ob.representative = t;
    std::set<std::size_t> members;
    for (auto u : units) {
      members.insert(table[t][u]);
      if (table[t][u] == t) ob.stabilizer.push_back(u);
    }
    ob.members.assign(members.begin(), members.end());
    for (auto m : ob.members) seen[m] = 1;
    ob.idempotent = index_or_throw(s, s[t].ran_idempotent());
    ob.permutation_isomorphic = ob.members.size() * ob.stabilizer.size() == units.size() &&
                                ob.stabilizer == stabilizer_of_idempotent(ob.idempotent);
    auto c = class_rep(ob.idempotent);
    auto [it, fresh] = class_index.emplace(c, rep.classes.size());
    if (fresh) rep.classes.push_back({c, 0, stabilizer_of_idempotent(c)});
    ++rep.classes[it->second].multiplicity;
    rep.orbits.push_back(std::move(ob));
  }

  rep.character_res.assign(units.size(), 0);
  rep.character_sum.assign(units.size(), 0);
  for (std::size_t k = 0; k < units.size(); ++k) {
    for (std::size_t t = 0; t < n; ++t)
      if (table[t][units[k]] == t) ++rep.character_res[k];
    for (const auto& ob : rep.orbits)
      rep.character_sum[k] += quasi_regular_character(ob.idempotent, units[k], stabilizer_of_idempotent(ob.idempotent).size());
  }
  rep.characters_equal = rep.character_res == rep.character_sum &&
                         std::all_of(rep.orbits.begin(), rep.orbits.end(), [](const OrbitBlock& o) { return o.permutation_isomorphic; });
  return rep;
}

namespace {

std::vector<int> identity_support(const FiniteInverseMonoid& s) {
  auto id = s.identity();
  if (!id) throw std::invalid_argument("monoid has no identity");
  return s[*id].domain();
}

}  // namespace

UnitRep trivial_unit_rep(const FiniteInverseMonoid& s) {
  UnitRep r{s.units(), {}, RatMatrix::identity(1)};
  if (r.units.empty()) throw std::invalid_argument("monoid has no identity");
  r.matrices.assign(r.units.size(), RatMatrix::identity(1));
  return r;
}

UnitRep sign_unit_rep(const FiniteInverseMonoid& s) {
  UnitRep r = trivial_unit_rep(s);
  auto pts = identity_support(s);
  for (std::size_t k = 0; k < r.units.size(); ++k) {
    const auto& u = s[r.units[k]];
    std::vector<char> done(s.ground_size(), 0);
    bool odd = false;
    for (int x : pts) {
      if (done[x]) continue;
      std::size_t len = 0;
      for (int y = x; !done[y]; y = u(y)) {
        done[y] = 1;
        ++len;
      }
      if (len % 2 == 0) odd = !odd;
    }
    r.matrices[k](0, 0) = odd ? -1 : 1;
  }
  return r;
}

UnitRep standard_unit_rep(const FiniteInverseMonoid& s) {
  auto pts = identity_support(s);
  if (pts.size() < 2) throw std::invalid_argument("standard representation needs at least two points");
  const std::size_t k = pts.size(), d = k - 1;
  std::vector<int> pos(s.ground_size(), -1);
  for (std::size_t i = 0; i < k; ++i) pos[pts[i]] = static_cast<int>(i);
  UnitRep r{s.units(), {}, RatMatrix(d, d)};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) r.gram(i, j) = i == j ? 2 : 1;
  for (auto ui : r.units) {
    const auto& u = s[ui];
    RatMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      // u(e_i - e_last) = e_{u i} - e_{u last}; coordinates are the first d entries
      std::vector<Rational> w(k);
      w[pos[u(pts[i])]] += 1;
      w[pos[u(pts[d])]] -= 1;
      for (std::size_t j = 0; j < d; ++j) m(j, i) = w[j];
    }
    r.matrices.push_back(m);
  }
  return r;
}

Induced induce(const FiniteInverseMonoid& s, const UnitRep& pi) {
  auto units = s.units();
  if (units.empty()) throw std::invalid_argument("monoid has no identity");
  if (pi.units != units || pi.matrices.size() != units.size()) throw NotUnitary("representation is not indexed by the unit group");
  const std::size_t h = pi.dim();
  std::map<std::size_t, std::size_t> unit_pos;
  for (std::size_t k = 0; k < units.size(); ++k) unit_pos[units[k]] = k;
  auto table = s.multiplication_table();
  if (!(pi.gram.transpose() == pi.gram)) throw NotUnitary("Gram matrix is not symmetric");
  for (std::size_t a = 0; a < units.size(); ++a) {
    const auto& m = pi.matrices[a];
    if (m.rows() != h || m.cols() != h) throw NotUnitary("matrix of the wrong size");
    if (!(m.transpose() * pi.gram * m == pi.gram)) throw NotUnitary("pi(" + to_string(s[units[a]]) + ") is not unitary");
    for (std::size_t b = 0; b < units.size(); ++b)
      if (!(m * pi.matrices[b] == pi.matrices[unit_pos.at(table[units[b]][units[a]])]))
        throw NotUnitary("pi is not multiplicative");
  }
  const RatMatrix id_h = RatMatrix::identity(h);
  auto pi_inv = [&](std::size_t u) -> const RatMatrix& { return pi.matrices[unit_pos.at(index_or_throw(s, star(s[u])))]; };

  // right orbits x U; x = rep * via
  const std::size_t n = s.size();
  std::vector<std::size_t> orbit_of(n, n), via(n, 0), reps, sizes;
  std::vector<SpanBasis> basis;
  for (std::size_t x = 0; x < n; ++x) {
    if (orbit_of[x] != n) continue;
    std::size_t o = reps.size();
    reps.push_back(x);
    sizes.push_back(0);
    std::vector<std::size_t> stab;
    for (auto u : units) {
      std::size_t y = table[u][x];
      if (y == x) stab.push_back(u);
      if (orbit_of[y] == n) {
        orbit_of[y] = o;
        via[y] = u;
        ++sizes[o];
      }
    }
    RatMatrix stacked(stab.size() * h, h);
    for (std::size_t k = 0; k < stab.size(); ++k) {
      RatMatrix d = pi.matrices[unit_pos.at(stab[k])] - id_h;
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < h; ++j) stacked(k * h + i, j) = d(i, j);
    }
    basis.push_back(span_basis(nullspace(stacked)));
  }
  std::vector<std::size_t> offset(reps.size() + 1, 0);
  for (std::size_t o = 0; o < reps.size(); ++o) offset[o + 1] = offset[o] + basis[o].b.cols();

  Induced out;
  out.dim = offset.back();
  std::vector<RatMatrix> grams;
  for (std::size_t o = 0; o < reps.size(); ++o)
    grams.push_back(Rational(static_cast<long>(sizes[o])) * (basis[o].b.transpose() * pi.gram * basis[o].b));
  out.gram = grams.empty() ? RatMatrix() : direct_sum(grams);

  out.images.assign(n, RatMatrix(out.dim, out.dim));
  for (std::size_t si = 0; si < n; ++si) {
    const auto& sv = s[si];
    PartialBijection ss = star(sv);
    for (std::size_t o = 0; o < reps.size(); ++o) {
      const auto& r = s[reps[o]];
      if (!range_leq(r, sv) || basis[o].b.cols() == 0) continue;
      std::size_t y = index_or_throw(s, compose(r, ss));
      std::size_t o2 = orbit_of[y];
      if (basis[o2].b.cols() == 0) continue;
      // f(y) = f(rep u) = pi(u)^-1 f(rep)
      RatMatrix block = coordinates(basis[o], pi_inv(via[y]) * basis[o2].b);
      for (std::size_t i = 0; i < block.rows(); ++i)
        for (std::size_t j = 0; j < block.cols(); ++j) out.images[si](offset[o] + i, offset[o2] + j) = block(i, j);
    }
  }
  out.check = check_rep(s, out.images, out.gram);

  // T with Ind(u) T = T pi(u) for every unit
  const std::size_t vars = out.dim * h;
  RatMatrix eq(units.size() * vars, vars);
  for (std::size_t k = 0; k < units.size(); ++k) {
    const auto& a = out.images[units[k]];
    const auto& p = pi.matrices[k];
    for (std::size_t i = 0; i < out.dim; ++i)
      for (std::size_t j = 0; j < h; ++j) {
        std::size_t row = k * vars + i * h + j;
        for (std::size_t m = 0; m < out.dim; ++m) eq(row, m * h + j) += a(i, m);
        for (std::size_t m = 0; m < h; ++m) eq(row, i * h + m) -= p(m, j);
      }
  }
  out.multiplicity = vars == 0 ? 0 : nullspace(eq).cols();
  return out;
}

KoopmanMatrix::KoopmanMatrix(std::size_t n, std::vector<int> target, std::vector<Rational> squared)
    : target_(std::move(target)), squared_(std::move(squared)) {
  if (target_.size() != n || squared_.size() != n) throw std::invalid_argument("one entry per column expected");
  std::vector<char> hit(n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    int t = target_[c];
    if (t < 0) {
      squared_[c] = 0;
      continue;
    }
    if (static_cast<std::size_t>(t) >= n || hit[t]) throw std::invalid_argument("not a monomial partial matrix");
    if (sgn(squared_[c]) <= 0) throw std::invalid_argument("entries must be positive");
    hit[t] = 1;
  }
}

std::optional<RatMatrix> KoopmanMatrix::exact() const {
  RatMatrix m(size(), size());
  for (std::size_t c = 0; c < size(); ++c) {
    if (target_[c] < 0) continue;
    Rational root;
    if (!rational_sqrt(squared_[c], root)) return std::nullopt;
    m(target_[c], c) = root;
  }
  return m;
}

Eigen::MatrixXd KoopmanMatrix::numeric() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size(), size());
  for (std::size_t c = 0; c < size(); ++c)
    if (target_[c] >= 0) m(target_[c], c) = std::sqrt(squared_[c].get_d());
  return m;
}

bool KoopmanMatrix::is_permutation_matrix() const {
  for (std::size_t c = 0; c < size(); ++c)
    if (target_[c] < 0 || squared_[c] != 1) return false;
  return true;
}

KoopmanMatrix operator*(const KoopmanMatrix& a, const KoopmanMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("matrix product: sizes differ");
  std::vector<int> t(a.size(), -1);
  std::vector<Rational> sq(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) {
    int y = b.target_[c];
    if (y < 0 || a.target_[y] < 0) continue;
    t[c] = a.target_[y];
    sq[c] = b.squared_[c] * a.squared_[y];
  }
  return KoopmanMatrix(a.size(), t, sq);
}

void validate_measure(const std::vector<Rational>& mu, std::size_t n) {
  if (mu.size() != n) throw std::invalid_argument("one weight per point expected");
  for (std::size_t x = 0; x < n; ++x)
    if (sgn(mu[x]) <= 0) throw std::invalid_argument("weight of point " + std::to_string(x) + " is not positive");
}

bool is_invariant_measure(const FiniteGroupoid& g, const std::vector<Rational>& mu) {
  validate_measure(mu, g.size());
  for (const auto& b : g.blocks())
    for (int x : b)
      if (mu[x] != mu[b[0]]) return false;
  return true;
}

KoopmanMatrix koopman(const FiniteGroupoid& g, const std::vector<Rational>& mu, const PartialBijection& s) {
  validate_measure(mu, g.size());
  require_bisection(g, s);
  std::vector<int> t(g.size(), -1);
  std::vector<Rational> sq(g.size());
  for (std::size_t x = 0; x < g.size(); ++x)
    if (s.defined_at(x)) {
      t[x] = s(x);
      sq[x] = mu[x] / mu[s(x)];
    }
  return KoopmanMatrix(g.size(), t, sq);
}

KoopmanMatrix koopman_adjoint(const KoopmanMatrix& a, const std::vector<Rational>& mu) {
  validate_measure(mu, a.size());
  std::vector<int> t(a.size(), -1);
  std::vector<Rational> sq(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) {
    int y = a.target(c);
    if (y < 0) continue;
    // entry of M^-1 A^T M at (c, y): a * mu(y) / mu(c)
    Rational w = mu[y] / mu[c];
    t[y] = static_cast<int>(c);
    sq[y] = a.squared(c) * w * w;
  }
  return KoopmanMatrix(a.size(), t, sq);
}

bool is_partial_isometry(const KoopmanMatrix& a, const std::vector<Rational>& mu) {
  auto p = koopman_adjoint(a, mu) * a;
  for (std::size_t c = 0; c < p.size(); ++c)
    if (p.target(c) >= 0 && (p.target(c) != static_cast<int>(c) || p.squared(c) != 1)) return false;
  return true;
}

TightnessReport koopman_tightness(const FiniteGroupoid& g, const std::vector<Rational>& mu, Exec exec) {
  validate_measure(mu, g.size());
  const std::size_t n = g.size();
  if (n > 8) throw std::invalid_argument("tightness is checked exhaustively on at most 8 points");
  const std::size_t m = std::size_t{1} << n;
  std::vector<RatMatrix> kappa(m);
  for (std::size_t e = 0; e < m; ++e) {
    std::vector<int> pts;
    for (std::size_t x = 0; x < n; ++x)
      if (e >> x & 1) pts.push_back(static_cast<int>(x));
    kappa[e] = *koopman(g, mu, PartialBijection::identity_on(n, pts)).exact();
  }
  std::vector<char> bad(m * m, 0);
  for_each_index(m * m, exec, [&](std::size_t k) {
    std::size_t e = k / m, f = k % m;
    bad[k] = !(kappa[e | f] + kappa[e & f] == kappa[e] + kappa[f]);
  });
  TightnessReport r;
  r.pairs_checked = m * m;
  for (char b : bad) r.failures += b;
  return r;
}

RatMatrix groupoid_rep(const FiniteGroupoid& g, const PartialBijection& s) {
  require_bisection(g, s);
  auto order = g.basis_order();
  std::vector<std::size_t> pos(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  RatMatrix m(g.size(), g.size());
  for (std::size_t x = 0; x < g.size(); ++x)
    if (s.defined_at(x)) m(pos[s(x)], pos[x]) = 1;
  return m;
}

FormalElement normalize(FormalElement a) {
  std::map<PartialBijection, Rational> acc;
  for (auto& t : a) acc[t.element] += t.coef;
  FormalElement out;
  for (auto& [e, c] : acc) {
    c.canonicalize();
    if (sgn(c) != 0) out.push_back({c, e});
  }
  return out;
}

AlgKernel algkern_check(const FiniteGroupoid& g, const PartialBijection& g1, const PartialBijection& g2) {
  require_full_group(g, g1);
  require_full_group(g, g2);
  std::vector<char> meets1(g.blocks().size(), 0), meets2(g.blocks().size(), 0);
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (g1(x) != static_cast<int>(x)) meets1[g.block_of(static_cast<int>(x))] = 1;
    if (g2(x) != static_cast<int>(x)) meets2[g.block_of(static_cast<int>(x))] = 1;
  }
  for (std::size_t b = 0; b < meets1.size(); ++b)
    if (meets1[b] && meets2[b]) throw SupportsNotSeparated("block " + std::to_string(b) + " meets both supports");
  const auto id = PartialBijection::identity(g.size());
  RatMatrix p1 = groupoid_rep(g, g1), p2 = groupoid_rep(g, g2), one = groupoid_rep(g, id);
  AlgKernel k;
  k.identity_holds = one + p1 * p2 == p1 + p2;
  k.formal = normalize({{1, product(g1, g2)}, {-1, g1}, {-1, g2}, {1, id}});
  k.formal_nonzero = !k.formal.empty();
  return k;
}

BlockRep koopman_rep(const FiniteGroupoid& g, const std::vector<Rational>& mu) {
  validate_measure(mu, g.size());
  return [n = g.size()](const PartialBijection& s) {
    // delta_x / sqrt(mu(x)) is carried to delta_{s(x)} / sqrt(mu(s(x)))
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t x = 0; x < n; ++x)
      if (s.defined_at(x)) m(s(x), x) = 1.0;
    return std::vector<Eigen::MatrixXd>{m};
  };
}

BlockRep pi_lambda_rep(const FiniteGroupoid& g) {
  // The orbit of a bisection t under t -> g t is the set of block-respecting
  // injections of its domain, which up to isomorphism depends only on how
  // many points the domain has in each block; |b|-1 and |b| points give
  // the same representation.
  struct Orbit {
    std::vector<std::vector<int>> tuples;
    std::map<std::vector<int>, std::size_t> index;
  };
  auto orbits = std::make_shared<std::vector<Orbit>>();
  const auto& blocks = g.blocks();
  std::vector<std::size_t> counts(blocks.size(), 0);
  auto next_count = [&](std::size_t b, std::size_t c) {
    ++c;
    if (c + 1 == blocks[b].size()) ++c;
    return c;
  };
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (blocks[b].size() == 1) counts[b] = 1;
  std::size_t total = 0;
  while (true) {
    std::size_t dim = 1;
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (std::size_t k = 0; k < counts[b]; ++k) dim *= blocks[b].size() - k;
    total += dim;
    if (total > kMaxLambdaDim) throw std::invalid_argument("pi_lambda needs more than " + std::to_string(kMaxLambdaDim) + " dimensions");
    Orbit o;
    std::vector<int> cur;
    std::vector<char> used(g.size(), 0);
    auto rec = [&](auto&& self, std::size_t b, std::size_t k) -> void {
      if (b == blocks.size()) {
        o.index.emplace(cur, o.tuples.size());
        o.tuples.push_back(cur);
        return;
      }
      if (k == counts[b]) return self(self, b + 1, 0);
      for (int y : blocks[b]) {
        if (used[y]) continue;
        used[y] = 1;
        cur.push_back(y);
        self(self, b, k + 1);
        cur.pop_back();
        used[y] = 0;
      }
    };
    rec(rec, 0, 0);
    orbits->push_back(std::move(o));
    std::size_t b = 0;
    for (; b < blocks.size(); ++b) {
      std::size_t c = next_count(b, counts[b]);
      if (c <= blocks[b].size()) {
        counts[b] = c;
        break;
      }
      counts[b] = blocks[b].size() == 1 ? 1 : 0;
    }
    if (b == blocks.size()) break;
  }
  return [orbits](const PartialBijection& s) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& o : *orbits) {
      const auto d = o.tuples.size();
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
      for (std::size_t i = 0; i < d; ++i) {
        std::vector<int> img;
        for (int y : o.tuples[i]) {
          if (!s.defined_at(y)) break;
          img.push_back(s(y));
        }
        if (img.size() == o.tuples[i].size()) m(o.index.at(img), i) = 1.0;
      }
      out.push_back(std::move(m));
    }
    return out;
  };
}

std::vector<double> norm_compare(const FiniteGroupoid& g, const std::vector<BlockRep>& reps, const FormalElement& a) {
  for (const auto& t : a) require_full_group(g, t.element);
  const auto id = PartialBijection::identity(g.size());
  std::vector<double> out;
  for (const auto& rep : reps) {
    auto sum = rep(id);
    for (auto& m : sum) m.setZero();
    for (const auto& t : a) {
      auto mats = rep(t.element);
      if (mats.size() != sum.size()) throw std::logic_error("representation changed shape");
      const double c = t.coef.get_d();
      for (std::size_t k = 0; k < mats.size(); ++k) sum[k] += c * mats[k];
    }
    double norm = 0.0;
    for (const auto& m : sum) norm = std::max(norm, top_singular_value(m));
    out.push_back(norm);
  }
  return out;
}

}  // namespace tarski
