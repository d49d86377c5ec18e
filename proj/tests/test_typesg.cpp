#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tarski/matching.hpp"
#include "tarski/typesg.hpp"

using namespace tarski;
using tarski::testing::pb;

namespace {

Clopen fin(std::size_t n, std::vector<int> pts) { return FinSubset(n, std::move(pts)); }
Clopen cyl(const Word& w) { return PrefixCode::cylinder(2, w); }
TypeElement te(std::vector<Clopen> c) { return TypeElement(std::move(c)); }

// Largest matching by trying every left vertex as matched or skipped.
std::size_t brute_matching(const BipartiteGraph& g) {
  std::vector<char> used(g.right, 0);
  auto rec = [&](auto&& self, std::size_t u) -> std::size_t {
    if (u == g.left) return 0;
    std::size_t best = self(self, u + 1);
    for (int v : g.adj[u]) {
      if (used[v]) continue;
      used[v] = 1;
      best = std::max(best, 1 + self(self, u + 1));
      used[v] = 0;
    }
    return best;
  };
  return rec(rec, 0);
}

FiniteInverseMonoid i3() { return generate_monoid(tarski::testing::symmetric_inverse_monoid_generators(3)); }

}  // namespace

TEST_CASE("property: Hopcroft-Karp matches the brute-force optimum and yields Hall violators") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<std::size_t> side(1, 7);
    BipartiteGraph g(side(rng), side(rng));
    std::bernoulli_distribution edge(0.3);
    for (std::size_t u = 0; u < g.left; ++u)
      for (std::size_t v = 0; v < g.right; ++v)
        if (edge(rng)) g.adj[u].push_back(static_cast<int>(v));
    auto m = max_matching(g);
    CHECK(m.size == brute_matching(g));
    for (std::size_t u = 0; u < g.left; ++u)
      if (m.mate_left[u] >= 0) CHECK(m.mate_right[m.mate_left[u]] == static_cast<int>(u));
    if (m.size < g.left) {
      auto s = hall_violator(g, m);
      CHECK(neighbourhood(g, s).size() < s.size());
    }
  }
}

TEST_CASE("type_add") {
  auto x = te({fin(3, {0})}), y = te({fin(3, {1, 2})});
  CHECK(type_add(x, y).summands() == std::vector<Clopen>{fin(3, {0}), fin(3, {1, 2})});
  CHECK(type_add(x, TypeElement()) == x);
  auto u = te({Clopen(PrefixCode::unit(2))});
  CHECK(type_add(u, u).size() == 2);
  CHECK(type_add(x, y) == type_add(y, x));
  CHECK(te({fin(3, {}), fin(3, {1})}).size() == 1);
  CHECK_THROWS_AS(type_add(x, u), BackendMismatch);
}

TEST_CASE("two copies of the unit equal one copy in C(P_2)") {
  auto cp2 = BimInstance::polycyclic(2);
  auto u = Clopen(PrefixCode::unit(2));
  auto x = te({u, u}), y = te({u});
  auto r = type_compare(cp2, x, y);
  REQUIRE(r.verdict == Comparison::Equal);
  REQUIRE(r.witness);
  REQUIRE(r.witness->blocks.size() == 2);
  CHECK(r.witness->blocks[0].element.prefix() == PrefixMap::generator(2, 0));
  CHECK(r.witness->blocks[1].element.prefix() == PrefixMap::generator(2, 1));
  CHECK(recheck_witness(cp2, x, y, *r.witness, true));
  auto back = type_compare(cp2, y, x);
  CHECK(back.verdict == Comparison::Equal);
  CHECK(recheck_witness(cp2, y, x, *back.witness, true));
}

TEST_CASE("cardinality decides comparison in I(3)") {
  auto inst = BimInstance::finite(i3());
  auto x = te({fin(3, {0}), fin(3, {1})}), y = te({fin(3, {0, 1, 2})});
  auto r = type_compare(inst, x, y);
  REQUIRE(r.verdict == Comparison::Leq);
  CHECK(recheck_witness(inst, x, y, *r.witness, false));
  CHECK_FALSE(recheck_witness(inst, x, y, *r.witness, true));
  auto back = type_compare(inst, y, x);
  CHECK(back.verdict == Comparison::NotLeq);
  CHECK(back.exhaustive);
  auto same = type_compare(inst, y, y);
  CHECK(same.verdict == Comparison::Equal);
  CHECK(recheck_witness(inst, y, y, *same.witness, true));
}

TEST_CASE("recheck rejects doctored witnesses") {
  auto inst = BimInstance::finite(i3());
  auto x = te({fin(3, {0, 1})}), y = te({fin(3, {1, 2})});
  auto r = type_compare(inst, x, y);
  REQUIRE(r.witness);
  auto w = *r.witness;
  w.blocks.pop_back();
  CHECK_FALSE(recheck_witness(inst, x, y, w, true));
  auto dup = *r.witness;
  dup.blocks.push_back(dup.blocks.front());
  CHECK_FALSE(recheck_witness(inst, x, y, dup, true));
  // an element outside the monoid
  std::vector<PartialBijection> g{pb(3, {0}, {1}), PartialBijection::identity(3)};
  auto small = BimInstance::finite(generate_monoid(g));
  EquivalenceWitness foreign{{{BimElement(pb(3, {0}, {2})), 0, 0}}};
  CHECK_FALSE(recheck_witness(small, te({fin(3, {0})}), te({fin(3, {2})}), foreign, true));
}

TEST_CASE("atoms in different D-classes are compared separately") {
  std::vector<PartialBijection> g{pb(3, {0}, {1}), PartialBijection::identity(3)};
  auto inst = BimInstance::finite(generate_monoid(g));
  CHECK(type_compare(inst, te({fin(3, {2})}), te({fin(3, {0})})).verdict == Comparison::NotLeq);
  CHECK(type_compare(inst, te({fin(3, {0})}), te({fin(3, {1})})).verdict == Comparison::Equal);
  CHECK(type_compare(inst, te({fin(3, {0}), fin(3, {1})}), te({fin(3, {0, 1, 2})})).verdict == Comparison::Leq);
  CHECK(type_compare(inst, te({fin(3, {2}), fin(3, {2})}), te({fin(3, {0, 1, 2})})).verdict == Comparison::NotLeq);
  CHECK(type_compare(inst, te({fin(3, {0})}), te({fin(3, {0, 1})})).verdict == Comparison::Leq);
}

TEST_CASE("property: type_compare on I(3) agrees with total cardinality") {
  auto inst = BimInstance::finite(i3());
  std::mt19937 rng(43);
  auto random_te = [&](std::size_t max_terms) {
    std::uniform_int_distribution<std::size_t> terms(0, max_terms);
    std::uniform_int_distribution<unsigned> mask(1, 7);
    std::vector<Clopen> s;
    std::size_t k = terms(rng);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<int> pts;
      unsigned m = mask(rng);
      for (int p = 0; p < 3; ++p)
        if (m >> p & 1) pts.push_back(p);
      s.push_back(fin(3, pts));
    }
    return te(s);
  };
  auto card = [](const TypeElement& t) {
    std::size_t c = 0;
    for (const auto& s : t.summands()) c += s.finite().points().size();
    return c;
  };
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_te(4), y = random_te(4);
    auto r = type_compare(inst, x, y);
    std::size_t cx = card(x), cy = card(y);
    if (cx == cy)
      CHECK(r.verdict == Comparison::Equal);
    else if (cx < cy)
      CHECK(r.verdict == Comparison::Leq);
    else
      CHECK(r.verdict == Comparison::NotLeq);
    if (r.witness) CHECK(recheck_witness(inst, x, y, *r.witness, r.verdict == Comparison::Equal));
    // transitivity through a third element
    auto z = random_te(4);
    auto r2 = type_compare(inst, y, z);
    if (r.witness && r2.witness) {
      auto w = compose_witnesses(*r.witness, *r2.witness);
      CHECK(recheck_witness(inst, x, z, w, r.verdict == Comparison::Equal && r2.verdict == Comparison::Equal));
    }
  }
}

TEST_CASE("property: all nonzero type elements of C(P_2) are equal") {
  auto cp2 = BimInstance::polycyclic(2);
  std::mt19937 rng(47);
  std::vector<Clopen> cyls;
  for (std::size_t len = 0; len <= 3; ++len)
    for (const auto& w : all_words(2, len)) cyls.push_back(cyl(w));
  std::uniform_int_distribution<std::size_t> pick(0, cyls.size() - 1), terms(1, 4);
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<Clopen> a, b, c;
    for (std::size_t i = terms(rng); i > 0; --i) a.push_back(cyls[pick(rng)]);
    for (std::size_t i = terms(rng); i > 0; --i) b.push_back(cyls[pick(rng)]);
    for (std::size_t i = terms(rng); i > 0; --i) c.push_back(cyls[pick(rng)]);
    auto x = te(a), y = te(b), z = te(c);
    auto r = type_compare(cp2, x, y);
    REQUIRE(r.verdict == Comparison::Equal);
    CHECK(recheck_witness(cp2, x, y, *r.witness, true));
    auto r2 = type_compare(cp2, y, z);
    CHECK(recheck_witness(cp2, x, z, compose_witnesses(*r.witness, *r2.witness), true));
  }
  CHECK(type_compare(cp2, TypeElement(), te({cyl("0")})).verdict == Comparison::Leq);
  CHECK(type_compare(cp2, te({cyl("0")}), TypeElement()).verdict == Comparison::NotLeq);
}

TEST_CASE("C(P_3): classes modulo 2") {
  auto cp3 = BimInstance::polycyclic(3);
  auto u = Clopen(PrefixCode::unit(3));
  auto two = Clopen(PrefixCode::from_words(3, {"0", "1"}));
  auto r = type_compare(cp3, te({u}), te({two}));
  CHECK(r.verdict == Comparison::Leq);
  CHECK(recheck_witness(cp3, te({u}), te({two}), *r.witness, false));
  auto e = type_compare(cp3, te({u, u, u}), te({u}));
  CHECK(e.verdict == Comparison::Equal);
  CHECK(recheck_witness(cp3, te({u, u, u}), te({u}), *e.witness, true));
  auto budget = type_compare(cp3, te({u, u, u, u, u}), te({u}), 1);
  CHECK(budget.verdict == Comparison::Unknown);
  CHECK_FALSE(budget.exhaustive);
}

TEST_CASE("almost unperforation scans") {
  auto inst = BimInstance::finite(i3());
  auto rep = almost_unperforated(inst, 3, 2, default_pool(inst));
  CHECK(rep.violations.empty());
  CHECK(rep.unknown == 0);
  CHECK(rep.checked > 0);
  auto serial = almost_unperforated(inst, 3, 2, default_pool(inst), Exec::Serial);
  CHECK(serial.checked == rep.checked);
  CHECK(serial.violations.size() == rep.violations.size());

  auto cp2 = BimInstance::polycyclic(2);
  auto u = Clopen(PrefixCode::unit(2));
  auto x = te({u});
  CHECK(type_compare(cp2, type_scale(x, 3), type_scale(x, 2)).verdict == Comparison::Equal);
  CHECK(type_compare(cp2, x, x).verdict == Comparison::Equal);
  auto rp = almost_unperforated(cp2, 2, 2, default_pool(cp2));
  CHECK(rp.violations.empty());
  CHECK_THROWS_AS(almost_unperforated(cp2, 0, 2, default_pool(cp2)), std::invalid_argument);
}
