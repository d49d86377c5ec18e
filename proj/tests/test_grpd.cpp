#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tarski/grpd.hpp"

using namespace tarski;
using tarski::testing::pb;

namespace {

PartialBijection perm(std::vector<int> t) { return PartialBijection::permutation(t); }

FiniteGroupoid random_groupoid(std::mt19937& rng, std::size_t n) {
  std::vector<int> pts(n);
  std::iota(pts.begin(), pts.end(), 0);
  std::shuffle(pts.begin(), pts.end(), rng);
  std::vector<std::vector<int>> blocks;
  std::bernoulli_distribution cut(0.35);
  for (int x : pts) {
    if (blocks.empty() || cut(rng)) blocks.emplace_back();
    blocks.back().push_back(x);
  }
  return FiniteGroupoid(n, blocks);
}

// A permutation of the points of the chosen blocks, identity elsewhere.
PartialBijection random_block_permutation(std::mt19937& rng, const FiniteGroupoid& g, const std::vector<char>& on) {
  std::vector<int> t(g.size());
  std::iota(t.begin(), t.end(), 0);
  for (std::size_t b = 0; b < g.blocks().size(); ++b) {
    if (!on[b]) continue;
    auto pts = g.blocks()[b];
    auto img = pts;
    std::shuffle(img.begin(), img.end(), rng);
    for (std::size_t i = 0; i < pts.size(); ++i) t[pts[i]] = img[i];
  }
  return perm(t);
}

PartialBijection random_bisection(std::mt19937& rng, const FiniteGroupoid& g) {
  std::vector<char> all(g.blocks().size(), 1);
  auto p = random_block_permutation(rng, g, all);
  std::bernoulli_distribution keep(0.7);
  std::vector<int> pts;
  for (std::size_t x = 0; x < g.size(); ++x)
    if (keep(rng)) pts.push_back(static_cast<int>(x));
  return p.restrict_to(PartialBijection::identity_on(g.size(), pts));
}

// <chi_a, chi_b> over the units, for real characters.
Rational character_pairing(const FiniteInverseMonoid& s, const std::vector<RatMatrix>& a, const UnitRep& pi) {
  Rational sum = 0;
  for (std::size_t k = 0; k < pi.units.size(); ++k) sum += trace(a[pi.units[k]]) * trace(pi.matrices[k]);
  sum /= static_cast<long>(pi.units.size());
  sum.canonicalize();
  return sum;
}

}  // namespace

TEST_CASE("groupoids, full groups and rigid stabilizers") {
  FiniteGroupoid g(4, {{2, 3}, {1, 0}});
  CHECK(g.blocks() == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  CHECK(g.arrows() == 8);
  CHECK_FALSE(g.is_minimal());
  CHECK(g.is_invariant({0, 1}));
  CHECK_FALSE(g.is_invariant({0, 2}));
  CHECK(g.contains(perm({1, 0, 3, 2})));
  CHECK_FALSE(g.contains(perm({2, 1, 0, 3})));
  CHECK_THROWS_AS(FiniteGroupoid(3, {{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteGroupoid(3, {{0, 1}, {1, 2}}), std::invalid_argument);

  CHECK(full_group(g).order == 4);
  CHECK(full_group(FiniteGroupoid::transitive(3)).order == 6);
  CHECK(full_group(FiniteGroupoid::discrete(5)).order == 1);
  CHECK(full_group(FiniteGroupoid::discrete(5)).generators.empty());

  auto r = rigid_stabilizer(g, {0, 1});
  CHECK(r.group.order == 2);
  CHECK(r.restricted_order == 2);
  CHECK(r.verified);
  REQUIRE(r.group.generators.size() == 1);
  CHECK(r.group.generators[0] == perm({1, 0, 2, 3}));
  CHECK(rigid_stabilizer(g, {0, 1, 2, 3}).group.order == 4);
  auto e = rigid_stabilizer(g, {});
  CHECK(e.group.order == 1);
  CHECK(e.verified);

  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto h = random_groupoid(rng, 3 + trial % 5);
    std::vector<int> u;
    std::bernoulli_distribution pick(0.5);
    for (std::size_t x = 0; x < h.size(); ++x)
      if (pick(rng)) u.push_back(static_cast<int>(x));
    auto rs = rigid_stabilizer(h, u);
    CHECK(rs.verified);
    BigInt want = 1;
    for (const auto& b : h.blocks())
      for (std::size_t k = 2; k <= b.size(); ++k) want *= static_cast<unsigned long>(k);
    auto fg = full_group(h);
    CHECK(fg.order == want);
    CHECK(BigInt(static_cast<unsigned long>(enumerate_group(fg.generators.empty() ? std::vector<PartialBijection>{PartialBijection::identity(h.size())} : fg.generators).size())) == want);
  }
}

TEST_CASE("bisections and germ groupoids") {
  // the bisections of the transitive groupoid are all of I(3)
  auto b3 = bisections(FiniteGroupoid::transitive(3));
  auto i3 = tarski::testing::all_partial_bijections(3);
  std::sort(i3.begin(), i3.end());
  CHECK(b3 == i3);
  auto b22 = bisections(FiniteGroupoid(4, {{0, 1}, {2, 3}}));
  CHECK(b22.size() == 49);
  for (const auto& s : b22) CHECK(FiniteGroupoid(4, {{0, 1}, {2, 3}}).contains(s));
  CHECK_THROWS_AS(bisections(FiniteGroupoid::transitive(6), 1000), CapExceeded);

  auto s3 = germ_groupoid(3, {perm({1, 0, 2}), perm({1, 2, 0})});
  CHECK(s3.groupoid.is_minimal());
  CHECK(s3.groupoid.arrows() == 9);
  CHECK(s3.piecewise_factorisable);
  CHECK(s3.checked == 34);

  auto triv = germ_groupoid(2, {PartialBijection::identity(2)});
  CHECK(triv.groupoid.blocks() == std::vector<std::vector<int>>{{0}, {1}});
  CHECK(triv.piecewise_factorisable);

  auto z2 = germ_groupoid(4, {perm({1, 0, 3, 2})});
  CHECK(z2.groupoid.blocks() == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  CHECK(z2.piecewise_factorisable);
  CHECK(z2.checked == 49);

  CHECK_THROWS_AS(germ_groupoid(3, {pb(3, {0}, {1})}), std::invalid_argument);
}

TEST_CASE("left regular representation of a monoid") {
  auto i1 = symmetric_inverse_monoid(1);
  REQUIRE(i1.size() == 2);
  auto lam = left_regular_monoid(i1);
  std::size_t one = *i1.identity(), zero = *i1.zero();
  CHECK(lam[one] == RatMatrix::identity(2));
  CHECK(lam[zero](zero, zero) == 1);
  CHECK(lam[zero](zero, one) == 0);
  CHECK(lam[zero](one, one) == 0);

  for (std::size_t n : {2u, 3u}) {
    auto s = symmetric_inverse_monoid(n);
    auto l = left_regular_monoid(s);
    auto c = check_rep(s, l, RatMatrix::identity(s.size()));
    CHECK(c.ok());
    CHECK(c.pairs_checked == s.size() * s.size());
    for (auto u : s.units()) {
      const auto& m = l[u];
      for (std::size_t i = 0; i < s.size(); ++i) {
        int ones = 0;
        for (std::size_t j = 0; j < s.size(); ++j) ones += m(i, j) == 1;
        CHECK(ones == 1);
      }
    }
    // oracle: lambda(s) delta_t straight from the definition
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t t = 0; t < s.size(); ++t) {
        auto tt = s[t].ran_idempotent(), ss = s[i].dom_idempotent();
        bool below = compose(tt, ss) == tt;
        auto st = *s.index_of(product(s[i], s[t]));
        for (std::size_t r = 0; r < s.size(); ++r) CHECK(l[i](r, t) == (below && r == st ? 1 : 0));
      }
  }
  CHECK(symmetric_inverse_monoid(2).size() == 7);
  CHECK(symmetric_inverse_monoid(3).size() == 34);
  auto bad = left_regular_monoid(symmetric_inverse_monoid(2));
  std::swap(bad[0], bad[1]);
  CHECK_FALSE(check_rep(symmetric_inverse_monoid(2), bad, RatMatrix::identity(7)).ok());
}

TEST_CASE("restriction to the unit group splits into quasi-regular pieces") {
  auto s = symmetric_inverse_monoid(3);
  auto d = restriction_decomposition(s);
  CHECK(d.units.size() == 6);
  CHECK(d.orbits.size() == 8);
  REQUIRE(d.classes.size() == 4);
  std::vector<std::size_t> mult;
  for (const auto& c : d.classes) mult.push_back(c.multiplicity);
  std::sort(mult.begin(), mult.end());
  CHECK(mult == std::vector<std::size_t>{1, 1, 3, 3});
  CHECK(d.characters_equal);
  // brute-force character: fixed basis vectors of t -> u t
  for (std::size_t k = 0; k < d.units.size(); ++k) {
    long fixed = 0;
    for (const auto& t : s.elements()) fixed += product(s[d.units[k]], t) == t;
    CHECK(d.character_res[k] == fixed);
  }
  auto id_pos = std::find(d.units.begin(), d.units.end(), *s.identity()) - d.units.begin();
  CHECK(d.character_sum[id_pos] == 34);

  std::vector<PartialBijection> g3;
  for (auto u : s.units()) g3.push_back(s[u]);
  FiniteInverseMonoid group(3, g3, {0});
  auto dg = restriction_decomposition(group);
  CHECK(dg.orbits.size() == 1);
  CHECK(dg.orbits[0].stabilizer.size() == 1);
  CHECK(dg.characters_equal);

  auto d1 = restriction_decomposition(symmetric_inverse_monoid(1));
  CHECK(d1.orbits.size() == 2);
  for (const auto& o : d1.orbits) CHECK(o.stabilizer.size() == 1);
  CHECK(d1.characters_equal);
}

TEST_CASE("induction from the unit group") {
  for (std::size_t n : {1u, 2u, 3u}) {
    auto s = symmetric_inverse_monoid(n);
    std::vector<UnitRep> reps{trivial_unit_rep(s), sign_unit_rep(s)};
    if (n >= 2) reps.push_back(standard_unit_rep(s));
    for (const auto& pi : reps) {
      auto ind = induce(s, pi);
      CHECK(ind.check.ok());
      CHECK(ind.multiplicity >= 1);
      // characters of irreducibles: the pairing counts the multiplicity
      CHECK(character_pairing(s, ind.images, pi) == static_cast<long>(ind.multiplicity));
    }
  }
  auto s2 = symmetric_inverse_monoid(2);
  auto sign2 = sign_unit_rep(s2);
  CHECK(induce(s2, sign2).multiplicity >= 1);
  // standard rep of S_3 is 2-dimensional and unitary for its Gram matrix
  auto s3 = symmetric_inverse_monoid(3);
  auto st = standard_unit_rep(s3);
  CHECK(st.dim() == 2);
  auto broken = st;
  broken.matrices[1] = Rational(2) * broken.matrices[1];
  CHECK_THROWS_AS(induce(s3, broken), NotUnitary);
  CHECK_THROWS_AS(standard_unit_rep(symmetric_inverse_monoid(1)), std::invalid_argument);
  // sign is not trivial on S_3
  auto sg = sign_unit_rep(s3);
  long minus = 0;
  for (const auto& m : sg.matrices) minus += m(0, 0) == -1;
  CHECK(minus == 3);
}

TEST_CASE("Koopman operators") {
  auto g4 = FiniteGroupoid::transitive(4);
  std::vector<Rational> uniform(4, Rational(1, 4));
  auto k = koopman(g4, uniform, perm({1, 0, 2, 3}));
  CHECK(k.is_permutation_matrix());
  CHECK(*k.exact() == partial_permutation_matrix(perm({1, 0, 2, 3})));
  CHECK(is_invariant_measure(g4, uniform));

  auto g3 = FiniteGroupoid::transitive(3);
  std::vector<Rational> mu{Rational(1, 2), Rational(1, 4), Rational(1, 4)};
  CHECK_FALSE(is_invariant_measure(g3, mu));
  auto s = koopman(g3, mu, pb(3, {1}, {0}));
  CHECK(s.target(1) == 0);
  CHECK(s.squared(1) == Rational(1, 2));
  CHECK_FALSE(s.exact());
  CHECK(std::abs(s.numeric()(0, 1) - std::sqrt(0.5)) < 1e-15);
  CHECK(is_partial_isometry(s, mu));
  auto p = koopman_adjoint(s, mu) * s;
  CHECK(p.target(1) == 1);
  CHECK(p.squared(1) == 1);
  CHECK(p.target(0) == -1);
  CHECK(p.target(2) == -1);
  // the Euclidean transpose is not the adjoint here
  Eigen::MatrixXd a = s.numeric();
  CHECK((a.transpose() * a)(1, 1) == doctest::Approx(0.5));

  auto e = koopman(g3, mu, pb(3, {0}, {0})), f = koopman(g3, mu, pb(3, {1}, {1}));
  CHECK(*koopman(g3, mu, pb(3, {0, 1}, {0, 1})).exact() == *e.exact() + *f.exact());
  CHECK(koopman_tightness(g3, mu).ok());
  CHECK(koopman_tightness(g3, mu).pairs_checked == 64);
  CHECK_THROWS_AS(koopman(g3, {1, 0, 1}, pb(3, {0}, {0})), std::invalid_argument);
  CHECK_THROWS_AS(koopman(FiniteGroupoid::discrete(3), mu, pb(3, {1}, {0})), NotInGroupoid);

  std::mt19937 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    auto g = random_groupoid(rng, 3 + trial % 4);
    std::vector<Rational> w;
    std::uniform_int_distribution<int> num(1, 9);
    for (std::size_t x = 0; x < g.size(); ++x) w.emplace_back(num(rng), 7);
    auto x = random_bisection(rng, g), y = random_bisection(rng, g);
    auto kx = koopman(g, w, x), ky = koopman(g, w, y);
    CHECK(koopman(g, w, product(x, y)) == kx * ky);
    CHECK(koopman(g, w, star(x)) == koopman_adjoint(kx, w));
    CHECK(is_partial_isometry(kx, w));
    // numeric adjoint M^-1 A^T M agrees
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.size(), g.size());
    for (std::size_t i = 0; i < g.size(); ++i) m(i, i) = w[i].get_d();
    Eigen::MatrixXd adj = m.inverse() * kx.numeric().transpose() * m;
    CHECK((adj - koopman_adjoint(kx, w).numeric()).norm() < 1e-12);
  }
}

TEST_CASE("kernel identity for separated supports") {
  FiniteGroupoid g(4, {{0, 1}, {2, 3}});
  auto g1 = perm({1, 0, 2, 3}), g2 = perm({0, 1, 3, 2});
  auto k = algkern_check(g, g1, g2);
  CHECK(k.identity_holds);
  CHECK(k.formal_nonzero);
  CHECK(k.formal.size() == 4);
  auto d = algkern_check(g, PartialBijection::identity(4), g2);
  CHECK(d.identity_holds);
  CHECK_FALSE(d.formal_nonzero);
  CHECK_THROWS_AS(algkern_check(g, g1, perm({1, 0, 3, 2})), SupportsNotSeparated);
  CHECK_THROWS_AS(algkern_check(g, perm({2, 1, 0, 3}), g2), NotInGroupoid);

  auto lin = normalize({{1, g1}, {2, g2}, {-1, g1}, {Rational(1, 2), g2}});
  REQUIRE(lin.size() == 1);
  CHECK(lin[0].coef == Rational(5, 2));

  std::mt19937 rng(17);
  int tested = 0;
  while (tested < 40) {
    auto h = random_groupoid(rng, 4 + tested % 5);
    if (h.blocks().size() < 2) continue;
    std::vector<char> side(h.blocks().size());
    std::bernoulli_distribution coin(0.5);
    for (auto& c : side) c = coin(rng);
    std::vector<char> other(side.size());
    for (std::size_t b = 0; b < side.size(); ++b) other[b] = !side[b];
    auto a = random_block_permutation(rng, h, side), b = random_block_permutation(rng, h, other);
    auto r = algkern_check(h, a, b);
    CHECK(r.identity_holds);
    bool nontrivial = a != PartialBijection::identity(h.size()) && b != PartialBijection::identity(h.size());
    CHECK(r.formal_nonzero == nontrivial);
    ++tested;
  }
}

TEST_CASE("norms in the Koopman and regular representations") {
  auto g = FiniteGroupoid::transitive(4);
  std::vector<Rational> mu(4, Rational(1, 4));
  std::vector<BlockRep> reps{koopman_rep(g, mu), pi_lambda_rep(g)};
  auto id = PartialBijection::identity(4);
  auto x = perm({1, 2, 3, 0});
  auto n1 = norm_compare(g, reps, {{1, id}});
  CHECK(n1[0] == doctest::Approx(1.0));
  CHECK(n1[1] == doctest::Approx(1.0));
  auto n0 = norm_compare(g, reps, {{1, x}, {-1, x}});
  CHECK(n0[0] == 0.0);
  CHECK(n0[1] == 0.0);
  // 1 + x for a 4-cycle: |1 + i^k| peaks at 2
  auto n2 = norm_compare(g, reps, {{1, id}, {1, x}});
  CHECK(n2[0] == doctest::Approx(2.0));
  CHECK(n2[1] == doctest::Approx(2.0));
  // 1 - x sees the eigenvalue -1 in both
  auto n3 = norm_compare(g, reps, {{1, id}, {-1, x}});
  CHECK(n3[1] == doctest::Approx(2.0));
  CHECK_THROWS_AS(norm_compare(g, reps, {{1, pb(4, {0}, {1})}}), NotInGroupoid);

  // block dimensions: 1 + 4 + 12 + 24 for the transitive 4-point groupoid
  std::size_t dims = 0;
  for (const auto& m : pi_lambda_rep(g)(id)) dims += m.rows();
  CHECK(dims == 41);

  // the blocks carry the same norms as the full left regular representation
  auto s = symmetric_inverse_monoid(3);
  auto lam = left_regular_monoid(s);
  auto g3 = FiniteGroupoid::transitive(3);
  auto pl = pi_lambda_rep(g3);
  std::mt19937 rng(3);
  auto units = s.units();
  for (int trial = 0; trial < 30; ++trial) {
    FormalElement a;
    std::uniform_int_distribution<std::size_t> pick(0, units.size() - 1);
    std::uniform_int_distribution<int> c(-3, 3);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(s.size(), s.size());
    for (int t = 0; t < 3; ++t) {
      auto u = units[pick(rng)];
      int coef = c(rng);
      a.push_back({coef, s[u]});
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) dense(i, j) += coef * lam[u](i, j).get_d();
    }
    double want = dense.size() ? Eigen::JacobiSVD<Eigen::MatrixXd>(dense).singularValues()(0) : 0.0;
    CHECK(norm_compare(g3, {pl}, a)[0] == doctest::Approx(want).epsilon(1e-12));
  }

  auto g5 = FiniteGroupoid(5, {{0, 1, 2}, {3, 4}});
  std::vector<Rational> w(5, Rational(1, 5));
  std::vector<BlockRep> r5{koopman_rep(g5, w), pi_lambda_rep(g5)};
  for (int trial = 0; trial < 20; ++trial) {
    FormalElement a;
    std::vector<char> all(2, 1);
    for (int t = 0; t < 4; ++t) a.push_back({trial % 2 ? 1 : -1, random_block_permutation(rng, g5, all)});
    auto nn = norm_compare(g5, r5, a);
    CHECK(nn[0] <= nn[1] + 1e-9);
  }
}

TEST_CASE("serial and parallel kernels agree") {
  auto i3 = symmetric_inverse_monoid(3);
  auto ind = induce(i3, standard_unit_rep(i3));
  auto ser = check_rep(i3, ind.images, ind.gram, Exec::Serial);
  auto par = check_rep(i3, ind.images, ind.gram, Exec::Parallel);
  CHECK(ser.pairs_checked == par.pairs_checked);
  CHECK(ser.multiplicative_failures == par.multiplicative_failures);
  CHECK(ser.star_failures == par.star_failures);
  CHECK(ser.ok() == par.ok());

  // a doctored image breaks both paths the same way
  auto broken = ind.images;
  broken[1] = broken[2];
  auto bs = check_rep(i3, broken, ind.gram, Exec::Serial);
  auto bp = check_rep(i3, broken, ind.gram, Exec::Parallel);
  CHECK_FALSE(bs.ok());
  CHECK(bs.multiplicative_failures == bp.multiplicative_failures);
  CHECK(bs.star_failures == bp.star_failures);

  FiniteGroupoid g(6, {{0, 1, 2}, {3, 4}, {5}});
  std::vector<Rational> mu{Rational(1, 4), Rational(1, 8), Rational(1, 8), Rational(1, 6), Rational(1, 6), Rational(1, 6)};
  auto ts = koopman_tightness(g, mu, Exec::Serial);
  auto tp = koopman_tightness(g, mu, Exec::Parallel);
  CHECK(ts.pairs_checked == tp.pairs_checked);
  CHECK(ts.failures == tp.failures);
}
