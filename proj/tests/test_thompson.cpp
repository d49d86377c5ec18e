#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "prefix_oracles.hpp"
#include "tarski/paradox.hpp"
#include "tarski/thompson.hpp"

using namespace tarski;
using tarski::testing::eval;
using tarski::testing::words_of_length;

namespace {

const PrefixMap a1 = PrefixMap::generator(2, 0);
const PrefixMap a2 = PrefixMap::generator(2, 1);

VElement swap() { return VElement::from_codes(2, {"0", "1"}, {"0", "1"}, {1, 0}); }
VElement g_example() { return VElement::from_codes(2, {"0", "10", "11"}, {"00", "01", "1"}, {0, 1, 2}); }

VElement random_v(std::mt19937& rng, std::size_t max_splits) {
  std::uniform_int_distribution<std::size_t> sp(0, max_splits);
  std::size_t s = sp(rng);
  auto dom = tarski::testing::random_leaves(rng, 2, s), ran = tarski::testing::random_leaves(rng, 2, s);
  std::shuffle(ran.begin(), ran.end(), rng);
  std::vector<PrefixMap::Pair> pairs;
  for (std::size_t i = 0; i < dom.size(); ++i) pairs.push_back({dom[i], ran[i]});
  return VElement(PrefixMap::from_pairs(2, pairs));
}

// g h evaluated pointwise: h first.
std::optional<std::string> eval_product(const VElement& g, const VElement& h, const std::string& w) {
  auto y = eval(h.map(), w);
  if (!y) return std::nullopt;
  return eval(g.map(), *y);
}

// Value table on every word of the given length, truncated to that length.
std::vector<std::string> table(const PrefixMap& m, std::size_t len) {
  std::vector<std::string> out;
  for (const auto& w : words_of_length(m.arity(), len)) {
    auto y = eval(m, w);
    out.push_back(y ? y->substr(0, len) : "-");
  }
  return out;
}

}  // namespace

TEST_CASE("VElement construction") {
  CHECK_THROWS_AS(VElement{a1}, NotComplete);
  CHECK_THROWS_AS(VElement(PrefixMap::from_pairs(2, {{"0", "0"}})), NotComplete);
  CHECK(VElement::identity().leaves() == 1);
  CHECK(swap().leaves() == 2);
  CHECK(VElement::from_codes(2, {"0", "1"}, {"0", "1"}, {0, 1}) == VElement::identity());
}

TEST_CASE("group operations") {
  CHECK(multiply(swap(), swap()) == VElement::identity());
  CHECK(multiply(g_example(), VElement::identity()) == g_example());
  CHECK(multiply(VElement::identity(), g_example()) == g_example());
  auto g = g_example();
  auto prod = multiply(g, invert(g));
  CHECK(prod == VElement::identity());
  for (const auto& w : words_of_length(2, 3)) {
    CHECK(eval_product(g, invert(g), w) == w);
    CHECK(eval_product(invert(g), g, w) == w);
  }
  std::vector<VElement> two{g, swap()};
  CHECK(v_op(VOp::Multiply, two) == multiply(g, swap()));
  CHECK(v_op(VOp::Invert, std::span(two).first(1)) == invert(g));
  CHECK(v_op(VOp::Identity, {}) == VElement::identity());
  CHECK_THROWS_AS(v_op(VOp::Invert, two), std::invalid_argument);
  CHECK_THROWS_AS(multiply(g, VElement::identity(3)), BackendMismatch);
}

TEST_CASE("property: group axioms by pointwise evaluation") {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 150; ++trial) {
    auto f = random_v(rng, 4), g = random_v(rng, 4), h = random_v(rng, 4);
    std::size_t len = f.map().max_depth() + g.map().max_depth() + h.map().max_depth() + 1;
    auto fg_h = multiply(multiply(f, g), h), f_gh = multiply(f, multiply(g, h));
    CHECK(fg_h == f_gh);
    for (const auto& w : words_of_length(2, len)) {
      auto hw = eval(h.map(), w);
      REQUIRE(hw);
      auto ghw = eval(g.map(), *hw);
      REQUIRE(ghw);
      CHECK(eval(fg_h.map(), w) == eval(f.map(), *ghw));
    }
    CHECK(multiply(f, invert(f)) == VElement::identity());
    CHECK(invert(invert(f)) == f);
  }
}

TEST_CASE("property: reduction is confluent") {
  std::mt19937 rng(67);
  for (int trial = 0; trial < 150; ++trial) {
    auto g = random_v(rng, 5);
    auto expanded = tarski::testing::split_pairs(rng, g.map(), 6);
    CHECK(VElement(PrefixMap::from_pairs(2, expanded)) == g);
  }
}

TEST_CASE("enumeration of small elements") {
  auto small = enumerate_v(2, 3);
  // oracle: distinct value tables over all tree pairs with at most 3 leaves
  const std::vector<std::vector<Word>> codes{{""}, {"0", "1"}, {"0", "10", "11"}, {"00", "01", "1"}};
  std::set<std::vector<std::string>> tables;
  for (const auto& d : codes)
    for (const auto& r : codes) {
      if (d.size() != r.size()) continue;
      std::vector<int> perm(d.size());
      std::iota(perm.begin(), perm.end(), 0);
      do {
        std::vector<PrefixMap::Pair> pairs;
        for (std::size_t i = 0; i < d.size(); ++i) pairs.push_back({d[i], r[perm[i]]});
        std::vector<std::string> t;
        for (const auto& w : words_of_length(2, 4))
          for (const auto& p : pairs)
            if (w.substr(0, p.from.size()) == p.from) t.push_back((p.to + w.substr(p.from.size())).substr(0, 4));
        tables.insert(t);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  CHECK(tables.size() == 22);
  CHECK(small.size() == tables.size());
  std::map<std::size_t, std::size_t> by_leaves;
  for (const auto& g : small) ++by_leaves[g.leaves()];
  CHECK(by_leaves[1] == 1);
  CHECK(by_leaves[2] == 1);
  CHECK(by_leaves[3] == 20);
  CHECK(enumerate_v(3, 3).size() == 1 + 5);
}

TEST_CASE("embedding from the canonical pair") {
  VEmbedding h(a1, a2);
  CHECK(h(VElement::identity()) == BimElement(PrefixMap::identity_on(PrefixCode::unit(2))));
  auto sw = h(swap());
  CHECK(sw.source() == Clopen(PrefixCode::unit(2)));
  CHECK(sw.target() == Clopen(PrefixCode::unit(2)));
  for (const auto& w : words_of_length(2, 3)) CHECK(eval(sw.prefix(), w) == eval(swap().map(), w));
  CHECK(h.word("01").prefix() == PrefixMap::from_pairs(2, {{"", "01"}}));
  std::mt19937 rng(71);
  for (int trial = 0; trial < 60; ++trial) {
    auto g = random_v(rng, 5);
    CHECK(h(g).prefix() == g.map());
    CHECK(agree_on_words(h(g).prefix(), g.map(), g.map().max_depth() + 1));
  }
}

TEST_CASE("embedding on a proper clopen") {
  auto cp2 = BimInstance::polycyclic(2);
  Clopen c0 = PrefixCode::cylinder(2, "0");
  auto t = *find_tarski(cp2, c0, 2).matrix;
  auto p = p2_from_tarski(t);
  REQUIRE(p.tight);
  VEmbedding h(p.s, p.t);
  // Cuntz relations on the image of the generators
  for (char i : {'0', '1'})
    for (char j : {'0', '1'}) {
      auto r = bim_product(bim_star(h.word(Word(1, i))), h.word(Word(1, j)));
      if (i == j)
        CHECK(r == identity_on(c0));
      else
        CHECK(r.is_zero());
    }
  for (const auto& g : enumerate_v(2, 3)) {
    auto im = h(g);
    CHECK(im.source() == c0);
    CHECK(im.target() == c0);
    // extended by the identity off C_0 it is a bijection of the whole space
    std::vector<BimElement> parts{im, identity_on(complement(c0))};
    auto ext = bim_join(parts);
    CHECK(ext.source().prefix().is_unit());
    CHECK(ext.target().prefix().is_unit());
  }
  auto r = verify_embedding(h, enumerate_v(2, 3));
  CHECK(r.homomorphism_ok);
  CHECK(r.injective_on_test_set);
}

TEST_CASE("embedding contract errors") {
  CHECK_THROWS_AS(VEmbedding(a1, a1), NotOrthogonal);
  CHECK_THROWS_AS(VEmbedding(a1, PrefixMap::from_pairs(2, {{"", "10"}})), NotTight);
  CHECK_THROWS_AS(VEmbedding(a1, PrefixMap::from_pairs(2, {{"0", "1"}})), std::invalid_argument);
  CHECK_THROWS_AS(VEmbedding(PrefixMap(2), PrefixMap(2)), std::invalid_argument);
}

TEST_CASE("verify_embedding on all elements with at most three leaves") {
  VEmbedding h(a1, a2);
  auto set = enumerate_v(2, 3);
  auto par = verify_embedding(h, set);
  CHECK(par.homomorphism_ok);
  CHECK(par.injective_on_test_set);
  CHECK(par.pairs_checked == 22 * 22);
  // oracle: images agree with their elements at depth 4
  for (const auto& g : set) CHECK(table(h(g).prefix(), 4) == table(g.map(), 4));
  auto ser = verify_embedding(h, set, Exec::Serial);
  CHECK(ser.homomorphism_ok == par.homomorphism_ok);
  CHECK(ser.collisions.size() == par.collisions.size());
  auto one = verify_embedding(h, {VElement::identity()});
  CHECK(one.homomorphism_ok);
  CHECK(one.injective_on_test_set);
}
