#include "tarski/thompson.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace tarski {

VElement::VElement(PrefixMap m) : map_(std::move(m)) {
  if (!map_.domain().is_unit() || !map_.range().is_unit())
    throw NotComplete("not a bijection of the whole space: " + to_string(map_));
}

VElement VElement::identity(int arity) { return VElement(PrefixMap::identity_on(PrefixCode::unit(arity))); }

VElement VElement::from_codes(int arity, const std::vector<Word>& dom, const std::vector<Word>& ran,
                              const std::vector<int>& perm) {
  return VElement(PrefixMap::from_codes(arity, dom, ran, perm));
}

std::string to_string(const VElement& g) { return to_string(g.map()); }

VElement multiply(const VElement& g, const VElement& h) {
  if (g.arity() != h.arity()) throw BackendMismatch("elements over different alphabets");
  return VElement(compose(h.map(), g.map()));
}

VElement invert(const VElement& g) { return VElement(star(g.map())); }

VElement v_op(VOp kind, std::span<const VElement> args) {
  switch (kind) {
    case VOp::Multiply:
      if (args.size() != 2) throw std::invalid_argument("multiply takes two operands");
      return multiply(args[0], args[1]);
    case VOp::Invert:
      if (args.size() != 1) throw std::invalid_argument("invert takes one operand");
      return invert(args[0]);
    case VOp::Identity:
      if (!args.empty()) throw std::invalid_argument("identity takes no operands");
      return VElement::identity();
  }
  throw std::invalid_argument("unknown operation");
}

namespace {

std::vector<std::vector<Word>> complete_codes(int arity, std::size_t max_leaves) {
  std::set<std::vector<Word>> seen{{Word{}}};
  std::vector<std::vector<Word>> frontier{{Word{}}};
  while (!frontier.empty()) {
    std::vector<std::vector<Word>> next;
    for (const auto& code : frontier) {
      if (code.size() + static_cast<std::size_t>(arity) - 1 > max_leaves) continue;
      for (std::size_t i = 0; i < code.size(); ++i) {
        std::vector<Word> c = code;
        Word w = c[i];
        c.erase(c.begin() + static_cast<long>(i));
        for (int a = 0; a < arity; ++a) c.push_back(w + static_cast<char>('0' + a));
        std::sort(c.begin(), c.end());
        if (seen.insert(c).second) next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

std::vector<VElement> enumerate_v(int arity, std::size_t max_leaves) {
  if (max_leaves < 1) throw std::invalid_argument("max_leaves must be positive");
  auto codes = complete_codes(arity, max_leaves);
  std::set<VElement> out;
  for (const auto& d : codes)
    for (const auto& r : codes) {
      if (d.size() != r.size()) continue;
      std::vector<int> perm(d.size());
      std::iota(perm.begin(), perm.end(), 0);
      do {
        out.insert(VElement::from_codes(arity, d, r, perm));
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  return {out.begin(), out.end()};
}

BimElement bim_product(const BimElement& g, const BimElement& h) { return bim_compose(h, g); }

VEmbedding::VEmbedding(BimElement s, BimElement t) : s_(std::move(s)), t_(std::move(t)), base_(s_.source()) {
  if (s_.backend() != t_.backend()) throw BackendMismatch("pair from different backends");
  if (base_.is_zero()) throw std::invalid_argument("source is zero");
  if (t_.source() != base_) throw std::invalid_argument("s and t have different sources");
  if (!leq(s_.target(), base_) || !leq(t_.target(), base_)) throw NotTight("ranges leave the source");
  if (!meet(s_.target(), t_.target()).is_zero()) throw NotOrthogonal("ranges of s and t meet");
  if (join(s_.target(), t_.target()) != base_) throw NotTight("ranges do not cover the source");
}

BimElement VEmbedding::word(const Word& w) const {
  validate_word(w, 2);
  BimElement r = identity_on(base_);
  for (char c : w) r = bim_product(r, c == '0' ? s_ : t_);
  return r;
}

BimElement VEmbedding::operator()(const VElement& g) const {
  if (g.arity() != 2) throw BackendMismatch("embedding is defined on V_2");
  std::vector<BimElement> parts;
  for (const auto& [u, v] : g.map().pairs()) parts.push_back(bim_product(word(v), bim_star(word(u))));
  return bim_join(parts);
}

EmbeddingReport verify_embedding(const VEmbedding& h, const std::vector<VElement>& test_set, Exec exec) {
  const std::size_t n = test_set.size();
  std::vector<BimElement> image(n, identity_on(h.base()));
  for_each_index(n, exec, [&](std::size_t i) { image[i] = h(test_set[i]); });
  std::vector<char> hom(n * n, 1), same(n * n, 0);
  for_each_index(n * n, exec, [&](std::size_t k) {
    std::size_t i = k / n, j = k % n;
    hom[k] = h(multiply(test_set[i], test_set[j])) == bim_product(image[i], image[j]);
    same[k] = i < j && image[i] == image[j] && !(test_set[i] == test_set[j]);
  });
  EmbeddingReport r;
  r.pairs_checked = n * n;
  for (std::size_t k = 0; k < n * n; ++k) {
    if (!hom[k]) r.failures.push_back({k / n, k % n});
    if (same[k]) r.collisions.push_back({k / n, k % n});
  }
  r.homomorphism_ok = r.failures.empty();
  r.injective_on_test_set = r.collisions.empty();
  return r;
}

}  // namespace tarski
