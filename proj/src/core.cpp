#include "tarski/core.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace tarski {

namespace {

void require_same_ground(const PartialBijection& a, const PartialBijection& b) {
  if (a.ground_size() != b.ground_size()) {
    throw GroundMismatch("partial bijections over ground sets of size " + std::to_string(a.ground_size()) + " and " +
                         std::to_string(b.ground_size()));
  }
}

}  // namespace

PartialBijection PartialBijection::from_pairs(std::size_t n, std::span<const int> dom, std::span<const int> img) {
  if (dom.size() != img.size()) throw std::invalid_argument("dom and img have different lengths");
  PartialBijection p(n);
  std::vector<char> hit(n, 0);
  for (std::size_t i = 0; i < dom.size(); ++i) {
    int x = dom[i], y = img[i];
    if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= n || static_cast<std::size_t>(y) >= n) {
      throw std::invalid_argument("point outside the ground set of size " + std::to_string(n));
    }
    if (p.image_[x] >= 0) throw std::invalid_argument("source " + std::to_string(x) + " repeated");
    if (hit[y]) throw std::invalid_argument("target " + std::to_string(y) + " repeated");
    p.image_[x] = y;
    hit[y] = 1;
  }
  return p;
}

PartialBijection PartialBijection::identity(std::size_t n) {
  PartialBijection p(n);
  std::iota(p.image_.begin(), p.image_.end(), 0);
  return p;
}

PartialBijection PartialBijection::identity_on(std::size_t n, std::span<const int> points) {
  return from_pairs(n, points, points);
}

PartialBijection PartialBijection::permutation(std::span<const int> table) {
  std::vector<int> dom(table.size());
  std::iota(dom.begin(), dom.end(), 0);
  return from_pairs(table.size(), dom, table);
}

std::vector<int> PartialBijection::domain() const {
  std::vector<int> d;
  for (std::size_t x = 0; x < image_.size(); ++x)
    if (image_[x] >= 0) d.push_back(static_cast<int>(x));
  return d;
}

std::vector<int> PartialBijection::range() const {
  std::vector<int> r;
  for (int y : image_)
    if (y >= 0) r.push_back(y);
  std::sort(r.begin(), r.end());
  return r;
}

std::size_t PartialBijection::rank() const {
  return static_cast<std::size_t>(std::count_if(image_.begin(), image_.end(), [](int y) { return y >= 0; }));
}

bool PartialBijection::is_idempotent() const {
  for (std::size_t x = 0; x < image_.size(); ++x)
    if (image_[x] >= 0 && image_[x] != static_cast<int>(x)) return false;
  return true;
}

PartialBijection PartialBijection::dom_idempotent() const {
  PartialBijection e(ground_size());
  for (std::size_t x = 0; x < image_.size(); ++x)
    if (image_[x] >= 0) e.image_[x] = static_cast<int>(x);
  return e;
}

PartialBijection PartialBijection::ran_idempotent() const {
  PartialBijection e(ground_size());
  for (int y : image_)
    if (y >= 0) e.image_[y] = y;
  return e;
}

PartialBijection PartialBijection::restrict_to(const PartialBijection& e) const {
  require_same_ground(*this, e);
  PartialBijection r(ground_size());
  for (std::size_t x = 0; x < image_.size(); ++x)
    if (e.image_[x] >= 0) r.image_[x] = image_[x];
  return r;
}

std::size_t PartialBijectionHash::operator()(const PartialBijection& p) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int y : p.table()) {
    h ^= static_cast<std::size_t>(y + 1);
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_string(const PartialBijection& p) {
  std::ostringstream os;
  os << '[';
  bool first = true;
  for (std::size_t x = 0; x < p.ground_size(); ++x) {
    if (!p.defined_at(x)) continue;
    if (!first) os << ", ";
    os << x << "->" << p(x);
    first = false;
  }
  os << ']';
  return os.str();
}

PartialBijection compose(const PartialBijection& a, const PartialBijection& b) {
  require_same_ground(a, b);
  std::vector<int> dom, img;
  for (std::size_t x = 0; x < a.ground_size(); ++x) {
    int y = a(x);
    if (y < 0) continue;
    int z = b(static_cast<std::size_t>(y));
    if (z < 0) continue;
    dom.push_back(static_cast<int>(x));
    img.push_back(z);
  }
  return PartialBijection::from_pairs(a.ground_size(), dom, img);
}

PartialBijection star(const PartialBijection& a) {
  std::vector<int> dom, img;
  for (std::size_t x = 0; x < a.ground_size(); ++x) {
    if (a(x) < 0) continue;
    dom.push_back(a(x));
    img.push_back(static_cast<int>(x));
  }
  return PartialBijection::from_pairs(a.ground_size(), dom, img);
}

Relations relations(const PartialBijection& a, const PartialBijection& b) {
  require_same_ground(a, b);
  Relations r;
  r.leq = true;
  for (std::size_t x = 0; x < a.ground_size(); ++x)
    if (a(x) >= 0 && b(x) != a(x)) r.leq = false;
  PartialBijection left = compose(star(a), b);
  PartialBijection right = compose(a, star(b));
  r.compatible = left.is_idempotent() && right.is_idempotent();
  r.orthogonal = left.is_zero() && right.is_zero();
  return r;
}

PartialBijection join(std::span<const PartialBijection> parts) {
  if (parts.empty()) throw std::invalid_argument("join of an empty family has no ground set");
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i + 1; j < parts.size(); ++j)
      if (!relations(parts[i], parts[j]).compatible) throw IncompatiblePair(i, j);
  std::vector<int> table(parts[0].ground_size(), -1);
  for (const auto& p : parts)
    for (std::size_t x = 0; x < p.ground_size(); ++x)
      if (p(x) >= 0) table[x] = p(x);
  std::vector<int> dom, img;
  for (std::size_t x = 0; x < table.size(); ++x) {
    if (table[x] < 0) continue;
    dom.push_back(static_cast<int>(x));
    img.push_back(table[x]);
  }
  return PartialBijection::from_pairs(table.size(), dom, img);
}

FiniteInverseMonoid::FiniteInverseMonoid(std::size_t ground_size, std::vector<PartialBijection> elements,
                                         std::vector<std::size_t> generators)
    : ground_size_(ground_size), elements_(std::move(elements)), generators_(std::move(generators)) {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i].ground_size() != ground_size_) throw GroundMismatch("monoid element over the wrong ground set");
    if (!index_.emplace(elements_[i], i).second) throw std::invalid_argument("duplicate monoid element");
  }
}

std::optional<std::size_t> FiniteInverseMonoid::index_of(const PartialBijection& p) const {
  auto it = index_.find(p);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> FiniteInverseMonoid::idempotents() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < elements_.size(); ++i)
    if (elements_[i].is_idempotent()) out.push_back(i);
  return out;
}

std::optional<std::size_t> FiniteInverseMonoid::identity() const {
  std::optional<std::size_t> best;
  for (std::size_t i : idempotents())
    if (!best || elements_[i].rank() > elements_[*best].rank()) best = i;
  if (!best) return std::nullopt;
  const auto& one = elements_[*best];
  for (const auto& s : elements_)
    if (compose(one, s) != s || compose(s, one) != s) return std::nullopt;
  return best;
}

std::optional<std::size_t> FiniteInverseMonoid::zero() const { return index_of(PartialBijection(ground_size_)); }

std::vector<std::size_t> FiniteInverseMonoid::units() const {
  std::vector<std::size_t> out;
  auto one = identity();
  if (!one) return out;
  const auto& e = elements_[*one];
  for (std::size_t i = 0; i < elements_.size(); ++i)
    if (elements_[i].dom_idempotent() == e && elements_[i].ran_idempotent() == e) out.push_back(i);
  return out;
}

std::vector<std::vector<std::size_t>> FiniteInverseMonoid::multiplication_table() const {
  const std::size_t n = elements_.size();
  std::vector<std::vector<std::size_t>> table(n, std::vector<std::size_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto k = index_of(compose(elements_[i], elements_[j]));
      if (!k) throw std::logic_error("monoid is not closed under composition");
      table[i][j] = *k;
    }
  return table;
}

FiniteInverseMonoid generate_monoid(std::span<const PartialBijection> gens, std::size_t cap, bool adjoin_identity) {
  if (gens.empty()) throw std::invalid_argument("generate_monoid needs at least one generator");
  const std::size_t n = gens[0].ground_size();
  std::set<PartialBijection> letter_set;
  for (const auto& g : gens) {
    if (g.ground_size() != n) throw GroundMismatch("generators over different ground sets");
    letter_set.insert(g);
    letter_set.insert(star(g));
  }
  if (adjoin_identity) letter_set.insert(PartialBijection::identity(n));
  std::vector<PartialBijection> letters(letter_set.begin(), letter_set.end());

  std::vector<PartialBijection> elements;
  std::unordered_map<PartialBijection, std::size_t, PartialBijectionHash> seen;
  auto admit = [&](const PartialBijection& p) {
    if (seen.count(p)) return false;
    if (elements.size() >= cap) throw CapExceeded(cap);
    seen.emplace(p, elements.size());
    elements.push_back(p);
    return true;
  };

  std::vector<PartialBijection> frontier;
  for (const auto& l : letters)
    if (admit(l)) frontier.push_back(l);
  while (!frontier.empty()) {
    std::set<PartialBijection> next;
    for (const auto& w : frontier)
      for (const auto& l : letters) {
        PartialBijection p = compose(w, l);
        if (!seen.count(p)) next.insert(std::move(p));
      }
    frontier.clear();
    for (const auto& p : next)
      if (admit(p)) frontier.push_back(p);
  }
  admit(PartialBijection(n));

  std::vector<std::size_t> gen_index;
  for (const auto& g : gens) gen_index.push_back(seen.at(g));
  return FiniteInverseMonoid(n, std::move(elements), std::move(gen_index));
}

std::vector<std::vector<char>> j_preorder(const FiniteInverseMonoid& s, const std::vector<std::size_t>& idem,
                                          const std::vector<std::size_t>& class_of, Exec exec) {
  const std::size_t k = idem.size();
  std::vector<std::vector<char>> leq(k, std::vector<char>(k, 0));
  // below[f] = positions e' with e' <= f
  std::vector<std::vector<std::size_t>> below(k);
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t e = 0; e < k; ++e)
      if (relations(s[idem[e]], s[idem[f]]).leq) below[f].push_back(e);

  auto row = [&](std::size_t e) {
    for (std::size_t f = 0; f < k; ++f)
      for (std::size_t e2 : below[f])
        if (class_of[e2] == class_of[e]) {
          leq[e][f] = 1;
          break;
        }
  };
  for_each_index(k, exec, [&](std::size_t i) { row(i); });
  return leq;
}

GreenClasses green_classify(const FiniteInverseMonoid& s, Exec exec) {
  GreenClasses g;
  g.idempotents = s.idempotents();
  const std::size_t k = g.idempotents.size();
  std::unordered_map<std::size_t, std::size_t> position;
  for (std::size_t i = 0; i < k; ++i) position[g.idempotents[i]] = i;

  // union-find over idempotent positions; remember the linking element
  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t a = position.at(*s.index_of(s[i].dom_idempotent()));
    std::size_t b = position.at(*s.index_of(s[i].ran_idempotent()));
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> class_index(k, k);
  g.class_of.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t r = find(i);
    if (class_index[r] == k) {
      class_index[r] = g.d_classes.size();
      g.d_classes.emplace_back();
    }
    g.class_of[i] = class_index[r];
    g.d_classes[class_index[r]].push_back(g.idempotents[i]);
  }

  // witnesses: representative (first member) -> member
  for (const auto& cls : g.d_classes) {
    const auto& rep = s[cls.front()];
    for (std::size_t member : cls) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].dom_idempotent() == rep && s[i].ran_idempotent() == s[member]) {
          g.d_witnesses.emplace_back(member, i);
          break;
        }
      }
    }
  }

  g.leq_j = j_preorder(s, g.idempotents, g.class_of, exec);
  g.dj_equal = true;
  for (std::size_t e = 0; e < k; ++e)
    for (std::size_t f = 0; f < k; ++f)
      if (g.leq_j[e][f] && g.leq_j[f][e] && g.class_of[e] != g.class_of[f]) g.dj_equal = false;
  return g;
}

AxiomCheck verify_inverse_monoid(const FiniteInverseMonoid& s, Exec exec) {
  const std::size_t n = s.size();
  AxiomCheck out;
  out.pairs = n * n;
  std::vector<std::size_t> bad_rows(n, 0);
  std::vector<std::string> first_bad(n);

  auto check_row = [&](std::size_t i) {
    const auto& a = s[i];
    auto note = [&](const std::string& what) {
      if (bad_rows[i]++ == 0) first_bad[i] = what;
    };
    if (!s.contains(star(a))) note("star of " + to_string(a) + " missing");
    if (compose(compose(a, star(a)), a) != a) note("s s* s != s for " + to_string(a));
    if (compose(compose(star(a), a), star(a)) != star(a)) note("s* s s* != s* for " + to_string(a));
    for (std::size_t j = 0; j < n; ++j) {
      const auto& b = s[j];
      PartialBijection ab = compose(a, b);
      if (!s.contains(ab)) note("product " + to_string(a) + " . " + to_string(b) + " missing");
      if (a.is_idempotent() && b.is_idempotent() && ab != compose(b, a)) {
        note("idempotents " + to_string(a) + " and " + to_string(b) + " do not commute");
      }
    }
  };

  for_each_index(n, exec, [&](std::size_t i) { check_row(i); });
  for (std::size_t i = 0; i < n; ++i) {
    if (bad_rows[i] && out.violations == 0) out.first_violation = first_bad[i];
    out.violations += bad_rows[i];
  }
  return out;
}

}  // namespace tarski

namespace tarski {

FiniteInverseMonoid symmetric_inverse_monoid(std::size_t n, std::size_t cap) {
  if (n == 0) throw std::invalid_argument("I(n) needs n >= 1");
  std::vector<PartialBijection> gens{PartialBijection::identity(n)};
  if (n >= 2) {
    std::vector<int> swap(n), cycle(n);
    for (std::size_t i = 0; i < n; ++i) {
      swap[i] = static_cast<int>(i);
      cycle[i] = static_cast<int>((i + 1) % n);
    }
    std::swap(swap[0], swap[1]);
    gens.push_back(PartialBijection::permutation(swap));
    gens.push_back(PartialBijection::permutation(cycle));
  }
  std::vector<int> pts(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) pts[i] = static_cast<int>(i);
  gens.push_back(PartialBijection::identity_on(n, pts));
  return generate_monoid(gens, cap);
}

}  // namespace tarski
