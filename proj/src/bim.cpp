#include "tarski/bim.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace tarski {

bool is_prefix(const Word& u, const Word& w) { return u.size() <= w.size() && w.compare(0, u.size(), u) == 0; }

void validate_word(const Word& w, int arity) {
  if (arity < 2 || arity > 10) throw std::invalid_argument("arity must lie in 2..10");
  for (char c : w)
    if (c < '0' || c >= '0' + arity) throw std::invalid_argument("word '" + w + "' uses a letter outside the alphabet");
}

namespace {

void require_arity(int a, int b) {
  if (a != b) throw BackendMismatch("prefix values over different alphabets");
}

Word parent(const Word& w) { return w.substr(0, w.size() - 1); }

std::set<Word> drop_covered(std::vector<Word> words) {
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  std::set<Word> out;
  for (const auto& w : words) {
    bool covered = false;
    for (std::size_t k = 0; k < w.size() && !covered; ++k) covered = out.count(w.substr(0, k)) > 0;
    // sorted order puts every prefix before its extensions
    if (!covered) out.insert(w);
  }
  return out;
}

}  // namespace

PrefixCode PrefixCode::from_words(int arity, std::vector<Word> words) {
  for (const auto& w : words) validate_word(w, arity);
  std::set<Word> s = drop_covered(std::move(words));
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& w : s) {
      if (w.empty() || w.back() != '0') continue;
      Word p = parent(w);
      bool full = true;
      for (int c = 1; c < arity && full; ++c) full = s.count(p + static_cast<char>('0' + c)) > 0;
      if (!full) continue;
      for (int c = 0; c < arity; ++c) s.erase(p + static_cast<char>('0' + c));
      s.insert(p);
      changed = true;
      break;
    }
  }
  PrefixCode code(arity);
  code.words_.assign(s.begin(), s.end());
  return code;
}

std::size_t PrefixCode::max_depth() const {
  std::size_t d = 0;
  for (const auto& w : words_) d = std::max(d, w.size());
  return d;
}

bool PrefixCode::covers(const Word& w) const {
  return std::any_of(words_.begin(), words_.end(), [&](const Word& u) { return is_prefix(u, w); });
}

std::vector<Word> PrefixCode::expand(std::size_t depth) const {
  if (depth < max_depth()) throw std::invalid_argument("expansion depth below the code depth");
  std::vector<Word> out;
  for (const auto& w : words_)
    for (const auto& tail : all_words(arity_, depth - w.size())) out.push_back(w + tail);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Word> all_words(int arity, std::size_t length) {
  std::vector<Word> out{Word{}};
  for (std::size_t k = 0; k < length; ++k) {
    std::vector<Word> next;
    next.reserve(out.size() * static_cast<std::size_t>(arity));
    for (const auto& w : out)
      for (int c = 0; c < arity; ++c) next.push_back(w + static_cast<char>('0' + c));
    out = std::move(next);
  }
  return out;
}

FinSubset::FinSubset(std::size_t ground_size, std::vector<int> points) : ground_size_(ground_size), points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  for (int x : points_)
    if (x < 0 || static_cast<std::size_t>(x) >= ground_size_) throw std::invalid_argument("point outside the ground set");
}

bool FinSubset::contains(int x) const { return std::binary_search(points_.begin(), points_.end(), x); }

bool Clopen::is_zero() const { return backend() == Backend::Finite ? finite().is_zero() : prefix().is_zero(); }

namespace {

std::string word_label(const Word& w) { return w.empty() ? "ε" : w; }

void require_same_backend(const Clopen& e, const Clopen& f) {
  if (e.backend() != f.backend()) throw BackendMismatch("clopens from different backends");
  if (e.backend() == Backend::Finite) {
    if (e.finite().ground_size() != f.finite().ground_size()) throw BackendMismatch("clopens over different ground sets");
  } else {
    require_arity(e.prefix().arity(), f.prefix().arity());
  }
}

PrefixCode complement_below(const PrefixCode& e, const Word& p) {
  if (e.covers(p)) return PrefixCode(e.arity());
  bool below = std::any_of(e.words().begin(), e.words().end(), [&](const Word& u) { return is_prefix(p, u); });
  if (!below) return PrefixCode::cylinder(e.arity(), p);
  std::vector<Word> out;
  for (int c = 0; c < e.arity(); ++c) {
    auto part = complement_below(e, p + static_cast<char>('0' + c));
    out.insert(out.end(), part.words().begin(), part.words().end());
  }
  return PrefixCode::from_words(e.arity(), std::move(out));
}

}  // namespace

std::string to_string(const Clopen& c) {
  std::string s = "{";
  if (c.backend() == Backend::Finite) {
    for (std::size_t i = 0; i < c.finite().points().size(); ++i)
      s += (i ? "," : "") + std::to_string(c.finite().points()[i]);
  } else {
    for (std::size_t i = 0; i < c.prefix().words().size(); ++i)
      s += (i ? "," : "") + word_label(c.prefix().words()[i]);
  }
  return s + "}";
}

Clopen meet(const Clopen& e, const Clopen& f) {
  require_same_backend(e, f);
  if (e.backend() == Backend::Finite) {
    std::vector<int> out;
    std::set_intersection(e.finite().points().begin(), e.finite().points().end(), f.finite().points().begin(),
                          f.finite().points().end(), std::back_inserter(out));
    return FinSubset(e.finite().ground_size(), out);
  }
  std::vector<Word> out;
  for (const auto& u : e.prefix().words())
    for (const auto& v : f.prefix().words()) {
      if (is_prefix(u, v))
        out.push_back(v);
      else if (is_prefix(v, u))
        out.push_back(u);
    }
  return PrefixCode::from_words(e.prefix().arity(), std::move(out));
}

Clopen join(const Clopen& e, const Clopen& f) {
  require_same_backend(e, f);
  if (e.backend() == Backend::Finite) {
    std::vector<int> out;
    std::set_union(e.finite().points().begin(), e.finite().points().end(), f.finite().points().begin(),
                   f.finite().points().end(), std::back_inserter(out));
    return FinSubset(e.finite().ground_size(), out);
  }
  std::vector<Word> out = e.prefix().words();
  out.insert(out.end(), f.prefix().words().begin(), f.prefix().words().end());
  return PrefixCode::from_words(e.prefix().arity(), std::move(out));
}

Clopen complement(const Clopen& e) {
  if (e.backend() == Backend::Finite) {
    std::vector<int> out;
    for (std::size_t x = 0; x < e.finite().ground_size(); ++x)
      if (!e.finite().contains(static_cast<int>(x))) out.push_back(static_cast<int>(x));
    return FinSubset(e.finite().ground_size(), out);
  }
  return complement_below(e.prefix(), Word{});
}

bool leq(const Clopen& e, const Clopen& f) { return meet(e, f) == e; }

std::variant<Clopen, bool> boolean_op(BooleanOp kind, const Clopen& e, const Clopen& f) {
  switch (kind) {
    case BooleanOp::Meet:
      return meet(e, f);
    case BooleanOp::Join:
      return join(e, f);
    case BooleanOp::Complement:
      return complement(e);
    case BooleanOp::Leq:
      return leq(e, f);
  }
  throw std::logic_error("unknown Boolean operation");
}

namespace {

void require_antichain(const std::vector<Word>& words, const char* side) {
  std::vector<Word> s = words;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (is_prefix(s[i], s[i + 1]))
      throw std::invalid_argument(std::string(side) + " words '" + s[i] + "' and '" + s[i + 1] + "' overlap");
}

std::vector<PrefixMap::Pair> merge_siblings(int arity, std::vector<PrefixMap::Pair> pairs) {
  std::map<Word, Word> m;
  for (auto& p : pairs) m.emplace(std::move(p.from), std::move(p.to));
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [from, to] : m) {
      if (from.empty() || from.back() != '0' || to.empty() || to.back() != '0') continue;
      Word p = parent(from), q = parent(to);
      bool full = true;
      for (int c = 1; c < arity && full; ++c) {
        auto it = m.find(p + static_cast<char>('0' + c));
        full = it != m.end() && it->second == q + static_cast<char>('0' + c);
      }
      if (!full) continue;
      for (int c = 0; c < arity; ++c) m.erase(p + static_cast<char>('0' + c));
      m.emplace(p, q);
      changed = true;
      break;
    }
  }
  std::vector<PrefixMap::Pair> out;
  for (auto& [from, to] : m) out.push_back({from, to});
  return out;
}

}  // namespace

PrefixMap PrefixMap::from_pairs(int arity, std::vector<Pair> pairs) {
  std::vector<Word> froms, tos;
  for (const auto& p : pairs) {
    validate_word(p.from, arity);
    validate_word(p.to, arity);
    froms.push_back(p.from);
    tos.push_back(p.to);
  }
  require_antichain(froms, "domain");
  require_antichain(tos, "range");
  PrefixMap m(arity);
  m.pairs_ = merge_siblings(arity, std::move(pairs));
  return m;
}

PrefixMap PrefixMap::from_codes(int arity, const std::vector<Word>& dom, const std::vector<Word>& ran,
                                const std::vector<int>& perm) {
  if (dom.size() != ran.size() || perm.size() != dom.size())
    throw std::invalid_argument("dom, ran and perm must have equal lengths");
  std::vector<char> seen(perm.size(), 0);
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (perm[i] < 0 || static_cast<std::size_t>(perm[i]) >= perm.size() || seen[perm[i]])
      throw std::invalid_argument("perm is not a permutation");
    seen[perm[i]] = 1;
    pairs.push_back({dom[i], ran[perm[i]]});
  }
  return from_pairs(arity, std::move(pairs));
}

PrefixMap PrefixMap::identity_on(const PrefixCode& e) {
  std::vector<Pair> pairs;
  for (const auto& w : e.words()) pairs.push_back({w, w});
  return from_pairs(e.arity(), std::move(pairs));
}

PrefixMap PrefixMap::generator(int arity, int letter) {
  if (letter < 0 || letter >= arity) throw std::invalid_argument("generator letter outside the alphabet");
  return from_pairs(arity, {{Word{}, Word(1, static_cast<char>('0' + letter))}});
}

PrefixCode PrefixMap::domain() const {
  std::vector<Word> w;
  for (const auto& p : pairs_) w.push_back(p.from);
  return PrefixCode::from_words(arity_, std::move(w));
}

PrefixCode PrefixMap::range() const {
  std::vector<Word> w;
  for (const auto& p : pairs_) w.push_back(p.to);
  return PrefixCode::from_words(arity_, std::move(w));
}

bool PrefixMap::is_idempotent() const {
  return std::all_of(pairs_.begin(), pairs_.end(), [](const Pair& p) { return p.from == p.to; });
}

std::size_t PrefixMap::max_depth() const {
  std::size_t d = 0;
  for (const auto& p : pairs_) d = std::max({d, p.from.size(), p.to.size()});
  return d;
}

std::optional<Word> PrefixMap::try_apply(const Word& w) const {
  for (const auto& p : pairs_)
    if (is_prefix(p.from, w)) return p.to + w.substr(p.from.size());
  return std::nullopt;
}

Word PrefixMap::apply(const Word& w) const {
  validate_word(w, arity_);
  auto r = try_apply(w);
  if (!r) throw WordOutsideDomain(w);
  return *r;
}

std::string to_string(const PrefixMap& m) {
  std::string s = "{";
  for (std::size_t i = 0; i < m.pairs().size(); ++i)
    s += (i ? ", " : "") + word_label(m.pairs()[i].from) + "->" + word_label(m.pairs()[i].to);
  return s + "}";
}

PrefixMap compose(const PrefixMap& a, const PrefixMap& b) {
  require_arity(a.arity(), b.arity());
  std::vector<PrefixMap::Pair> out;
  for (const auto& [u, v] : a.pairs())
    for (const auto& [x, y] : b.pairs()) {
      if (is_prefix(v, x))
        out.push_back({u + x.substr(v.size()), y});
      else if (is_prefix(x, v))
        out.push_back({u, y + v.substr(x.size())});
    }
  return PrefixMap::from_pairs(a.arity(), std::move(out));
}

PrefixMap star(const PrefixMap& a) {
  std::vector<PrefixMap::Pair> out;
  for (const auto& p : a.pairs()) out.push_back({p.to, p.from});
  return PrefixMap::from_pairs(a.arity(), std::move(out));
}

Relations relations(const PrefixMap& a, const PrefixMap& b) {
  require_arity(a.arity(), b.arity());
  Relations r;
  r.leq = compose(PrefixMap::identity_on(a.domain()), b) == a;
  PrefixMap left = compose(star(a), b), right = compose(a, star(b));
  r.compatible = left.is_idempotent() && right.is_idempotent();
  r.orthogonal = left.is_zero() && right.is_zero();
  return r;
}

PrefixMap join(std::span<const PrefixMap> parts) {
  if (parts.empty()) throw std::invalid_argument("join of an empty family has no alphabet");
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i + 1; j < parts.size(); ++j)
      if (!relations(parts[i], parts[j]).compatible) throw IncompatiblePair(i, j);
  std::map<Word, Word> all;
  for (const auto& p : parts)
    for (const auto& q : p.pairs()) all.emplace(q.from, q.to);
  std::vector<PrefixMap::Pair> kept;
  for (const auto& [from, to] : all) {
    bool covered = false;
    for (std::size_t k = 0; k < from.size() && !covered; ++k) covered = all.count(from.substr(0, k)) > 0;
    if (!covered) kept.push_back({from, to});
  }
  return PrefixMap::from_pairs(parts[0].arity(), std::move(kept));
}

bool agree_on_words(const PrefixMap& a, const PrefixMap& b, std::size_t length) {
  if (a.arity() != b.arity()) return false;
  for (const auto& w : all_words(a.arity(), length))
    if (a.try_apply(w) != b.try_apply(w)) return false;
  return true;
}

Clopen BimElement::source() const {
  if (backend() == Backend::Finite) return FinSubset(finite().ground_size(), finite().domain());
  return prefix().domain();
}

Clopen BimElement::target() const {
  if (backend() == Backend::Finite) return FinSubset(finite().ground_size(), finite().range());
  return prefix().range();
}

bool BimElement::is_zero() const { return backend() == Backend::Finite ? finite().is_zero() : prefix().is_zero(); }

bool BimElement::is_idempotent() const {
  return backend() == Backend::Finite ? finite().is_idempotent() : prefix().is_idempotent();
}

std::string to_string(const BimElement& s) {
  return s.backend() == Backend::Finite ? to_string(s.finite()) : to_string(s.prefix());
}

namespace {

void require_same_backend(const BimElement& a, const BimElement& b) {
  if (a.backend() != b.backend()) throw BackendMismatch("elements from different backends");
}

}  // namespace

BimElement bim_compose(const BimElement& a, const BimElement& b) {
  require_same_backend(a, b);
  if (a.backend() == Backend::Finite) return compose(a.finite(), b.finite());
  return compose(a.prefix(), b.prefix());
}

BimElement bim_star(const BimElement& a) {
  if (a.backend() == Backend::Finite) return star(a.finite());
  return star(a.prefix());
}

BimElement bim_join(std::span<const BimElement> parts) {
  if (parts.empty()) throw std::invalid_argument("join of an empty family");
  for (const auto& p : parts) require_same_backend(parts[0], p);
  if (parts[0].backend() == Backend::Finite) {
    std::vector<PartialBijection> v;
    for (const auto& p : parts) v.push_back(p.finite());
    return join(v);
  }
  std::vector<PrefixMap> v;
  for (const auto& p : parts) v.push_back(p.prefix());
  return join(v);
}

Relations bim_relations(const BimElement& a, const BimElement& b) {
  require_same_backend(a, b);
  if (a.backend() == Backend::Finite) return relations(a.finite(), b.finite());
  return relations(a.prefix(), b.prefix());
}

BimElement identity_on(const Clopen& e) {
  if (e.backend() == Backend::Finite) return e.finite().idempotent();
  return PrefixMap::identity_on(e.prefix());
}

BimElement restrict_to(const BimElement& s, const Clopen& e) { return bim_compose(identity_on(e), s); }

BimInstance BimInstance::finite(FiniteInverseMonoid m) {
  BimInstance inst;
  inst.backend = Backend::Finite;
  inst.monoid = std::move(m);
  return inst;
}

BimInstance BimInstance::polycyclic(int arity) {
  BimInstance inst;
  inst.backend = Backend::Prefix;
  inst.arity = arity;
  for (int i = 0; i < arity; ++i) inst.generators.push_back(PrefixMap::generator(arity, i));
  return inst;
}

Clopen BimInstance::unit() const {
  if (backend == Backend::Prefix) return PrefixCode::unit(arity);
  if (!monoid) throw std::invalid_argument("finite instance without a monoid");
  if (auto id = monoid->identity()) return FinSubset(monoid->ground_size(), (*monoid)[*id].domain());
  std::vector<int> support;
  for (const auto& s : monoid->elements()) {
    auto d = s.domain();
    support.insert(support.end(), d.begin(), d.end());
  }
  return FinSubset(monoid->ground_size(), support);
}

std::vector<std::vector<int>> BimInstance::atoms() const {
  if (backend != Backend::Finite || !monoid) throw std::invalid_argument("atoms are defined for finite instances");
  auto idem = monoid->idempotents();
  std::map<std::vector<char>, std::size_t> slot;
  std::vector<std::vector<int>> out;
  const Clopen support = unit();
  for (int x : support.finite().points()) {
    std::vector<char> sig;
    for (auto e : idem) sig.push_back((*monoid)[e].defined_at(static_cast<std::size_t>(x)) ? 1 : 0);
    auto [it, fresh] = slot.emplace(sig, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(x);
  }
  return out;
}

bool refine_leaves(std::vector<Word>& leaves, int arity, std::size_t count, std::size_t& budget) {
  while (leaves.size() < count) {
    if (leaves.empty()) return false;
    if (budget == 0) return false;
    --budget;
    auto pick = std::min_element(leaves.begin(), leaves.end(), [](const Word& a, const Word& b) {
      return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
    Word w = *pick;
    leaves.erase(pick);
    for (int c = 0; c < arity; ++c) leaves.push_back(w + static_cast<char>('0' + c));
  }
  return true;
}

DWitnessResult d_witness(const BimInstance& instance, const Clopen& e, const Clopen& f, std::size_t budget) {
  require_same_backend(e, f);
  DWitnessResult r;
  if (e.backend() == Backend::Finite) {
    if (!instance.monoid) throw std::invalid_argument("finite witness search needs a monoid");
    const auto& m = *instance.monoid;
    std::size_t limit = std::min(budget, m.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (m[i].domain() == e.finite().points() && m[i].range() == f.finite().points()) {
        r.witness = BimElement(m[i]);
        return r;
      }
    }
    r.exhaustive = limit == m.size();
    return r;
  }

  const int n = e.prefix().arity();
  if (e.is_zero() || f.is_zero()) {
    if (e.is_zero() && f.is_zero()) r.witness = BimElement(PrefixMap(n));
    return r;
  }
  if (e == f) {
    r.witness = identity_on(e);
    return r;
  }
  std::vector<Word> a = e.prefix().words(), b = f.prefix().words();
  const long long gap = static_cast<long long>(a.size()) - static_cast<long long>(b.size());
  if (gap % (n - 1) != 0) return r;
  std::size_t splits = budget;
  bool ok = a.size() < b.size() ? refine_leaves(a, n, b.size(), splits) : refine_leaves(b, n, a.size(), splits);
  if (!ok) {
    r.exhaustive = false;
    return r;
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<PrefixMap::Pair> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) pairs.push_back({a[i], b[i]});
  BimElement s = PrefixMap::from_pairs(n, std::move(pairs));
  if (s.source() != e || s.target() != f) throw std::logic_error("d_witness recheck failed");
  r.witness = std::move(s);
  return r;
}

std::string to_string(MeanVerdict v) {
  switch (v) {
    case MeanVerdict::Feasible:
      return "feasible";
    case MeanVerdict::Infeasible:
      return "infeasible";
    case MeanVerdict::FeasibleUpToDepth:
      return "feasible_up_to_depth";
  }
  return "unknown";
}

std::vector<std::string> Mean::labels() const {
  std::vector<std::string> out;
  if (backend == Backend::Finite) {
    for (const auto& a : atoms) out.push_back(to_string(Clopen(FinSubset(normalization.finite().ground_size(), a))));
  } else {
    for (const auto& w : cylinders) out.push_back(word_label(w));
  }
  return out;
}

namespace {

/// Coefficient vector of a clopen over the variables; throws when the
/// clopen is not a union of them.
std::vector<Rational> indicator(const Mean& shape, const Clopen& e) {
  std::vector<Rational> v(shape.weights.size(), Rational(0));
  if (shape.backend == Backend::Finite) {
    for (std::size_t i = 0; i < shape.atoms.size(); ++i) {
      std::size_t in = 0;
      for (int x : shape.atoms[i]) in += e.finite().contains(x) ? 1 : 0;
      if (in != 0 && in != shape.atoms[i].size())
        throw std::invalid_argument("clopen " + to_string(e) + " splits an atom");
      if (in) v[i] = 1;
    }
    return v;
  }
  const std::size_t depth = shape.cylinders.empty() ? 0 : shape.cylinders[0].size();
  for (const auto& w : e.prefix().expand(depth)) {
    auto it = std::lower_bound(shape.cylinders.begin(), shape.cylinders.end(), w);
    v[static_cast<std::size_t>(it - shape.cylinders.begin())] = 1;
  }
  return v;
}

struct Constraint {
  BimElement element;
  std::string label;
};

/// The elements whose source and target measures must agree.
std::vector<Constraint> mean_constraints(const BimInstance& inst, std::size_t depth) {
  std::vector<Constraint> out;
  if (inst.backend == Backend::Finite) {
    for (const auto& s : inst.monoid->elements())
      if (!s.is_zero() && !s.is_idempotent()) out.push_back({s, to_string(s)});
    return out;
  }
  for (std::size_t g = 0; g < inst.generators.size(); ++g)
    for (std::size_t len = 0; len <= depth; ++len)
      for (const auto& w : all_words(inst.arity, len)) {
        PrefixMap r = compose(PrefixMap::identity_on(PrefixCode::cylinder(inst.arity, w)), inst.generators[g]);
        if (r.is_zero() || r.domain().max_depth() > depth || r.range().max_depth() > depth) continue;
        out.push_back({r, "g" + std::to_string(g) + "|" + word_label(w)});
      }
  return out;
}

Mean mean_shape(const BimInstance& inst, std::size_t depth, const Clopen& norm) {
  Mean m;
  m.backend = inst.backend;
  m.normalization = norm;
  if (inst.backend == Backend::Finite) {
    m.atoms = inst.atoms();
    m.weights.assign(m.atoms.size(), Rational(0));
  } else {
    m.cylinders = all_words(inst.arity, depth);
    m.weights.assign(m.cylinders.size(), Rational(0));
  }
  return m;
}

void build_problem(const BimInstance& inst, const Mean& shape, std::size_t depth, lp::Problem& p,
                   std::vector<std::string>& labels) {
  p.num_vars = shape.weights.size();
  std::set<std::vector<Rational>> seen;
  for (const auto& c : mean_constraints(inst, depth)) {
    auto src = indicator(shape, c.element.source());
    auto dst = indicator(shape, c.element.target());
    std::vector<Rational> row(p.num_vars);
    bool trivial = true;
    for (std::size_t j = 0; j < p.num_vars; ++j) {
      row[j] = src[j] - dst[j];
      if (!is_zero(row[j])) trivial = false;
    }
    if (trivial || !seen.insert(row).second) continue;
    std::string label =
        "mu(" + to_string(c.element.source()) + ") = mu(" + to_string(c.element.target()) + ") via " + c.label;
    p.add_row(std::move(row), 0, label);
    labels.push_back(std::move(label));
  }
  std::string label = "mu(" + to_string(shape.normalization) + ") = 1";
  p.add_row(indicator(shape, shape.normalization), 1, label);
  labels.push_back(std::move(label));
}

}  // namespace

Rational Mean::measure(const Clopen& e) const {
  auto v = indicator(*this, e);
  Rational total = 0;
  for (std::size_t i = 0; i < v.size(); ++i) total += v[i] * weights[i];
  return total;
}

MeanResult invariant_mean(const BimInstance& instance, std::size_t depth, std::optional<Clopen> normalization) {
  if (depth < 1) throw std::invalid_argument("depth must be at least 1");
  if (instance.backend == Backend::Finite && !instance.monoid)
    throw std::invalid_argument("finite instance without a monoid");
  Clopen norm = normalization ? *normalization : instance.unit();
  if (norm.backend() != instance.backend) throw BackendMismatch("normalization from another backend");

  MeanResult r;
  r.depth = instance.backend == Backend::Prefix ? depth : 0;
  r.normalization = norm;
  Mean shape = mean_shape(instance, depth, norm);
  build_problem(instance, shape, depth, r.problem, r.constraints);
  auto sol = lp::solve(r.problem);
  if (sol.status == lp::Status::Infeasible) {
    r.verdict = MeanVerdict::Infeasible;
    r.certificate = sol.certificate;
    return r;
  }
  shape.weights = sol.x;
  r.mean = std::move(shape);
  r.verdict = instance.backend == Backend::Finite ? MeanVerdict::Feasible : MeanVerdict::FeasibleUpToDepth;
  return r;
}

namespace {

lp::Result optimize_weight(const lp::Problem& base, std::size_t j, int sign) {
  lp::Problem p = base;
  p.cost.assign(p.num_vars, Rational(0));
  p.cost[j] = sign;
  return lp::solve(p);
}

}  // namespace

bool mean_is_unique(const MeanResult& r) {
  if (!r.mean) return false;
  for (std::size_t j = 0; j < r.problem.num_vars; ++j) {
    auto lo = optimize_weight(r.problem, j, 1);
    auto hi = optimize_weight(r.problem, j, -1);
    if (hi.status != lp::Status::Optimal || lo.value != -hi.value) return false;
  }
  return true;
}

FaithfulMean faithful_mean(const MeanResult& r) {
  FaithfulMean out;
  if (!r.mean) return out;
  const std::size_t n = r.problem.num_vars;
  std::vector<Rational> sum(n, Rational(0));
  out.exists = true;
  for (std::size_t j = 0; j < n; ++j) {
    auto hi = optimize_weight(r.problem, j, -1);
    std::vector<Rational> x;
    if (hi.status == lp::Status::Unbounded) {
      // the weight is unbounded above, so it can be pinned one above any feasible value
      lp::Problem p = r.problem;
      std::vector<Rational> row(n, Rational(0));
      row[j] = 1;
      p.add_row(row, r.mean->weights[j] + 1);
      x = lp::solve(p).x;
      out.max_weight.push_back(x[j]);
    } else {
      x = hi.x;
      out.max_weight.push_back(-hi.value);
    }
    if (sgn(out.max_weight.back()) <= 0) out.exists = false;
    for (std::size_t i = 0; i < n; ++i) sum[i] += x[i];
  }
  if (!out.exists) return out;
  Mean m = *r.mean;
  for (std::size_t i = 0; i < n; ++i) m.weights[i] = sum[i] / Rational(static_cast<long>(n));
  out.mean = std::move(m);
  return out;
}

bool recheck_mean(const BimInstance& instance, const MeanResult& r) {
  std::size_t depth = instance.backend == Backend::Prefix ? r.depth : 1;
  if (r.verdict == MeanVerdict::Infeasible) {
    if (!r.certificate) return false;
    lp::Problem rebuilt;
    std::vector<std::string> labels;
    Mean shape = mean_shape(instance, depth, r.normalization);
    build_problem(instance, shape, depth, rebuilt, labels);
    bool same_rows = rebuilt.rows == r.problem.rows && rebuilt.rhs == r.problem.rhs;
    return same_rows && lp::certificate_valid(rebuilt, *r.certificate);
  }
  if (!r.mean) return false;
  const Mean& m = *r.mean;
  for (const auto& w : m.weights)
    if (sgn(w) < 0) return false;
  if (m.measure(m.normalization) != 1) return false;
  for (const auto& c : mean_constraints(instance, depth))
    if (m.measure(c.element.source()) != m.measure(c.element.target())) return false;
  return true;
}

std::vector<Rational> unit_space_measure(const Mean& m, std::size_t ground_size) {
  if (m.backend != Backend::Finite) throw std::invalid_argument("point measures need the finite backend");
  std::vector<Rational> nu(ground_size, Rational(0));
  for (std::size_t i = 0; i < m.atoms.size(); ++i)
    for (int x : m.atoms[i]) nu[static_cast<std::size_t>(x)] = m.weights[i] / Rational(static_cast<long>(m.atoms[i].size()));
  return nu;
}

}  // namespace tarski
