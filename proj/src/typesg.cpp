#include "tarski/typesg.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "tarski/matching.hpp"

namespace tarski {

TypeElement::TypeElement(std::vector<Clopen> summands) {
  for (auto& c : summands) {
    if (!summands_.empty() && summands_.front().backend() != c.backend())
      throw BackendMismatch("type element mixes backends");
    if (!c.is_zero()) summands_.push_back(std::move(c));
  }
  std::sort(summands_.begin(), summands_.end());
}

std::string to_string(const TypeElement& x) {
  if (x.is_zero()) return "0";
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? " + " : "") + std::string("[") + to_string(x.summands()[i]) + "]";
  return s;
}

TypeElement type_add(const TypeElement& x, const TypeElement& y) {
  if (!x.is_zero() && !y.is_zero() && x.summands()[0].backend() != y.summands()[0].backend())
    throw BackendMismatch("type elements from different backends");
  std::vector<Clopen> all = x.summands();
  all.insert(all.end(), y.summands().begin(), y.summands().end());
  return TypeElement(std::move(all));
}

TypeElement type_scale(const TypeElement& x, std::size_t k) {
  std::vector<Clopen> all;
  for (std::size_t i = 0; i < k; ++i) all.insert(all.end(), x.summands().begin(), x.summands().end());
  return TypeElement(std::move(all));
}

std::string to_string(Comparison c) {
  switch (c) {
    case Comparison::Equal:
      return "equal";
    case Comparison::Leq:
      return "leq";
    case Comparison::NotLeq:
      return "not_leq";
    case Comparison::Unknown:
      return "unknown";
  }
  return "unknown";
}

namespace {

struct AtomSlot {
  std::size_t slot;
  std::size_t atom;
};

std::vector<AtomSlot> atom_slots(const TypeElement& x, const std::vector<std::vector<int>>& atoms,
                                 const std::vector<int>& atom_of) {
  std::vector<AtomSlot> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& c = x.summands()[i];
    if (c.backend() != Backend::Finite) throw BackendMismatch("prefix summand in a finite instance");
    std::vector<char> used(atoms.size(), 0);
    for (int p : c.finite().points()) {
      if (static_cast<std::size_t>(p) >= atom_of.size() || atom_of[p] < 0)
        throw std::invalid_argument("summand " + to_string(c) + " leaves the support of the monoid");
      used[atom_of[p]] = 1;
    }
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      if (!used[a]) continue;
      for (int p : atoms[a])
        if (!c.finite().contains(p)) throw std::invalid_argument("summand " + to_string(c) + " splits an atom");
      out.push_back({i, a});
    }
  }
  return out;
}

CompareResult compare_finite(const BimInstance& inst, const TypeElement& x, const TypeElement& y) {
  const auto& m = *inst.monoid;
  auto atoms = inst.atoms();
  std::vector<int> atom_of(m.ground_size(), -1);
  for (std::size_t a = 0; a < atoms.size(); ++a)
    for (int p : atoms[a]) atom_of[p] = static_cast<int>(a);

  // carrier[A][B]: index of an element mapping atom A exactly onto atom B
  std::vector<std::vector<long>> carrier(atoms.size(), std::vector<long>(atoms.size(), -1));
  for (std::size_t s = 0; s < m.size(); ++s)
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      if (!m[s].defined_at(atoms[a][0])) continue;
      int b = atom_of[m[s](atoms[a][0])];
      if (b >= 0 && carrier[a][b] < 0) carrier[a][b] = static_cast<long>(s);
    }

  auto left = atom_slots(x, atoms, atom_of), right = atom_slots(y, atoms, atom_of);
  BipartiteGraph g(left.size(), right.size());
  for (std::size_t u = 0; u < left.size(); ++u)
    for (std::size_t v = 0; v < right.size(); ++v)
      if (carrier[left[u].atom][right[v].atom] >= 0) g.adj[u].push_back(static_cast<int>(v));
  auto match = max_matching(g);

  CompareResult r;
  r.exhaustive = true;
  if (match.size < left.size()) {
    r.verdict = Comparison::NotLeq;
    return r;
  }
  EquivalenceWitness w;
  for (std::size_t u = 0; u < left.size(); ++u) {
    const auto& v = right[match.mate_left[u]];
    const auto& s = m[carrier[left[u].atom][v.atom]];
    FinSubset piece(m.ground_size(), atoms[left[u].atom]);
    w.blocks.push_back({BimElement(compose(piece.idempotent(), s)), left[u].slot, v.slot});
  }
  r.verdict = left.size() == right.size() ? Comparison::Equal : Comparison::Leq;
  r.witness = std::move(w);
  return r;
}

struct Leaf {
  Word word;
  std::size_t slot;
};

std::vector<Leaf> leaves_of(const TypeElement& x) {
  std::vector<Leaf> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.summands()[i].backend() != Backend::Prefix) throw BackendMismatch("finite summand in a prefix instance");
    for (const auto& w : x.summands()[i].prefix().words()) out.push_back({w, i});
  }
  return out;
}

bool refine(std::vector<Leaf>& leaves, int n, std::size_t count, std::size_t& budget) {
  while (leaves.size() < count) {
    if (budget == 0 || leaves.empty()) return false;
    --budget;
    auto pick = std::min_element(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) {
      if (a.word.size() != b.word.size()) return a.word.size() > b.word.size();
      return a.slot != b.slot ? a.slot < b.slot : a.word < b.word;
    });
    Leaf l = *pick;
    leaves.erase(pick);
    for (int c = 0; c < n; ++c) leaves.push_back({l.word + static_cast<char>('0' + c), l.slot});
  }
  return true;
}

CompareResult compare_prefix(const BimInstance& inst, const TypeElement& x, const TypeElement& y,
                             std::size_t budget) {
  const int n = inst.arity;
  CompareResult r;
  r.exhaustive = true;
  if (x.is_zero()) {
    r.verdict = y.is_zero() ? Comparison::Equal : Comparison::Leq;
    r.witness = EquivalenceWitness{};
    return r;
  }
  if (y.is_zero()) {
    r.verdict = Comparison::NotLeq;
    return r;
  }
  auto left = leaves_of(x), right = leaves_of(y);
  const long long gap = static_cast<long long>(left.size()) - static_cast<long long>(right.size());
  const bool can_equal = gap % (n - 1) == 0;
  std::size_t splits = budget;
  bool ok;
  if (can_equal)
    ok = left.size() < right.size() ? refine(left, n, right.size(), splits) : refine(right, n, left.size(), splits);
  else
    ok = refine(right, n, left.size(), splits);
  if (!ok) {
    r.verdict = Comparison::Unknown;
    r.exhaustive = false;
    return r;
  }
  auto by_slot = [](const Leaf& a, const Leaf& b) { return a.slot != b.slot ? a.slot < b.slot : a.word < b.word; };
  std::sort(left.begin(), left.end(), by_slot);
  std::sort(right.begin(), right.end(), by_slot);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<PrefixMap::Pair>> groups;
  for (std::size_t i = 0; i < left.size(); ++i)
    groups[{left[i].slot, right[i].slot}].push_back({left[i].word, right[i].word});
  EquivalenceWitness w;
  for (auto& [slots, pairs] : groups)
    w.blocks.push_back({BimElement(PrefixMap::from_pairs(n, std::move(pairs))), slots.first, slots.second});
  r.verdict = can_equal ? Comparison::Equal : Comparison::Leq;
  r.witness = std::move(w);
  return r;
}

bool pieces_fill(const std::vector<Clopen>& pieces, const Clopen& whole, bool cover) {
  if (pieces.empty()) return !cover || whole.is_zero();
  Clopen acc = pieces[0];
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    if (!meet(acc, pieces[i]).is_zero()) return false;
    acc = join(acc, pieces[i]);
  }
  return cover ? acc == whole : leq(acc, whole);
}

}  // namespace

CompareResult type_compare(const BimInstance& instance, const TypeElement& x, const TypeElement& y,
                           std::size_t budget) {
  if (instance.backend == Backend::Finite) {
    if (!instance.monoid) throw std::invalid_argument("finite instance without a monoid");
    return compare_finite(instance, x, y);
  }
  return compare_prefix(instance, x, y, budget);
}

bool recheck_witness(const BimInstance& instance, const TypeElement& x, const TypeElement& y,
                     const EquivalenceWitness& w, bool equal) {
  std::vector<std::vector<Clopen>> sources(x.size()), targets(y.size());
  for (const auto& b : w.blocks) {
    if (b.element.backend() != instance.backend) return false;
    if (b.source_slot >= x.size() || b.target_slot >= y.size()) return false;
    if (instance.backend == Backend::Finite) {
      const auto& e = b.element.finite();
      if (e.ground_size() != instance.monoid->ground_size()) return false;
      bool inside = std::any_of(instance.monoid->elements().begin(), instance.monoid->elements().end(),
                                [&](const PartialBijection& s) { return relations(e, s).leq; });
      if (!inside) return false;
    } else if (b.element.prefix().arity() != instance.arity) {
      return false;
    }
    sources[b.source_slot].push_back(b.element.source());
    targets[b.target_slot].push_back(b.element.target());
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!pieces_fill(sources[i], x.summands()[i], true)) return false;
  for (std::size_t j = 0; j < y.size(); ++j)
    if (!pieces_fill(targets[j], y.summands()[j], equal)) return false;
  return true;
}

EquivalenceWitness compose_witnesses(const EquivalenceWitness& xy, const EquivalenceWitness& yz) {
  EquivalenceWitness out;
  for (const auto& b1 : xy.blocks)
    for (const auto& b2 : yz.blocks) {
      if (b1.target_slot != b2.source_slot) continue;
      BimElement c = bim_compose(b1.element, b2.element);
      if (!c.is_zero()) out.blocks.push_back({std::move(c), b1.source_slot, b2.target_slot});
    }
  return out;
}

std::vector<Clopen> default_pool(const BimInstance& instance) {
  std::vector<Clopen> pool;
  if (instance.backend == Backend::Finite) {
    for (auto e : instance.monoid->idempotents()) {
      const auto& p = (*instance.monoid)[e];
      if (!p.is_zero()) pool.push_back(FinSubset(p.ground_size(), p.domain()));
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    return pool;
  }
  for (std::size_t len = 0; len <= 1; ++len)
    for (const auto& w : all_words(instance.arity, len)) pool.push_back(PrefixCode::cylinder(instance.arity, w));
  return pool;
}

namespace {

void multisets(const std::vector<Clopen>& pool, std::size_t max_size, std::vector<Clopen>& cur, std::size_t start,
               std::vector<TypeElement>& out) {
  out.emplace_back(cur);
  if (cur.size() == max_size) return;
  for (std::size_t i = start; i < pool.size(); ++i) {
    cur.push_back(pool[i]);
    multisets(pool, max_size, cur, i, out);
    cur.pop_back();
  }
}

}  // namespace

PerforationReport almost_unperforated(const BimInstance& instance, std::size_t n_max, std::size_t size_bound,
                                      const std::vector<Clopen>& pool, Exec exec) {
  if (n_max < 1 || size_bound < 1) throw std::invalid_argument("bounds must be positive");
  std::vector<TypeElement> elems;
  std::vector<Clopen> cur;
  multisets(pool, size_bound, cur, 0, elems);

  const std::size_t total = elems.size() * elems.size();
  std::vector<std::vector<PerforationViolation>> found(total);
  std::vector<std::size_t> unknown(total, 0);
  auto task = [&](std::size_t k) {
    const auto& x = elems[k / elems.size()];
    const auto& y = elems[k % elems.size()];
    auto direct = type_compare(instance, x, y);
    if (direct.verdict == Comparison::Equal || direct.verdict == Comparison::Leq) return;
    for (std::size_t n = 1; n <= n_max; ++n) {
      auto scaled = type_compare(instance, type_scale(x, n + 1), type_scale(y, n));
      if (scaled.verdict == Comparison::Unknown) {
        ++unknown[k];
      } else if (scaled.verdict != Comparison::NotLeq) {
        if (direct.verdict == Comparison::Unknown)
          ++unknown[k];
        else
          found[k].push_back({x, y, n});
      }
    }
  };
  for_each_index(total, exec, [&](std::size_t i) { task(i); });
  PerforationReport rep;
  rep.checked = total * n_max;
  for (std::size_t k = 0; k < total; ++k) {
    rep.unknown += unknown[k];
    for (auto& v : found[k]) rep.violations.push_back(std::move(v));
  }
  return rep;
}

}  // namespace tarski
