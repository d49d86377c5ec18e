#include "tarski/paradox.hpp"

#include <algorithm>
#include <stdexcept>

namespace tarski {

TarskiCheck check_tarski(const TarskiMatrix& t) {
  TarskiCheck c;
  for (const auto& a : t.entries)
    if (a.backend() != t.base.backend()) throw BackendMismatch("Tarski entry from another backend");
  c.degree_ok = t.degree() >= 2;
  if (!c.degree_ok) c.failures.push_back("degree " + std::to_string(t.degree()) + " is below 2");
  c.base_nonzero = !t.base.is_zero();
  if (!c.base_nonzero) c.failures.push_back("base is zero");
  c.sources_ok = c.ranges_inside = c.ranges_disjoint = true;
  for (std::size_t i = 0; i < t.degree(); ++i) {
    const auto& a = t.entries[i];
    if (a.source() != t.base) {
      c.sources_ok = false;
      c.failures.push_back("entry " + std::to_string(i) + " has source " + to_string(a.source()));
    }
    if (!leq(a.target(), t.base)) {
      c.ranges_inside = false;
      c.failures.push_back("entry " + std::to_string(i) + " has range outside the base");
    }
    for (std::size_t j = i + 1; j < t.degree(); ++j)
      if (!meet(a.target(), t.entries[j].target()).is_zero()) {
        c.ranges_disjoint = false;
        c.failures.push_back("ranges of entries " + std::to_string(i) + " and " + std::to_string(j) + " meet");
      }
  }
  return c;
}

namespace {

TarskiSearch search_finite(const BimInstance& inst, const Clopen& e, std::size_t k, std::size_t budget) {
  const auto& m = *inst.monoid;
  // only the range of a candidate matters for disjointness
  std::vector<std::size_t> cand;
  std::vector<Clopen> ranges;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].domain() != e.finite().points()) continue;
    Clopen r = FinSubset(m.ground_size(), m[i].range());
    if (!leq(r, e) || std::find(ranges.begin(), ranges.end(), r) != ranges.end()) continue;
    cand.push_back(i);
    ranges.push_back(r);
  }
  TarskiSearch out;
  std::vector<std::size_t> pick;
  bool cut = false;
  auto rec = [&](auto&& self, std::size_t start, const Clopen& used) -> bool {
    if (pick.size() == k) return true;
    for (std::size_t c = start; c < cand.size(); ++c) {
      if (out.nodes >= budget) {
        cut = true;
        return false;
      }
      ++out.nodes;
      if (!meet(used, ranges[c]).is_zero()) continue;
      pick.push_back(c);
      if (self(self, c + 1, join(used, ranges[c]))) return true;
      pick.pop_back();
    }
    return false;
  };
  if (rec(rec, 0, Clopen(FinSubset(m.ground_size(), {})))) {
    TarskiMatrix t{e, {}};
    for (auto c : pick) t.entries.emplace_back(m[cand[c]]);
    out.matrix = std::move(t);
  }
  out.exhaustive = !cut;
  return out;
}

TarskiSearch construct_prefix(const BimInstance& inst, const Clopen& e, std::size_t k, std::size_t budget) {
  const int n = e.prefix().arity();
  std::vector<Word> leaves = e.prefix().words();
  const std::size_t r = (leaves.size() - 1) % static_cast<std::size_t>(n - 1) + 1;
  TarskiSearch out;
  std::size_t splits = budget;
  if (!refine_leaves(leaves, n, k * r, splits)) {
    out.exhaustive = false;
    return out;
  }
  std::sort(leaves.begin(), leaves.end());
  TarskiMatrix t{e, {}};
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<Word> piece(leaves.begin() + static_cast<long>(i * r), leaves.begin() + static_cast<long>((i + 1) * r));
    auto w = d_witness(inst, e, Clopen(PrefixCode::from_words(n, piece)), budget);
    ++out.nodes;
    if (!w.witness) {
      out.exhaustive = false;
      return out;
    }
    t.entries.push_back(*w.witness);
  }
  out.matrix = std::move(t);
  return out;
}

}  // namespace

TarskiSearch find_tarski(const BimInstance& instance, const Clopen& e, std::size_t degree, std::size_t budget) {
  if (degree < 2) throw std::invalid_argument("degree must be at least 2");
  if (e.is_zero()) throw std::invalid_argument("base must be nonzero");
  if (e.backend() != instance.backend) throw BackendMismatch("base from another backend");
  TarskiSearch r = instance.backend == Backend::Finite ? search_finite(instance, e, degree, budget)
                                                       : construct_prefix(instance, e, degree, budget);
  if (r.matrix && !check_tarski(*r.matrix).ok()) throw std::logic_error("constructed Tarski matrix fails its check");
  return r;
}

Normalization normalize_paradoxicality(const BimInstance& instance, const Clopen& e, std::size_t k, std::size_t l,
                                       std::size_t budget) {
  if (l < 1 || k <= l) throw std::invalid_argument("need k > l >= 1");
  Normalization out;
  out.k = k;
  out.l = l;
  TypeElement x({e});
  out.comparison = type_compare(instance, type_scale(x, k), type_scale(x, l), budget);
  out.kl_paradoxical = out.comparison.verdict == Comparison::Equal || out.comparison.verdict == Comparison::Leq;
  out.degree_two = find_tarski(instance, e, 2, budget);
  if (instance.backend == Backend::Finite) {
    out.dj_equal = green_classify(*instance.monoid).dj_equal;
    auto rep = almost_unperforated(instance, 3, 2, default_pool(instance));
    out.unperforated_within_bounds = rep.violations.empty() && rep.unknown == 0;
  }
  out.hypotheses_verified = out.dj_equal && out.unperforated_within_bounds;
  return out;
}

namespace {

Word strip_zeros(Word w) {
  while (!w.empty() && w.back() == '0') w.pop_back();
  return w;
}

bool shortlex(const Word& a, const Word& b) { return a.size() != b.size() ? a.size() < b.size() : a < b; }

}  // namespace

std::optional<Word> orbit_apply(const PrefixMap& s, const Word& point) {
  for (const auto& [u, v] : s.pairs()) {
    Word padded = point;
    if (padded.size() < u.size()) padded.resize(u.size(), '0');
    if (is_prefix(u, padded)) return strip_zeros(v + padded.substr(u.size()));
  }
  return std::nullopt;
}

OrbitRep::OrbitRep(int arity, std::vector<Word> points) : arity_(arity) {
  for (auto& p : points) {
    validate_word(p, arity);
    points_.push_back(strip_zeros(p));
  }
  std::sort(points_.begin(), points_.end(), shortlex);
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

OrbitRep OrbitRep::window(int arity, std::size_t depth, const std::vector<PrefixMap>& maps) {
  std::vector<Word> pts;
  for (std::size_t len = 0; len <= depth; ++len)
    for (const auto& w : all_words(arity, len)) pts.push_back(strip_zeros(w));
  std::vector<Word> base = pts;
  for (const auto& m : maps)
    for (const auto& s : {m, star(m)})
      for (const auto& w : base)
        if (auto y = orbit_apply(s, w)) pts.push_back(*y);
  return OrbitRep(arity, std::move(pts));
}

std::optional<std::size_t> OrbitRep::index_of(const Word& point) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), point, shortlex);
  if (it == points_.end() || *it != point) return std::nullopt;
  return static_cast<std::size_t>(it - points_.begin());
}

RatMatrix OrbitRep::operator()(const PrefixMap& s) const {
  if (s.arity() != arity_) throw BackendMismatch("map over another alphabet");
  RatMatrix m(dim(), dim());
  for (std::size_t x = 0; x < dim(); ++x)
    if (auto y = orbit_apply(s, points_[x]))
      if (auto j = index_of(*y)) m(*j, x) = 1;
  return m;
}

RatMatrix OrbitRep::window_projection(std::size_t depth) const {
  RatMatrix p(dim(), dim());
  for (std::size_t x = 0; x < dim(); ++x)
    if (points_[x].size() <= depth) p(x, x) = 1;
  return p;
}

ProjectionCheck infinite_projection_check(const TarskiMatrix& t, const OrbitRep& rep, std::size_t window_depth) {
  ProjectionCheck out;
  out.dim = rep.dim();
  out.precondition = check_tarski(t).ok();
  if (!out.precondition) return out;
  if (t.base.backend() != Backend::Prefix) throw BackendMismatch("orbit representations act on prefix maps");

  const std::size_t d = rep.dim(), k = t.degree();
  for (const auto& a : t.entries)
    for (const auto& w : rep.points())
      if (w.size() <= window_depth)
        if (auto y = orbit_apply(a.prefix(), w); y && !rep.index_of(*y))
          throw std::out_of_range("representation misses the image of " + (w.empty() ? std::string("0^inf") : w));

  RatMatrix p = rep.window_projection(window_depth);
  RatMatrix e = rep(PrefixMap::identity_on(t.base.prefix()));
  RatMatrix pep = p * e * p;
  RatMatrix v(d, k * d);
  for (std::size_t i = 0; i < k; ++i) {
    RatMatrix block = rep(t.entries[i].prefix()) * p;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) v(r, i * d + c) = block(r, c);
  }
  RatMatrix vt = v.transpose();
  out.isometry = vt * v == direct_sum(std::vector<RatMatrix>(k, pep));
  RatMatrix range = v * vt;
  out.range_projection = is_orthogonal_projection(range) && e * range == range;
  std::vector<RatMatrix> q{range};
  for (std::size_t i = 1; i < k; ++i) q.push_back(RatMatrix(d, d));
  RatMatrix qq = direct_sum(q), rr = direct_sum(std::vector<RatMatrix>(k, e));
  out.proper = rr * qq == qq && !(qq == rr);
  out.window_rank = rank(pep);
  return out;
}

P2Pair p2_from_tarski(const TarskiMatrix& t) {
  if (t.degree() != 2) throw std::invalid_argument("degree must be 2");
  auto c = check_tarski(t);
  if (!c.ok()) throw std::invalid_argument("not a Tarski matrix: " + c.failures.front());
  P2Pair out{t.entries[0], t.entries[1], false, std::nullopt};
  out.tight = join(out.s.target(), out.t.target()) == t.base;
  if (out.tight) return out;
  if (t.base.backend() == Backend::Finite) throw std::domain_error("finite pairs cannot be tightened");
  Clopen rest = meet(t.base, complement(out.s.target()));
  auto w = d_witness(BimInstance::polycyclic(t.base.prefix().arity()), t.base, rest);
  if (!w.witness) throw std::domain_error("no element maps the base onto the complement of the first range");
  out.tightened = std::make_pair(out.s, *w.witness);
  return out;
}

}  // namespace tarski
