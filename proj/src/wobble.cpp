#include "tarski/wobble.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "tarski/matching.hpp"

namespace tarski {

std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::Path:
      return "path";
    case MetricKind::Grid:
      return "grid";
    case MetricKind::Tree:
      return "tree";
    case MetricKind::Matrix:
      return "matrix";
    case MetricKind::CayleyBall:
      return "cayley_ball";
  }
  return "?";
}

MetricKind parse_metric_kind(const std::string& s) {
  for (auto k : {MetricKind::Path, MetricKind::Grid, MetricKind::Tree, MetricKind::Matrix, MetricKind::CayleyBall})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown metric kind '" + s + "'");
}

namespace {

using Perm = std::vector<int>;

Perm perm_mul(const Perm& p, const Perm& q) {
  Perm r(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) r[i] = p[q[i]];
  return r;
}

Perm perm_inv(const Perm& p) {
  Perm r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<int>(i);
  return r;
}

}  // namespace

FiniteMetricSpace FiniteMetricSpace::path(std::size_t n) {
  if (n == 0) throw std::invalid_argument("path needs at least one point");
  FiniteMetricSpace s;
  s.kind_ = MetricKind::Path;
  s.n_ = n;
  s.base_ = static_cast<int>(n / 2);
  s.adj_.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    s.adj_[i].push_back(static_cast<int>(i + 1));
    s.adj_[i + 1].push_back(static_cast<int>(i));
  }
  return s;
}

FiniteMetricSpace FiniteMetricSpace::grid(std::size_t side) {
  if (side == 0) throw std::invalid_argument("grid needs a positive side");
  FiniteMetricSpace s;
  s.kind_ = MetricKind::Grid;
  s.n_ = side * side;
  s.side_ = side;
  s.base_ = static_cast<int>((side / 2) * side + side / 2);
  s.adj_.resize(s.n_);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      int v = static_cast<int>(r * side + c);
      if (r > 0) s.adj_[v].push_back(v - static_cast<int>(side));
      if (c > 0) s.adj_[v].push_back(v - 1);
      if (c + 1 < side) s.adj_[v].push_back(v + 1);
      if (r + 1 < side) s.adj_[v].push_back(v + static_cast<int>(side));
    }
  return s;
}

FiniteMetricSpace FiniteMetricSpace::tree(std::size_t depth) {
  if (depth > 20) throw std::invalid_argument("tree depth above 20");
  FiniteMetricSpace s;
  s.kind_ = MetricKind::Tree;
  s.n_ = (std::size_t{1} << (depth + 1)) - 1;
  s.adj_.resize(s.n_);
  for (std::size_t v = 1; v < s.n_; ++v) {
    int p = static_cast<int>((v - 1) / 2);
    s.adj_[p].push_back(static_cast<int>(v));
    s.adj_[v].insert(s.adj_[v].begin(), p);
  }
  return s;
}

FiniteMetricSpace FiniteMetricSpace::from_matrix(std::vector<std::vector<Rational>> d) {
  const std::size_t n = d.size();
  if (n == 0) throw std::invalid_argument("empty distance matrix");
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i].size() != n) throw std::invalid_argument("distance matrix row " + std::to_string(i) + " has wrong length");
    if (d[i][i] != 0) throw std::invalid_argument("d(" + std::to_string(i) + "," + std::to_string(i) + ") != 0");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (d[i][j] != d[j][i])
        throw std::invalid_argument("asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (i != j && d[i][j] <= 0)
        throw std::invalid_argument("nonpositive distance at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      for (std::size_t k = 0; k < n; ++k)
        if (d[i][k] > d[i][j] + d[j][k])
          throw std::invalid_argument("triangle inequality fails for (" + std::to_string(i) + "," + std::to_string(j) +
                                      "," + std::to_string(k) + ")");
    }
  FiniteMetricSpace s;
  s.kind_ = MetricKind::Matrix;
  s.n_ = n;
  s.matrix_ = std::move(d);
  return s;
}

FiniteMetricSpace FiniteMetricSpace::cayley_ball(const std::vector<std::vector<int>>& generators, std::size_t radius) {
  if (generators.empty()) throw std::invalid_argument("no generators");
  const std::size_t m = generators[0].size();
  std::vector<Perm> gens;
  for (const auto& g : generators) {
    if (g.size() != m) throw std::invalid_argument("generators act on different sets");
    PartialBijection::permutation(g);
    gens.push_back(g);
    gens.push_back(perm_inv(g));
  }
  Perm id(m);
  for (std::size_t i = 0; i < m; ++i) id[i] = static_cast<int>(i);
  // lengths up to 2 radius cover every d(g,h) = |g^-1 h| inside the ball
  std::map<Perm, int> length{{id, 0}};
  std::vector<Perm> order{id};
  std::deque<Perm> q{id};
  const std::size_t cap = 2'000'000;
  while (!q.empty()) {
    Perm g = q.front();
    q.pop_front();
    int l = length[g];
    if (static_cast<std::size_t>(l) == 2 * radius) continue;
    for (const auto& s : gens) {
      Perm h = perm_mul(g, s);
      if (length.emplace(h, l + 1).second) {
        if (length.size() > cap) throw CapExceeded(cap);
        if (static_cast<std::size_t>(l + 1) <= radius) order.push_back(h);
        q.push_back(std::move(h));
      }
    }
  }
  FiniteMetricSpace s;
  s.kind_ = MetricKind::CayleyBall;
  s.n_ = order.size();
  s.matrix_.assign(s.n_, std::vector<Rational>(s.n_));
  std::vector<Perm> inv(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) inv[i] = perm_inv(order[i]);
  for (std::size_t i = 0; i < s.n_; ++i)
    for (std::size_t j = 0; j < s.n_; ++j) s.matrix_[i][j] = length.at(perm_mul(inv[i], order[j]));
  return s;
}

Rational FiniteMetricSpace::distance(int x, int y) const {
  if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= n_ || static_cast<std::size_t>(y) >= n_)
    throw std::out_of_range("point outside the space");
  switch (kind_) {
    case MetricKind::Path:
      return std::abs(x - y);
    case MetricKind::Grid: {
      const int side = static_cast<int>(side_);
      return std::abs(x / side - y / side) + std::abs(x % side - y % side);
    }
    case MetricKind::Tree: {
      long a = x, b = y;
      int steps = 0;
      while (a != b) {
        if (a > b)
          a = (a - 1) / 2;
        else
          b = (b - 1) / 2;
        ++steps;
      }
      return steps;
    }
    case MetricKind::Matrix:
    case MetricKind::CayleyBall:
      return matrix_[x][y];
  }
  return 0;
}

std::vector<int> FiniteMetricSpace::bfs(int x, std::size_t limit) const {
  std::vector<int> dist(n_, -1);
  std::vector<int> out{x};
  dist[x] = 0;
  for (std::size_t head = 0; head < out.size(); ++head) {
    int v = out[head];
    if (static_cast<std::size_t>(dist[v]) == limit) continue;
    for (int w : adj_[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        out.push_back(w);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> FiniteMetricSpace::ball(int x, const Rational& c) const {
  if (x < 0 || static_cast<std::size_t>(x) >= n_) throw std::out_of_range("point outside the space");
  if (c < 0) return {};
  if (!adj_.empty()) {
    BigInt f = c.get_num() / c.get_den();
    return bfs(x, static_cast<std::size_t>(std::min<unsigned long>(f.get_ui(), n_)));
  }
  std::vector<int> out;
  for (std::size_t y = 0; y < n_; ++y)
    if (matrix_[x][y] <= c) out.push_back(static_cast<int>(y));
  return out;
}

std::vector<int> FiniteMetricSpace::neighbourhood(const std::vector<int>& set, const Rational& c) const {
  std::vector<char> in(n_, 0);
  for (int x : set)
    for (int y : ball(x, c)) in[y] = 1;
  std::vector<int> out;
  for (std::size_t y = 0; y < n_; ++y)
    if (in[y]) out.push_back(static_cast<int>(y));
  return out;
}

std::vector<std::vector<Rational>> FiniteMetricSpace::distance_matrix() const {
  std::vector<std::vector<Rational>> d(n_, std::vector<Rational>(n_));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) d[i][j] = distance(static_cast<int>(i), static_cast<int>(j));
  return d;
}

PartialTranslation make_translation(const PartialBijection& pb, const FiniteMetricSpace& x, const Rational& c) {
  if (pb.ground_size() != x.size()) throw GroundMismatch("map and space have different sizes");
  PartialTranslation t{pb, c, 0};
  for (int p : pb.domain()) {
    Rational d = x.distance(p, pb(p));
    if (d > c)
      throw DisplacementExceeded(p, "point " + std::to_string(p) + " moves by " + to_string(d) + " > " + to_string(c));
    t.tight_bound = std::max(t.tight_bound, d);
  }
  return t;
}

bool wobbling_membership(const PartialBijection& pb, const FiniteMetricSpace& x, const Rational& c) {
  if (pb.ground_size() != x.size() || !pb.is_total()) return false;
  for (int p : pb.domain())
    if (x.distance(p, pb(p)) > c) return false;
  return true;
}

namespace {

std::vector<int> normalize_set(const FiniteMetricSpace& x, std::vector<int> e) {
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  if (e.empty()) throw std::invalid_argument("E is empty");
  if (e.front() < 0 || static_cast<std::size_t>(e.back()) >= x.size())
    throw std::out_of_range("E has a point outside the space");
  return e;
}

}  // namespace

DoublingCertificate doubling_certificate(const FiniteMetricSpace& x, std::vector<int> e, const Rational& c) {
  if (c < 0) throw std::invalid_argument("C must be nonnegative");
  e = normalize_set(x, std::move(e));
  auto nbhd = x.neighbourhood(e, c);
  std::vector<int> index(x.size(), -1);
  for (std::size_t i = 0; i < nbhd.size(); ++i) index[nbhd[i]] = static_cast<int>(i);
  BipartiteGraph g(2 * e.size(), nbhd.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    auto b = x.ball(e[i], c);
    for (int copy = 0; copy < 2; ++copy)
      for (int y : b) g.adj[2 * i + copy].push_back(index[y]);
  }
  auto m = max_matching(g);
  if (m.size == g.left) {
    Injection inj;
    for (std::size_t u = 0; u < g.left; ++u) inj.targets.push_back(nbhd[m.mate_left[u]]);
    return inj;
  }
  HallViolator hv;
  auto s = hall_violator(g, m);
  for (int u : s) hv.copies.emplace_back(e[u / 2], u % 2);
  for (int v : neighbourhood(g, s)) hv.neighbourhood.push_back(nbhd[v]);
  return hv;
}

bool recheck_certificate(const FiniteMetricSpace& x, std::vector<int> e, const Rational& c,
                         const DoublingCertificate& cert) {
  try {
    e = normalize_set(x, std::move(e));
  } catch (const std::exception&) {
    return false;
  }
  if (const auto* inj = std::get_if<Injection>(&cert)) {
    if (inj->targets.size() != 2 * e.size()) return false;
    std::vector<char> used(x.size(), 0);
    for (std::size_t k = 0; k < inj->targets.size(); ++k) {
      int t = inj->targets[k];
      if (t < 0 || static_cast<std::size_t>(t) >= x.size() || used[t]) return false;
      used[t] = 1;
      if (x.distance(e[k / 2], t) > c) return false;
    }
    return true;
  }
  const auto& hv = std::get<HallViolator>(cert);
  auto copies = hv.copies;
  std::sort(copies.begin(), copies.end());
  if (std::adjacent_find(copies.begin(), copies.end()) != copies.end()) return false;
  for (const auto& [p, copy] : copies)
    if ((copy != 0 && copy != 1) || !std::binary_search(e.begin(), e.end(), p)) return false;
  std::vector<int> points;
  for (const auto& pc : copies) points.push_back(pc.first);
  auto listed = x.neighbourhood(points, c);
  return listed.size() < copies.size() && listed == hv.neighbourhood;
}

std::pair<FiniteMetricSpace, std::vector<int>> family_member(const ScanFamily& f, std::size_t radius,
                                                             const Rational& c) {
  BigInt fl = c.get_num() / c.get_den();
  const std::size_t k = fl.get_ui();
  switch (f.kind) {
    case MetricKind::Path:
    case MetricKind::Grid: {
      std::size_t side = 2 * (radius + k) + 1;
      auto x = f.kind == MetricKind::Path ? FiniteMetricSpace::path(side) : FiniteMetricSpace::grid(side);
      auto e = x.ball(x.base_point(), Rational(static_cast<long>(radius)));
      return {std::move(x), std::move(e)};
    }
    case MetricKind::Tree: {
      if (radius == 0) throw std::invalid_argument("tree family needs depth >= 1");
      auto x = FiniteMetricSpace::tree(radius);
      std::vector<int> e;
      for (std::size_t v = 0; v + 1 < (std::size_t{1} << radius); ++v) e.push_back(static_cast<int>(v));
      return {std::move(x), std::move(e)};
    }
    case MetricKind::CayleyBall: {
      auto x = FiniteMetricSpace::cayley_ball(f.generators, radius + k);
      auto e = x.ball(0, Rational(static_cast<long>(radius)));
      return {std::move(x), std::move(e)};
    }
    case MetricKind::Matrix:
      break;
  }
  throw std::invalid_argument("explicit matrices do not form a family");
}

ScanReport supramenability_scan(const ScanFamily& f, std::size_t r_min, std::size_t r_max, const Rational& c,
                                bool property_a_assumed, Exec exec) {
  if (r_min > r_max) throw std::invalid_argument("empty radius range");
  const std::size_t count = r_max - r_min + 1;
  std::vector<ScanEntry> entries(count);
  auto task = [&](std::size_t i) {
    auto [x, e] = family_member(f, r_min + i, c);
    ScanEntry& s = entries[i];
    s.radius = r_min + i;
    s.e_size = e.size();
    s.n_size = x.neighbourhood(e, c).size();
    s.ratio = Rational(static_cast<long>(s.n_size), static_cast<long>(s.e_size));
    s.ratio.canonicalize();
    s.certificate = doubling_certificate(x, e, c);
    s.rechecked = recheck_certificate(x, e, c, s.certificate);
  };
  for_each_index(count, exec, [&](std::size_t i) { task(i); });
  ScanReport rep;
  rep.property_a_assumed = property_a_assumed;
  for (auto& s : entries) {
    bool inj = std::holds_alternative<Injection>(s.certificate);
    if (inj && !rep.first_injection) rep.first_injection = s.radius;
    if (!inj && !rep.first_violator) rep.first_violator = s.radius;
  }
  rep.entries = std::move(entries);
  return rep;
}

}  // namespace tarski
