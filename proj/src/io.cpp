#include "tarski/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tarski::io {

namespace {

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string dot(const std::string& path, const std::string& key) { return path + "." + key; }

const Json& array_field(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_array()) throw SchemaError(dot(path, key), "expected an array");
  return v;
}

std::vector<Word> words_from_json(const Json& j, int arity, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of words");
  std::vector<Word> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) throw SchemaError(at(path, i), "expected a word string");
    Word w = j[i].get<std::string>();
    try {
      validate_word(w, arity);
    } catch (const std::exception& e) {
      throw SchemaError(at(path, i), e.what());
    }
    out.push_back(w);
  }
  return out;
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
}

}  // namespace

std::string read_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FileError("cannot read " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(what, std::string("not valid JSON: ") + e.what());
  }
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(dot(path, key), "missing field");
  return *it;
}

std::size_t size_from_json(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw SchemaError(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::vector<int> ints_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) throw SchemaError(at(path, i), "expected an integer");
    out.push_back(j[i].get<int>());
  }
  return out;
}

Json to_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number_float()) {
    double d = j.get<double>();
    if (!std::isfinite(d)) throw SchemaError(path, "not a finite number");
    Rational q(d);
    q.canonicalize();
    return q;
  }
  if (j.is_string()) return wrap(path, [&] { return parse_rational(j.get<std::string>()); });
  throw SchemaError(path, "expected a rational as \"p/q\"");
}

Json to_json(const PartialBijection& p) {
  Json dom = Json::array(), img = Json::array();
  for (int x : p.domain()) {
    dom.push_back(x);
    img.push_back(p(x));
  }
  return {{"dom", dom}, {"img", img}};
}

PartialBijection pbij_from_json(const Json& j, std::size_t ground_size, const std::string& path) {
  auto dom = ints_from_json(field(j, "dom", path), dot(path, "dom"));
  auto img = ints_from_json(field(j, "img", path), dot(path, "img"));
  if (dom.size() != img.size()) throw SchemaError(path, "dom and img differ in length");
  return wrap(path, [&] { return PartialBijection::from_pairs(ground_size, dom, img); });
}

Json to_json(const PrefixMap& m) {
  Json dom = Json::array(), ran = Json::array(), perm = Json::array();
  for (std::size_t i = 0; i < m.pairs().size(); ++i) {
    dom.push_back(m.pairs()[i].from);
    ran.push_back(m.pairs()[i].to);
    perm.push_back(i);
  }
  return {{"dom", dom}, {"ran", ran}, {"perm", perm}};
}

PrefixMap prefix_map_from_json(const Json& j, int arity, const std::string& path) {
  auto dom = words_from_json(field(j, "dom", path), arity, dot(path, "dom"));
  auto ran = words_from_json(field(j, "ran", path), arity, dot(path, "ran"));
  std::vector<int> perm(dom.size());
  std::iota(perm.begin(), perm.end(), 0);
  if (j.contains("perm")) perm = ints_from_json(j["perm"], dot(path, "perm"));
  if (dom.size() != ran.size() || perm.size() != dom.size()) throw SchemaError(path, "dom, ran and perm differ in length");
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<int>(i)) throw SchemaError(dot(path, "perm"), "not a permutation");
  return wrap(path, [&] { return PrefixMap::from_codes(arity, dom, ran, perm); });
}

Json to_json(const Clopen& c) {
  if (c.backend() == Backend::Finite) return {{"points", c.finite().points()}};
  return {{"words", c.prefix().words()}};
}

Clopen clopen_from_json(const Json& j, const BimInstance& inst, const std::string& path) {
  if (inst.backend == Backend::Finite) {
    const Json& pts = j.is_array() ? j : field(j, "points", path);
    auto p = ints_from_json(pts, j.is_array() ? path : dot(path, "points"));
    return wrap(path, [&] { return Clopen(FinSubset(inst.monoid->ground_size(), p)); });
  }
  const Json& ws = j.is_array() ? j : field(j, "words", path);
  auto w = words_from_json(ws, inst.arity, j.is_array() ? path : dot(path, "words"));
  return Clopen(PrefixCode::from_words(inst.arity, w));
}

Json to_json(const BimElement& s) {
  if (s.backend() == Backend::Finite) return to_json(s.finite());
  return to_json(s.prefix());
}

BimElement bim_from_json(const Json& j, const BimInstance& inst, const std::string& path) {
  if (inst.backend == Backend::Finite) return pbij_from_json(j, inst.monoid->ground_size(), path);
  return prefix_map_from_json(j, inst.arity, path);
}

BimInstance instance_from_json(const Json& j, const std::string& path) {
  const Json& b = field(j, "backend", path);
  if (!b.is_string()) throw SchemaError(dot(path, "backend"), "expected a string");
  std::string backend = b.get<std::string>();
  if (backend == "prefix") {
    std::size_t arity = j.contains("arity") ? size_from_json(j["arity"], dot(path, "arity")) : 2;
    if (arity < 2 || arity > 10) throw SchemaError(dot(path, "arity"), "arity must be between 2 and 10");
    return BimInstance::polycyclic(static_cast<int>(arity));
  }
  if (backend == "symmetric") {
    std::size_t n = size_from_json(field(j, "n", path), dot(path, "n"));
    if (n < 1 || n > 6) throw SchemaError(dot(path, "n"), "n must be between 1 and 6");
    return BimInstance::finite(symmetric_inverse_monoid(n));
  }
  if (backend != "finite") throw SchemaError(dot(path, "backend"), "expected \"finite\", \"symmetric\" or \"prefix\"");
  std::size_t n = size_from_json(field(j, "ground_size", path), dot(path, "ground_size"));
  if (n == 0) throw SchemaError(dot(path, "ground_size"), "ground set is empty");
  const Json& gens = array_field(j, "generators", path);
  std::vector<PartialBijection> g;
  for (std::size_t i = 0; i < gens.size(); ++i) g.push_back(pbij_from_json(gens[i], n, at(dot(path, "generators"), i)));
  if (g.empty()) throw SchemaError(dot(path, "generators"), "no generators");
  bool adjoin = j.value("adjoin_identity", false);
  return BimInstance::finite(generate_monoid(g, 100000, adjoin));
}

Json to_json(const TypeElement& x) {
  Json s = Json::array();
  for (const auto& c : x.summands()) s.push_back(to_json(c));
  return {{"summands", s}};
}

TypeElement type_from_json(const Json& j, const BimInstance& inst, const std::string& path) {
  const Json& s = array_field(j, "summands", path);
  std::vector<Clopen> cs;
  for (std::size_t i = 0; i < s.size(); ++i) cs.push_back(clopen_from_json(s[i], inst, at(dot(path, "summands"), i)));
  return TypeElement(cs);
}

Json to_json(const EquivalenceWitness& w) {
  Json blocks = Json::array();
  for (const auto& b : w.blocks)
    blocks.push_back({{"element", to_json(b.element)}, {"source_slot", b.source_slot}, {"target_slot", b.target_slot}});
  return {{"blocks", blocks}};
}

EquivalenceWitness witness_from_json(const Json& j, const BimInstance& inst, const std::string& path) {
  const Json& bs = array_field(j, "blocks", path);
  EquivalenceWitness w;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    std::string p = at(dot(path, "blocks"), i);
    w.blocks.push_back({bim_from_json(field(bs[i], "element", p), inst, dot(p, "element")),
                        size_from_json(field(bs[i], "source_slot", p), dot(p, "source_slot")),
                        size_from_json(field(bs[i], "target_slot", p), dot(p, "target_slot"))});
  }
  return w;
}

Json to_json(const TarskiMatrix& t) {
  Json e = Json::array();
  for (const auto& s : t.entries) e.push_back(to_json(s));
  return {{"base", to_json(t.base)}, {"entries", e}};
}

TarskiMatrix tarski_from_json(const Json& j, const BimInstance& inst, const std::string& path) {
  TarskiMatrix t;
  t.base = clopen_from_json(field(j, "base", path), inst, dot(path, "base"));
  const Json& e = array_field(j, "entries", path);
  for (std::size_t i = 0; i < e.size(); ++i) t.entries.push_back(bim_from_json(e[i], inst, at(dot(path, "entries"), i)));
  return t;
}

Json to_json(const VElement& g) {
  Json j = to_json(g.map());
  j["arity"] = g.arity();
  j["complete"] = true;
  return j;
}

VElement velement_from_json(const Json& j, const std::string& path) {
  std::size_t arity = j.contains("arity") ? size_from_json(j["arity"], dot(path, "arity")) : 2;
  if (arity < 2 || arity > 10) throw SchemaError(dot(path, "arity"), "arity must be between 2 and 10");
  auto m = prefix_map_from_json(j, static_cast<int>(arity), path);
  return wrap(path, [&] { return VElement(m); });
}

FiniteMetricSpace space_from_json(const Json& j, const std::string& path) {
  const Json& k = field(j, "kind", path);
  if (!k.is_string()) throw SchemaError(dot(path, "kind"), "expected a string");
  MetricKind kind = wrap(dot(path, "kind"), [&] { return parse_metric_kind(k.get<std::string>()); });
  auto bounded = [&](const std::string& key, std::size_t lo, std::size_t hi) {
    std::size_t v = size_from_json(field(j, key, path), dot(path, key));
    if (v < lo || v > hi)
      throw SchemaError(dot(path, key), "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
    return v;
  };
  switch (kind) {
    case MetricKind::Path:
      return FiniteMetricSpace::path(bounded("n", 1, 1000000));
    case MetricKind::Grid:
      return FiniteMetricSpace::grid(bounded("side", 1, 1000));
    case MetricKind::Tree:
      return FiniteMetricSpace::tree(bounded("depth", 0, 20));
    case MetricKind::Matrix: {
      const Json& rows = array_field(j, "distances", path);
      std::vector<std::vector<Rational>> d;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string p = at(dot(path, "distances"), r);
        if (!rows[r].is_array()) throw SchemaError(p, "expected a row");
        std::vector<Rational> row;
        for (std::size_t c = 0; c < rows[r].size(); ++c) row.push_back(rational_from_json(rows[r][c], at(p, c)));
        d.push_back(row);
      }
      return wrap(dot(path, "distances"), [&] { return FiniteMetricSpace::from_matrix(d); });
    }
    case MetricKind::CayleyBall: {
      const Json& gs = array_field(j, "generators", path);
      std::vector<std::vector<int>> gens;
      for (std::size_t i = 0; i < gs.size(); ++i) gens.push_back(ints_from_json(gs[i], at(dot(path, "generators"), i)));
      std::size_t r = bounded("radius", 0, 64);
      return wrap(path, [&] { return FiniteMetricSpace::cayley_ball(gens, r); });
    }
  }
  throw SchemaError(dot(path, "kind"), "unknown kind");
}

Json to_json(const DoublingCertificate& c) {
  if (const auto* inj = std::get_if<Injection>(&c)) return {{"type", "injection"}, {"targets", inj->targets}};
  const auto& hv = std::get<HallViolator>(c);
  Json copies = Json::array();
  for (const auto& [x, k] : hv.copies) copies.push_back({x, k});
  return {{"type", "hall_violator"}, {"copies", copies}, {"neighbourhood", hv.neighbourhood}};
}

DoublingCertificate certificate_from_json(const Json& j, const std::string& path) {
  const Json& t = field(j, "type", path);
  if (t == "injection") return Injection{ints_from_json(field(j, "targets", path), dot(path, "targets"))};
  if (t != "hall_violator") throw SchemaError(dot(path, "type"), "expected \"injection\" or \"hall_violator\"");
  HallViolator hv;
  const Json& copies = array_field(j, "copies", path);
  for (std::size_t i = 0; i < copies.size(); ++i) {
    auto pair = ints_from_json(copies[i], at(dot(path, "copies"), i));
    if (pair.size() != 2) throw SchemaError(at(dot(path, "copies"), i), "expected [point, copy]");
    hv.copies.emplace_back(pair[0], pair[1]);
  }
  hv.neighbourhood = ints_from_json(field(j, "neighbourhood", path), dot(path, "neighbourhood"));
  return hv;
}

FiniteGroupoid groupoid_from_json(const Json& j, const std::string& path) {
  std::size_t n = size_from_json(field(j, "points", path), dot(path, "points"));
  const Json& bs = array_field(j, "blocks", path);
  std::vector<std::vector<int>> blocks;
  for (std::size_t i = 0; i < bs.size(); ++i) blocks.push_back(ints_from_json(bs[i], at(dot(path, "blocks"), i)));
  return wrap(dot(path, "blocks"), [&] { return FiniteGroupoid(n, blocks); });
}

Json to_json(const FiniteGroupoid& g) { return {{"points", g.size()}, {"blocks", g.blocks()}}; }

FormalElement formal_from_json(const Json& j, std::size_t ground_size, const std::string& path) {
  const Json& ts = array_field(j, "terms", path);
  FormalElement a;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::string p = at(dot(path, "terms"), i);
    a.push_back({rational_from_json(field(ts[i], "coef", p), dot(p, "coef")),
                 pbij_from_json(field(ts[i], "element", p), ground_size, dot(p, "element"))});
  }
  return a;
}

Json to_json(const FormalElement& a) {
  Json ts = Json::array();
  for (const auto& t : a) ts.push_back({{"coef", to_json(t.coef)}, {"element", to_json(t.element)}});
  return {{"terms", ts}};
}

std::vector<Rational> measure_from_json(const Json& j, std::size_t ground_size, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of weights");
  std::vector<Rational> mu;
  for (std::size_t i = 0; i < j.size(); ++i) mu.push_back(rational_from_json(j[i], at(path, i)));
  wrap(path, [&] {
    validate_measure(mu, ground_size);
    return 0;
  });
  return mu;
}

}  // namespace tarski::io
