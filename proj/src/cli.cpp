#include "tarski/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <map>

#include "tarski/io.hpp"

namespace tarski::cli {

namespace {

using io::Json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Inputs {
  std::uint64_t digest = io::fnv1a("");

  Json load(const std::string& file, const std::string& what) {
    auto text = io::read_file(file);
    digest = io::fnv1a(text, digest);
    return io::parse_json(text, what);
  }
  std::string digest_string() const { return "fnv1a64:" + io::hex_digest(digest); }
};

struct Options {
  std::string instance, base, query, pair, space, input, verify, set, c, scan, generators, task;
  std::size_t mean_depth = 3, degree = 2, budget = 100000, max_leaves = 3, word_depth = 4, r_min = 1, r_max = 1;
  bool property_a = false;
};

std::string backend_name(const BimInstance& inst) { return inst.backend == Backend::Finite ? "finite" : "prefix"; }

const FiniteInverseMonoid& finite_monoid(const BimInstance& inst, const std::string& path) {
  if (inst.backend != Backend::Finite) throw io::SchemaError(path + ".backend", "this command needs a finite instance");
  return *inst.monoid;
}

std::string require_string(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = io::field(j, key, path);
  if (!v.is_string()) throw io::SchemaError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Json rationals(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const auto& q : v) a.push_back(io::to_json(q));
  return a;
}

std::vector<Rational> rationals_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw io::SchemaError(path, "expected an array of rationals");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(io::rational_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// --- mean -------------------------------------------------------------

bool measure_invariant(const FiniteInverseMonoid& m, const std::vector<Rational>& nu) {
  for (auto gi : m.generators()) {
    Rational d = 0, r = 0;
    for (int x : m[gi].domain()) d += nu[x];
    for (int x : m[gi].range()) r += nu[x];
    if (d != r) return false;
  }
  return true;
}

Json run_mean(const Options& o, Inputs& in) {
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  auto r = invariant_mean(inst, o.mean_depth);
  Json j;
  j["backend"] = backend_name(inst);
  j["verdict"] = to_string(r.verdict);
  j["scope"] = r.verdict == MeanVerdict::FeasibleUpToDepth ? "depth_bounded" : "exhaustive";
  j["depth"] = r.depth;
  j["normalization"] = io::to_json(r.normalization);
  j["constraints"] = r.constraints;
  if (r.mean) {
    const Mean& m = *r.mean;
    Json named = Json::object();
    auto labels = m.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) named[labels[i]] = io::to_json(m.weights[i]);
    j["mean"] = named;
    j["weights"] = rationals(m.weights);
    if (m.backend == Backend::Finite) {
      j["support"] = m.atoms;
      auto nu = unit_space_measure(m, inst.monoid->ground_size());
      j["unit_space_measure"] = rationals(nu);
      j["measure_invariant"] = measure_invariant(*inst.monoid, nu);
    } else {
      j["support"] = m.cylinders;
    }
    j["unique"] = mean_is_unique(r);
  }
  if (r.certificate) {
    j["certificate"] = {{"multipliers", rationals(r.certificate->multipliers)},
                        {"combined", rationals(r.certificate->combined)},
                        {"combined_rhs", io::to_json(r.certificate->combined_rhs)}};
  }
  j["rechecked"] = recheck_mean(inst, r);
  return j;
}

Json verify_mean(const Options& o, Inputs& in, const Json& claim) {
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  std::string verdict = require_string(claim, "verdict", "report");
  MeanResult r;
  r.depth = io::size_from_json(io::field(claim, "depth", "report"), "report.depth");
  r.normalization = inst.unit();
  Json checks;
  if (verdict == "infeasible") {
    r.verdict = MeanVerdict::Infeasible;
    const Json& c = io::field(claim, "certificate", "report");
    lp::Certificate cert;
    cert.multipliers = rationals_from_json(io::field(c, "multipliers", "report.certificate"), "report.certificate.multipliers");
    cert.combined = rationals_from_json(io::field(c, "combined", "report.certificate"), "report.certificate.combined");
    cert.combined_rhs = io::rational_from_json(io::field(c, "combined_rhs", "report.certificate"), "report.certificate.combined_rhs");
    r.certificate = cert;
    r.problem = invariant_mean(inst, std::max<std::size_t>(r.depth, 1)).problem;
    checks["certificate_valid"] = recheck_mean(inst, r);
  } else if (verdict == "feasible" || verdict == "feasible_up_to_depth") {
    r.verdict = verdict == "feasible" ? MeanVerdict::Feasible : MeanVerdict::FeasibleUpToDepth;
    Mean m;
    m.backend = inst.backend;
    m.normalization = inst.unit();
    m.weights = rationals_from_json(io::field(claim, "weights", "report"), "report.weights");
    const Json& sup = io::field(claim, "support", "report");
    if (!sup.is_array() || sup.size() != m.weights.size()) throw io::SchemaError("report.support", "expected one entry per weight");
    for (std::size_t i = 0; i < sup.size(); ++i) {
      std::string p = "report.support[" + std::to_string(i) + "]";
      if (inst.backend == Backend::Finite) {
        m.atoms.push_back(io::ints_from_json(sup[i], p));
      } else {
        if (!sup[i].is_string()) throw io::SchemaError(p, "expected a word");
        m.cylinders.push_back(sup[i].get<std::string>());
      }
    }
    bool same_support = inst.backend == Backend::Finite ? m.atoms == inst.atoms() : m.cylinders == all_words(inst.arity, r.depth);
    r.mean = m;
    checks["support_matches_instance"] = same_support;
    checks["mean_valid"] = same_support && recheck_mean(inst, r);
    if (inst.backend == Backend::Finite)
      checks["measure_invariant"] = same_support && measure_invariant(*inst.monoid, unit_space_measure(m, inst.monoid->ground_size()));
  } else {
    throw io::SchemaError("report.verdict", "unknown verdict \"" + verdict + "\"");
  }
  return checks;
}

// --- tarski -----------------------------------------------------------

Clopen base_of(const Options& o, Inputs& in, const BimInstance& inst) {
  if (o.base.empty()) return inst.unit();
  return io::clopen_from_json(in.load(o.base, "base"), inst, "base");
}

Json check_tarski_json(const TarskiCheck& c) {
  return {{"degree_ok", c.degree_ok},       {"base_nonzero", c.base_nonzero},     {"sources_ok", c.sources_ok},
          {"ranges_inside", c.ranges_inside}, {"ranges_disjoint", c.ranges_disjoint}, {"failures", c.failures}};
}

bool entries_in_instance(const BimInstance& inst, const TarskiMatrix& t) {
  if (inst.backend == Backend::Prefix) return true;
  for (const auto& s : t.entries)
    if (s.backend() != Backend::Finite || !inst.monoid->contains(s.finite())) return false;
  return true;
}

Json run_tarski(const Options& o, Inputs& in) {
  if (o.degree < 2) throw UsageError("--degree must be at least 2");
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  Clopen base = base_of(o, in, inst);
  auto s = find_tarski(inst, base, o.degree, o.budget);
  Json j;
  j["backend"] = backend_name(inst);
  j["base"] = io::to_json(base);
  j["degree"] = o.degree;
  j["budget"] = o.budget;
  j["nodes"] = s.nodes;
  j["exhaustive"] = s.exhaustive;
  if (s.matrix) {
    j["verdict"] = "found";
    j["scope"] = "witness";
    j["witness"] = io::to_json(*s.matrix);
    j["check"] = check_tarski_json(check_tarski(*s.matrix));
  } else {
    j["verdict"] = "none";
    j["scope"] = s.exhaustive ? "exhaustive" : "budget_bounded";
  }
  return j;
}

Json verify_tarski(const Options& o, Inputs& in, const Json& claim) {
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  std::string verdict = require_string(claim, "verdict", "report");
  Json checks;
  if (verdict == "found") {
    auto t = io::tarski_from_json(io::field(claim, "witness", "report"), inst, "report.witness");
    auto c = check_tarski(t);
    checks["axioms"] = c.ok();
    checks["entries_in_instance"] = entries_in_instance(inst, t);
  } else if (verdict == "none") {
    Clopen base = io::clopen_from_json(io::field(claim, "base", "report"), inst, "report.base");
    std::size_t degree = io::size_from_json(io::field(claim, "degree", "report"), "report.degree");
    std::size_t budget = io::size_from_json(io::field(claim, "budget", "report"), "report.budget");
    bool exhaustive = io::field(claim, "exhaustive", "report").get<bool>();
    auto s = find_tarski(inst, base, degree, budget);
    checks["search_repeats"] = !s.matrix && s.exhaustive == exhaustive;
  } else {
    throw io::SchemaError("report.verdict", "unknown verdict \"" + verdict + "\"");
  }
  return checks;
}

// --- type -------------------------------------------------------------

std::pair<TypeElement, TypeElement> query_of(const Options& o, Inputs& in, const BimInstance& inst) {
  if (o.query.empty()) throw UsageError("type needs --query");
  Json q = in.load(o.query, "query");
  return {io::type_from_json(io::field(q, "x", "query"), inst, "query.x"),
          io::type_from_json(io::field(q, "y", "query"), inst, "query.y")};
}

Json run_type(const Options& o, Inputs& in) {
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  auto [x, y] = query_of(o, in, inst);
  auto r = type_compare(inst, x, y, o.budget);
  Json j;
  j["backend"] = backend_name(inst);
  j["x"] = io::to_json(x);
  j["y"] = io::to_json(y);
  j["budget"] = o.budget;
  j["verdict"] = to_string(r.verdict);
  j["exhaustive"] = r.exhaustive;
  if (r.witness) {
    j["scope"] = "witness";
    j["witness"] = io::to_json(*r.witness);
    j["rechecked"] = recheck_witness(inst, x, y, *r.witness, r.verdict == Comparison::Equal);
  } else {
    j["scope"] = r.exhaustive ? "exhaustive" : "budget_bounded";
  }
  return j;
}

Json verify_type(const Options& o, Inputs& in, const Json& claim) {
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  auto [x, y] = query_of(o, in, inst);
  std::string verdict = require_string(claim, "verdict", "report");
  Json checks;
  checks["query_matches"] = io::field(claim, "x", "report") == io::to_json(x) && io::field(claim, "y", "report") == io::to_json(y);
  if (verdict == "equal" || verdict == "leq") {
    auto w = io::witness_from_json(io::field(claim, "witness", "report"), inst, "report.witness");
    checks["witness_valid"] = recheck_witness(inst, x, y, w, verdict == "equal");
  } else if (verdict == "not_leq" || verdict == "unknown") {
    std::size_t budget = io::size_from_json(io::field(claim, "budget", "report"), "report.budget");
    auto r = type_compare(inst, x, y, budget);
    checks["comparison_repeats"] = to_string(r.verdict) == verdict && r.exhaustive == io::field(claim, "exhaustive", "report").get<bool>();
  } else {
    throw io::SchemaError("report.verdict", "unknown verdict \"" + verdict + "\"");
  }
  return checks;
}

// --- vembed -----------------------------------------------------------

bool same_at_depth(const BimElement& a, const BimElement& b, std::size_t depth) {
  if (a.backend() != b.backend()) return false;
  if (a.backend() == Backend::Finite) return a == b;
  return agree_on_words(a.prefix(), b.prefix(), depth);
}

bool pairwise_distinct(const std::vector<BimElement>& images, std::size_t depth) {
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j)
      if (same_at_depth(images[i], images[j], depth)) return false;
  return true;
}

Json pairs_json(const std::vector<EmbeddingFailure>& v) {
  Json a = Json::array();
  for (const auto& f : v) a.push_back({f.i, f.j});
  return a;
}

Json run_vembed(const Options& o, Inputs& in) {
  if (o.max_leaves < 1 || o.max_leaves > 4) throw UsageError("--max-leaves must be between 1 and 4");
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  BimElement s, t;
  if (!o.pair.empty()) {
    Json p = in.load(o.pair, "pair");
    s = io::bim_from_json(io::field(p, "s", "pair"), inst, "pair.s");
    t = io::bim_from_json(io::field(p, "t", "pair"), inst, "pair.t");
  } else {
    if (inst.backend != Backend::Prefix || inst.arity != 2)
      throw io::SchemaError("pair", "only C(P_2) has a default pair; pass --pair");
    s = inst.generators[0];
    t = inst.generators[1];
  }
  VEmbedding h(s, t);
  auto set = enumerate_v(2, o.max_leaves);
  auto rep = verify_embedding(h, set);
  std::vector<BimElement> images;
  Json imgs = Json::array();
  for (const auto& g : set) {
    images.push_back(h(g));
    imgs.push_back({{"element", io::to_json(g)}, {"image", io::to_json(images.back())}});
  }
  bool distinct = pairwise_distinct(images, o.word_depth);
  Json j;
  j["backend"] = backend_name(inst);
  j["pair"] = {{"s", io::to_json(s)}, {"t", io::to_json(t)}};
  j["max_leaves"] = o.max_leaves;
  j["depth"] = o.word_depth;
  j["test_set_size"] = set.size();
  j["pairs_checked"] = rep.pairs_checked;
  j["homomorphism_ok"] = rep.homomorphism_ok;
  j["injective_on_test_set"] = rep.injective_on_test_set;
  j["distinct_at_depth"] = distinct;
  j["failures"] = pairs_json(rep.failures);
  j["collisions"] = pairs_json(rep.collisions);
  j["images"] = imgs;
  j["verdict"] = rep.homomorphism_ok && rep.injective_on_test_set && distinct ? "embedding" : "not_embedding";
  j["scope"] = "test_set";
  return j;
}

Json verify_vembed(const Options& o, Inputs& in, const Json& claim) {
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  if (!o.pair.empty()) in.load(o.pair, "pair");
  const Json& p = io::field(claim, "pair", "report");
  VEmbedding h(io::bim_from_json(io::field(p, "s", "report.pair"), inst, "report.pair.s"),
               io::bim_from_json(io::field(p, "t", "report.pair"), inst, "report.pair.t"));
  std::size_t depth = io::size_from_json(io::field(claim, "depth", "report"), "report.depth");
  std::size_t leaves = io::size_from_json(io::field(claim, "max_leaves", "report"), "report.max_leaves");
  const Json& imgs = io::field(claim, "images", "report");
  if (!imgs.is_array()) throw io::SchemaError("report.images", "expected an array");
  std::vector<VElement> elements;
  std::vector<BimElement> images;
  bool images_ok = true;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    std::string path = "report.images[" + std::to_string(i) + "]";
    elements.push_back(io::velement_from_json(io::field(imgs[i], "element", path), path + ".element"));
    images.push_back(io::bim_from_json(io::field(imgs[i], "image", path), inst, path + ".image"));
    auto want = h(elements.back());
    images_ok = images_ok && want == images.back() && same_at_depth(want, images.back(), depth);
  }
  auto full = enumerate_v(2, leaves);
  auto rep = verify_embedding(h, elements);
  Json checks;
  checks["test_set_complete"] = elements == full;
  checks["images_match"] = images_ok;
  checks["homomorphism"] = rep.homomorphism_ok;
  checks["injective"] = rep.injective_on_test_set;
  checks["distinct_at_depth"] = pairwise_distinct(images, depth);
  return checks;
}

// --- wobble -----------------------------------------------------------

std::vector<int> parse_set(const std::string& s, std::size_t n) {
  std::vector<int> out;
  auto bad = [&] { return io::SchemaError("--E", "expected a..b or a comma list of points, got \"" + s + "\""); };
  try {
    auto dots = s.find("..");
    if (dots != std::string::npos) {
      std::size_t used = 0;
      int a = std::stoi(s.substr(0, dots), &used);
      if (used != dots) throw bad();
      std::string rest = s.substr(dots + 2);
      int b = std::stoi(rest, &used);
      if (used != rest.size()) throw bad();
      for (int x = a; x <= b; ++x) out.push_back(x);
    } else {
      std::size_t pos = 0;
      while (pos <= s.size()) {
        auto comma = s.find(',', pos);
        std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        std::size_t used = 0;
        out.push_back(std::stoi(item, &used));
        if (used != item.size()) throw bad();
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  for (int x : out)
    if (x < 0 || static_cast<std::size_t>(x) >= n) throw io::SchemaError("--E", "point " + std::to_string(x) + " outside the space");
  return out;
}

Rational parse_c(const std::string& c) {
  if (c.empty()) throw UsageError("wobble needs --C");
  Rational q;
  try {
    q = parse_rational(c);
  } catch (const std::exception& e) {
    throw io::SchemaError("--C", e.what());
  }
  if (sgn(q) < 0) throw io::SchemaError("--C", "must be nonnegative");
  return q;
}

std::string certificate_kind(const DoublingCertificate& c) {
  return std::holds_alternative<Injection>(c) ? "injection" : "hall_violator";
}

ScanFamily family_of(const std::string& kind, const Json& gens, const std::string& path) {
  ScanFamily f;
  f.kind = parse_metric_kind(kind);
  if (f.kind == MetricKind::Matrix) throw io::SchemaError(path, "matrix spaces have no scan family");
  if (f.kind == MetricKind::CayleyBall) {
    if (!gens.is_array()) throw io::SchemaError(path + ".generators", "cayley_ball scans need generators");
    for (std::size_t i = 0; i < gens.size(); ++i)
      f.generators.push_back(io::ints_from_json(gens[i], path + ".generators[" + std::to_string(i) + "]"));
  }
  return f;
}

Json run_wobble(const Options& o, Inputs& in) {
  Rational c = parse_c(o.c);
  Json j;
  j["C"] = io::to_json(c);
  if (!o.scan.empty()) {
    if (o.r_min > o.r_max) throw UsageError("--r-min exceeds --r-max");
    Json gens = Json::array();
    if (!o.generators.empty()) gens = io::field(in.load(o.generators, "generators"), "generators", "generators");
    ScanFamily f;
    try {
      f = family_of(o.scan, gens, "scan");
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--scan: ") + e.what());
    }
    auto r = supramenability_scan(f, o.r_min, o.r_max, c, o.property_a);
    Json entries = Json::array();
    std::size_t inj = 0;
    for (const auto& e : r.entries) {
      inj += std::holds_alternative<Injection>(e.certificate);
      entries.push_back({{"radius", e.radius},
                         {"e_size", e.e_size},
                         {"n_size", e.n_size},
                         {"ratio", io::to_json(e.ratio)},
                         {"certificate", io::to_json(e.certificate)},
                         {"rechecked", e.rechecked}});
    }
    j["scan"] = {{"kind", to_string(f.kind)}, {"generators", f.generators}, {"r_min", o.r_min}, {"r_max", o.r_max}};
    j["entries"] = entries;
    j["first_injection"] = r.first_injection ? Json(*r.first_injection) : Json();
    j["first_violator"] = r.first_violator ? Json(*r.first_violator) : Json();
    j["property_a_assumed"] = r.property_a_assumed;
    j["verdict"] = inj == r.entries.size() ? "injection_at_every_radius" : inj == 0 ? "violator_at_every_radius" : "mixed";
    j["scope"] = "radius_bounded";
    return j;
  }
  if (o.space.empty()) throw UsageError("wobble needs --space or --scan");
  if (o.set.empty()) throw UsageError("wobble --space needs --E");
  auto x = io::space_from_json(in.load(o.space, "space"), "space");
  auto e = parse_set(o.set, x.size());
  auto cert = doubling_certificate(x, e, c);
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  auto nb = x.neighbourhood(e, c);
  Rational ratio(static_cast<long>(nb.size()), static_cast<long>(e.size()));
  ratio.canonicalize();
  j["space"] = {{"kind", to_string(x.kind())}, {"size", x.size()}};
  j["E"] = e;
  j["e_size"] = e.size();
  j["n_size"] = nb.size();
  j["ratio"] = io::to_json(ratio);
  j["certificate"] = io::to_json(cert);
  j["rechecked"] = recheck_certificate(x, e, c, cert);
  j["verdict"] = certificate_kind(cert);
  j["scope"] = "exhaustive";
  return j;
}

Json verify_wobble(const Options& o, Inputs& in, const Json& claim) {
  Rational c = io::rational_from_json(io::field(claim, "C", "report"), "report.C");
  Json checks;
  if (claim.contains("scan")) {
    if (!o.generators.empty()) in.load(o.generators, "generators");
    const Json& s = claim["scan"];
    auto f = family_of(require_string(s, "kind", "report.scan"), io::field(s, "generators", "report.scan"), "report.scan");
    const Json& entries = io::field(claim, "entries", "report");
    if (!entries.is_array()) throw io::SchemaError("report.entries", "expected an array");
    bool all = !entries.empty();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      std::string p = "report.entries[" + std::to_string(i) + "]";
      std::size_t radius = io::size_from_json(io::field(entries[i], "radius", p), p + ".radius");
      auto cert = io::certificate_from_json(io::field(entries[i], "certificate", p), p + ".certificate");
      auto [x, e] = family_member(f, radius, c);
      all = all && recheck_certificate(x, e, c, cert);
    }
    checks["certificates_recheck"] = all;
    return checks;
  }
  if (o.space.empty()) throw UsageError("verifying a single certificate needs --space");
  auto x = io::space_from_json(in.load(o.space, "space"), "space");
  auto e = io::ints_from_json(io::field(claim, "E", "report"), "report.E");
  for (int v : e)
    if (v < 0 || static_cast<std::size_t>(v) >= x.size()) throw io::SchemaError("report.E", "point outside the space");
  auto cert = io::certificate_from_json(io::field(claim, "certificate", "report"), "report.certificate");
  checks["certificate_rechecks"] = !e.empty() && recheck_certificate(x, e, c, cert);
  checks["verdict_matches"] = require_string(claim, "verdict", "report") == certificate_kind(cert);
  return checks;
}

// --- green ------------------------------------------------------------

Json run_green(const Options& o, Inputs& in) {
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  const auto& m = finite_monoid(inst, "instance");
  auto g = green_classify(m);
  std::map<std::size_t, std::size_t> witness_of(g.d_witnesses.begin(), g.d_witnesses.end());
  Json classes = Json::array();
  for (const auto& cls : g.d_classes) {
    Json members = Json::array(), ws = Json::array();
    for (auto e : cls) {
      members.push_back(io::to_json(m[e]));
      auto it = witness_of.find(e);
      if (it != witness_of.end()) ws.push_back({{"member", io::to_json(m[e])}, {"witness", io::to_json(m[it->second])}});
    }
    classes.push_back({{"representative", io::to_json(m[cls.front()])}, {"members", members}, {"witnesses", ws}});
  }
  Json j;
  j["monoid_size"] = m.size();
  j["idempotents"] = g.idempotents.size();
  j["classes"] = classes;
  j["dj_equal"] = g.dj_equal;
  j["verdict"] = g.dj_equal ? "d_equals_j" : "d_differs_from_j";
  j["scope"] = "exhaustive";
  return j;
}

Json verify_green(const Options& o, Inputs& in, const Json& claim) {
  auto inst = io::instance_from_json(in.load(o.instance, "instance"), "instance");
  const auto& m = finite_monoid(inst, "instance");
  const std::size_t n = m.ground_size();
  const Json& classes = io::field(claim, "classes", "report");
  if (!classes.is_array()) throw io::SchemaError("report.classes", "expected an array");
  std::map<PartialBijection, int> seen;
  bool witnesses_ok = true;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::string p = "report.classes[" + std::to_string(c) + "]";
    auto rep = io::pbij_from_json(io::field(classes[c], "representative", p), n, p + ".representative");
    const Json& ws = io::field(classes[c], "witnesses", p);
    if (!ws.is_array()) throw io::SchemaError(p + ".witnesses", "expected an array");
    for (std::size_t i = 0; i < ws.size(); ++i) {
      std::string q = p + ".witnesses[" + std::to_string(i) + "]";
      auto member = io::pbij_from_json(io::field(ws[i], "member", q), n, q + ".member");
      auto w = io::pbij_from_json(io::field(ws[i], "witness", q), n, q + ".witness");
      witnesses_ok = witnesses_ok && m.contains(w) && m.contains(member) && member.is_idempotent() &&
                     w.dom_idempotent() == rep && w.ran_idempotent() == member;
      ++seen[member];
    }
  }
  bool covers = seen.size() == m.idempotents().size();
  for (const auto& [e, k] : seen) covers = covers && k == 1;
  auto g = green_classify(m);
  Json checks;
  checks["witnesses_valid"] = witnesses_ok;
  checks["every_idempotent_once"] = covers;
  checks["dj_verdict_repeats"] = io::field(claim, "dj_equal", "report").get<bool>() == g.dj_equal;
  return checks;
}

// --- rep --------------------------------------------------------------

UnitRep unit_rep(const FiniteInverseMonoid& m, const std::string& name) {
  if (name == "trivial") return trivial_unit_rep(m);
  if (name == "sign") return sign_unit_rep(m);
  if (name == "standard") return standard_unit_rep(m);
  throw io::SchemaError("input.pi", "expected \"trivial\", \"sign\" or \"standard\"");
}

std::vector<Rational> measure_or_uniform(const Json& q, std::size_t n) {
  if (q.contains("measure")) return io::measure_from_json(q["measure"], n, "input.measure");
  return std::vector<Rational>(n, Rational(1, static_cast<long>(std::max<std::size_t>(n, 1))));
}

Json rep_result(const std::string& task, const Json& q) {
  Json r;
  if (task == "decompose") {
    auto inst = io::instance_from_json(io::field(q, "instance", "input"), "input.instance");
    const auto& m = finite_monoid(inst, "input.instance");
    auto d = restriction_decomposition(m);
    Json orbits = Json::array(), classes = Json::array();
    for (const auto& ob : d.orbits)
      orbits.push_back({{"representative", io::to_json(m[ob.representative])},
                        {"size", ob.members.size()},
                        {"stabilizer_order", ob.stabilizer.size()},
                        {"idempotent", io::to_json(m[ob.idempotent])},
                        {"permutation_isomorphic", ob.permutation_isomorphic}});
    for (const auto& c : d.classes)
      classes.push_back({{"idempotent", io::to_json(m[c.idempotent])},
                         {"multiplicity", c.multiplicity},
                         {"stabilizer_order", c.stabilizer.size()}});
    r["units"] = d.units.size();
    r["orbits"] = orbits;
    r["classes"] = classes;
    r["character_res"] = d.character_res;
    r["character_sum"] = d.character_sum;
    r["characters_equal"] = d.characters_equal;
    r["verdict"] = d.characters_equal ? "characters_equal" : "characters_differ";
  } else if (task == "induce") {
    auto inst = io::instance_from_json(io::field(q, "instance", "input"), "input.instance");
    const auto& m = finite_monoid(inst, "input.instance");
    std::string name = require_string(q, "pi", "input");
    auto pi = unit_rep(m, name);
    auto ind = induce(m, pi);
    r["pi"] = name;
    r["pi_dim"] = pi.dim();
    r["dim"] = ind.dim;
    r["multiplicity"] = ind.multiplicity;
    r["pairs_checked"] = ind.check.pairs_checked;
    r["multiplicative_failures"] = ind.check.multiplicative_failures;
    r["star_failures"] = ind.check.star_failures;
    r["idempotents_project"] = ind.check.idempotents_project;
    r["units_unitary"] = ind.check.units_unitary;
    r["verdict"] = ind.multiplicity >= 1 && ind.check.ok() ? "contained" : "not_contained";
  } else if (task == "koopman") {
    auto g = io::groupoid_from_json(io::field(q, "groupoid", "input"), "input.groupoid");
    auto mu = measure_or_uniform(q, g.size());
    const Json& els = io::field(q, "elements", "input");
    if (!els.is_array()) throw io::SchemaError("input.elements", "expected an array");
    Json out = Json::array();
    bool all_pi = true;
    for (std::size_t i = 0; i < els.size(); ++i) {
      std::string p = "input.elements[" + std::to_string(i) + "]";
      auto s = io::pbij_from_json(els[i], g.size(), p);
      if (!g.contains(s)) throw io::SchemaError(p, "leaves the groupoid");
      auto k = koopman(g, mu, s);
      Json entries = Json::array();
      for (std::size_t c = 0; c < k.size(); ++c)
        if (k.target(c) >= 0) entries.push_back({{"row", k.target(c)}, {"col", c}, {"squared", io::to_json(k.squared(c))}});
      bool pi = is_partial_isometry(k, mu);
      all_pi = all_pi && pi;
      out.push_back({{"element", io::to_json(s)}, {"entries", entries}, {"partial_isometry", pi}, {"permutation_matrix", k.is_permutation_matrix()}});
    }
    r["elements"] = out;
    r["invariant_measure"] = is_invariant_measure(g, mu);
    bool tight = true;
    if (g.size() <= 8) {
      auto t = koopman_tightness(g, mu);
      r["tightness"] = {{"pairs_checked", t.pairs_checked}, {"failures", t.failures}};
      tight = t.ok();
    } else {
      r["tightness"] = nullptr;
    }
    r["verdict"] = all_pi && tight ? "tight_partial_isometries" : "not_tight";
  } else if (task == "algkern") {
    auto g = io::groupoid_from_json(io::field(q, "groupoid", "input"), "input.groupoid");
    auto g1 = io::pbij_from_json(io::field(q, "g1", "input"), g.size(), "input.g1");
    auto g2 = io::pbij_from_json(io::field(q, "g2", "input"), g.size(), "input.g2");
    auto k = algkern_check(g, g1, g2);
    r["identity_holds"] = k.identity_holds;
    r["formal"] = io::to_json(k.formal);
    r["formal_nonzero"] = k.formal_nonzero;
    r["verdict"] = !k.identity_holds ? "identity_fails" : k.formal_nonzero ? "nontrivial_kernel" : "identity_holds";
  } else if (task == "norms") {
    auto g = io::groupoid_from_json(io::field(q, "groupoid", "input"), "input.groupoid");
    auto mu = measure_or_uniform(q, g.size());
    auto a = io::formal_from_json(io::field(q, "element", "input"), g.size(), "input.element");
    double tol = q.value("tolerance", 1e-9);
    auto n = norm_compare(g, {koopman_rep(g, mu), pi_lambda_rep(g)}, a);
    r["koopman"] = n[0];
    r["pi_lambda"] = n[1];
    r["tolerance"] = tol;
    r["koopman_leq_lambda"] = n[0] <= n[1] + tol;
    r["verdict"] = n[0] <= n[1] + tol ? "koopman_leq_lambda" : "koopman_exceeds_lambda";
  } else if (task == "full_group") {
    auto g = io::groupoid_from_json(io::field(q, "groupoid", "input"), "input.groupoid");
    auto fg = full_group(g);
    Json gens = Json::array();
    for (const auto& s : fg.generators) gens.push_back(io::to_json(s));
    r["order"] = fg.order.get_str();
    r["generators"] = gens;
    r["verdict"] = "computed";
    if (q.contains("rigid")) {
      auto rs = rigid_stabilizer(g, io::ints_from_json(q["rigid"], "input.rigid"));
      Json rg = Json::array();
      for (const auto& s : rs.group.generators) rg.push_back(io::to_json(s));
      r["rigid"] = {{"order", rs.group.order.get_str()},
                    {"restricted_order", rs.restricted_order.get_str()},
                    {"verified", rs.verified},
                    {"generators", rg}};
      r["verdict"] = rs.verified ? "rigid_stabilizer_verified" : "rigid_stabilizer_mismatch";
    }
  } else if (task == "germ") {
    std::size_t n = io::size_from_json(io::field(q, "points", "input"), "input.points");
    const Json& gs = io::field(q, "generators", "input");
    if (!gs.is_array()) throw io::SchemaError("input.generators", "expected an array");
    std::vector<PartialBijection> gens;
    for (std::size_t i = 0; i < gs.size(); ++i)
      gens.push_back(io::pbij_from_json(gs[i], n, "input.generators[" + std::to_string(i) + "]"));
    auto res = germ_groupoid(n, gens);
    r["groupoid"] = io::to_json(res.groupoid);
    r["arrows"] = res.groupoid.arrows();
    r["piecewise_factorisable"] = res.piecewise_factorisable;
    r["checked"] = res.checked;
    r["verdict"] = res.piecewise_factorisable ? "piecewise_factorisable" : "not_factorisable";
  } else {
    throw UsageError("unknown --task \"" + task + "\"");
  }
  return r;
}

Json run_rep(const Options& o, Inputs& in) {
  Json q = in.load(o.input, "input");
  Json r = rep_result(o.task, q);
  Json j;
  j["task"] = o.task;
  j["verdict"] = r["verdict"];
  r.erase("verdict");
  j["result"] = r;
  j["scope"] = o.task == "norms" ? "floating_point" : "exhaustive";
  return j;
}

bool close_json(const Json& a, const Json& b, double tol) {
  if (a.is_number_float() || b.is_number_float())
    return a.is_number() && b.is_number() && std::abs(a.get<double>() - b.get<double>()) <= tol;
  if (a.is_object() && b.is_object()) {
    if (a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it)
      if (!b.contains(it.key()) || !close_json(it.value(), b[it.key()], tol)) return false;
    return true;
  }
  if (a.is_array() && b.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!close_json(a[i], b[i], tol)) return false;
    return true;
  }
  return a == b;
}

Json verify_rep(const Options& o, Inputs& in, const Json& claim) {
  Json q = in.load(o.input, "input");
  std::string task = require_string(claim, "task", "report");
  Json r = rep_result(task, q);
  std::string verdict = r["verdict"];
  r.erase("verdict");
  double tol = task == "norms" ? r["tolerance"].get<double>() : 0.0;
  Json checks;
  checks["verdict_repeats"] = require_string(claim, "verdict", "report") == verdict;
  checks["result_repeats"] = close_json(io::field(claim, "result", "report"), r, tol);
  return checks;
}

using Runner = std::function<Json(const Options&, Inputs&)>;
using Verifier = std::function<Json(const Options&, Inputs&, const Json&)>;

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Exact checks for inverse semigroups, groupoids and paradoxical decompositions", "tarski"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);

  auto verify_flag = [&](CLI::App* sub) {
    sub->add_option("--verify", o.verify, "Recheck a report produced by this subcommand");
  };
  auto* mean = app.add_subcommand("mean", "Invariant mean by exact LP, or a Farkas certificate");
  mean->add_option("--instance", o.instance, "Instance JSON")->required();
  mean->add_option("--depth", o.mean_depth, "Cylinder depth (prefix backend)")->check(CLI::Range(1, 12));
  verify_flag(mean);

  auto* tarski = app.add_subcommand("tarski", "Search for a Tarski matrix");
  tarski->add_option("--instance", o.instance, "Instance JSON")->required();
  tarski->add_option("--degree", o.degree, "Number of entries");
  tarski->add_option("--base", o.base, "Clopen JSON (default: the unit)");
  tarski->add_option("--budget", o.budget, "Search node budget");
  verify_flag(tarski);

  auto* type = app.add_subcommand("type", "Compare two elements of the type semigroup");
  type->add_option("--instance", o.instance, "Instance JSON")->required();
  type->add_option("--query", o.query, "JSON with fields x and y");
  type->add_option("--budget", o.budget, "Split budget (prefix backend)");
  verify_flag(type);

  auto* vembed = app.add_subcommand("vembed", "Embed Thompson's group V from a tight orthogonal pair");
  vembed->add_option("--instance", o.instance, "Instance JSON")->required();
  vembed->add_option("--pair", o.pair, "JSON with fields s and t (default: the generators of C(P_2))");
  vembed->add_option("--max-leaves", o.max_leaves, "Test set: reduced elements with at most this many leaves");
  vembed->add_option("--depth", o.word_depth, "Word length for the distinctness check");
  verify_flag(vembed);

  auto* wobble = app.add_subcommand("wobble", "Doubling certificates for partial translations");
  wobble->add_option("--space", o.space, "Metric space JSON");
  wobble->add_option("--E", o.set, "Set as a..b or a comma list");
  wobble->add_option("--C", o.c, "Displacement bound as p/q");
  wobble->add_option("--scan", o.scan, "Scan a family: path, grid, tree or cayley_ball");
  wobble->add_option("--generators", o.generators, "JSON with field generators (cayley_ball scans)");
  wobble->add_option("--r-min", o.r_min, "Smallest radius");
  wobble->add_option("--r-max", o.r_max, "Largest radius");
  wobble->add_flag("--property-a", o.property_a, "Record property A as an assumption");
  verify_flag(wobble);

  auto* rep = app.add_subcommand("rep", "Finite-dimensional representations of groupoids and monoids");
  rep->add_option("--task", o.task, "decompose, induce, koopman, algkern, norms, full_group or germ")->required();
  rep->add_option("--input", o.input, "Task input JSON")->required();
  verify_flag(rep);

  auto* green = app.add_subcommand("green", "Green's D and J relations with witnesses");
  green->add_option("--instance", o.instance, "Instance JSON")->required();
  verify_flag(green);

  std::map<std::string, std::pair<Runner, Verifier>> table{
      {"mean", {run_mean, verify_mean}},       {"tarski", {run_tarski, verify_tarski}}, {"type", {run_type, verify_type}},
      {"vembed", {run_vembed, verify_vembed}}, {"wobble", {run_wobble, verify_wobble}}, {"rep", {run_rep, verify_rep}},
      {"green", {run_green, verify_green}}};

  std::vector<std::string> argv_store{"tarski"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? Ok : Usage;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  const auto& [run, verify] = table.at(name);

  try {
    auto t0 = std::chrono::steady_clock::now();
    Inputs in;
    Json body;
    Json report{{"tool", "tarski"}, {"version", kVersion}, {"command", name}, {"argv", args}};
    if (!o.verify.empty()) {
      Json claim = io::parse_json(io::read_file(o.verify), "report");
      if (!claim.is_object() || claim.value("command", "") != name)
        throw io::SchemaError("report.command", "not a report of the " + name + " subcommand");
      if (claim.value("mode", "") == "verify") throw io::SchemaError("report.mode", "a verification result cannot be verified");
      Json checks = verify(o, in, claim);
      bool ok = true;
      for (const auto& [k, v] : checks.items()) ok = ok && v.is_boolean() && v.get<bool>();
      bool digest = claim.value("input_digest", "") == in.digest_string();
      report["mode"] = "verify";
      report["checks"] = checks;
      report["digest_matches"] = digest;
      report["verified"] = ok && digest;
      report["verdict"] = ok && digest ? "verified" : "rejected";
    } else {
      body = run(o, in);
      report.update(body);
    }
    report["input_digest"] = in.digest_string();
    report["timing_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out << report.dump(2) << "\n";
    return Ok;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const io::FileError& e) {
    err << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const io::SchemaError& e) {
    err << "malformed input: " << e.what() << "\n";
    return Malformed;
  } catch (const std::exception& e) {
    err << "malformed input: " << e.what() << "\n";
    return Malformed;
  }
}

}  // namespace tarski::cli
