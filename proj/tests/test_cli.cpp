#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tarski/cli.hpp"
#include "tarski/io.hpp"

using namespace tarski;
using io::Json;

namespace {

struct Run {
  int code;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class Scratch {
 public:
  Scratch() {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() / ("tarski_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~Scratch() { std::filesystem::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) {
    auto p = (dir_ / name).string();
    std::ofstream(p) << text;
    return p;
  }
  std::string write_json(const std::string& name, const Json& j) { return write(name, j.dump()); }

 private:
  std::filesystem::path dir_;
};

// Runs a command, then feeds its report back through --verify.
Json round_trip(Scratch& s, std::vector<std::string> args) {
  auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto report = s.write("report.json", r.out);
  args.push_back("--verify");
  args.push_back(report);
  auto v = run(args);
  REQUIRE_MESSAGE(v.code == 0, v.err);
  return v.json();
}

Json strip_timing(Json j) {
  j.erase("timing_ms");
  return j;
}

Json pbj(std::vector<int> dom, std::vector<int> img) { return {{"dom", dom}, {"img", img}}; }

}  // namespace

TEST_CASE("tarski on C(P_2) finds the canonical pair") {
  Scratch s;
  auto cp2 = s.write("cp2.json", R"({"backend":"prefix","arity":2})");
  auto r = run({"tarski", "--instance", cp2, "--degree", "2"});
  CHECK(r.code == cli::Ok);
  auto j = r.json();
  CHECK(j["verdict"] == "found");
  CHECK(j["scope"] == "witness");
  const auto& e = j["witness"]["entries"];
  REQUIRE(e.size() == 2);
  CHECK(e[0] == Json{{"dom", {""}}, {"ran", {"0"}}, {"perm", {0}}});
  CHECK(e[1] == Json{{"dom", {""}}, {"ran", {"1"}}, {"perm", {0}}});
  CHECK(j["tool"] == "tarski");
  CHECK(j["version"] == cli::kVersion);
  CHECK(j["input_digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("mean on I(3) is uniform") {
  Scratch s;
  auto i3 = s.write("i3.json", R"({"backend":"symmetric","n":3})");
  auto r = run({"mean", "--instance", i3});
  CHECK(r.code == cli::Ok);
  auto j = r.json();
  CHECK(j["verdict"] == "feasible");
  CHECK(j["scope"] == "exhaustive");
  CHECK(j["mean"] == Json{{"{0}", "1/3"}, {"{1}", "1/3"}, {"{2}", "1/3"}});
  CHECK(j["unit_space_measure"] == Json{"1/3", "1/3", "1/3"});
  CHECK(j["measure_invariant"] == true);
  CHECK(j["unique"] == true);
}

TEST_CASE("wobble on a path finds a Hall violator") {
  Scratch s;
  auto path = s.write("path100.json", R"({"kind":"path","n":100})");
  auto r = run({"wobble", "--space", path, "--E", "0..59", "--C", "2"});
  CHECK(r.code == cli::Ok);
  auto j = r.json();
  CHECK(j["verdict"] == "hall_violator");
  CHECK(j["e_size"] == 60);
  CHECK(j["n_size"] == 62);
  CHECK(j["ratio"] == "31/30");
  CHECK(j["rechecked"] == true);
}

TEST_CASE("negative verdicts exit zero and state their scope") {
  Scratch s;
  auto cp2 = s.write("cp2.json", R"({"backend":"prefix","arity":2})");
  auto i2 = s.write("i2.json", R"({"backend":"symmetric","n":2})");
  auto m = run({"mean", "--instance", cp2});
  CHECK(m.code == 0);
  CHECK(m.json()["verdict"] == "infeasible");
  CHECK(m.json()["scope"] == "exhaustive");
  CHECK(m.json()["certificate"]["combined_rhs"] != "0");
  auto t = run({"tarski", "--instance", i2});
  CHECK(t.code == 0);
  CHECK(t.json()["verdict"] == "none");
  CHECK(t.json()["scope"] == "exhaustive");
  auto tb = run({"tarski", "--instance", cp2, "--degree", "3", "--budget", "1"});
  CHECK(tb.code == 0);
  auto jb = tb.json();
  CHECK((jb["verdict"] == "found" || jb["scope"] == "budget_bounded"));
}

TEST_CASE("usage errors exit 1") {
  Scratch s;
  auto i3 = s.write("i3.json", R"({"backend":"symmetric","n":3})");
  CHECK(run({}).code == cli::Usage);
  CHECK(run({"bogus"}).code == cli::Usage);
  CHECK(run({"mean"}).code == cli::Usage);
  CHECK(run({"mean", "--instance", i3, "--depth", "x"}).code == cli::Usage);
  CHECK(run({"mean", "--instance", s.write("x", "") + ".missing"}).code == cli::Usage);
  CHECK(run({"tarski", "--instance", i3, "--degree", "1"}).code == cli::Usage);
  CHECK(run({"type", "--instance", i3}).code == cli::Usage);
  CHECK(run({"wobble", "--C", "1"}).code == cli::Usage);
  CHECK(run({"rep", "--task", "nope", "--input", i3}).code == cli::Usage);
  auto h = run({"--help"});
  CHECK(h.code == cli::Ok);
  CHECK(h.out.find("vembed") != std::string::npos);
}

TEST_CASE("malformed input exits 2 and names the field") {
  Scratch s;
  auto expect = [&](std::vector<std::string> args, const std::string& field) {
    auto r = run(args);
    CHECK(r.code == cli::Malformed);
    CHECK_MESSAGE(r.err.find(field) != std::string::npos, r.err);
  };
  auto bad_gen = s.write("a.json", R"({"backend":"finite","ground_size":3,"generators":[{"dom":[0],"img":[0]},{"dom":[0,1],"img":[2,2]}]})");
  expect({"mean", "--instance", bad_gen}, "instance.generators[1]");
  auto range = s.write("b.json", R"({"backend":"finite","ground_size":2,"generators":[{"dom":[0],"img":[5]}]})");
  expect({"green", "--instance", range}, "instance.generators[0]");
  auto backend = s.write("c.json", R"({"backend":"cubic"})");
  expect({"mean", "--instance", backend}, "instance.backend");
  auto syntax = s.write("d.json", "{\"backend\":");
  expect({"mean", "--instance", syntax}, "instance");
  auto prefix = s.write("e.json", R"({"backend":"prefix","arity":2})");
  expect({"green", "--instance", prefix}, "instance.backend");
  auto path = s.write("p.json", R"({"kind":"path","n":10})");
  expect({"wobble", "--space", path, "--E", "0..10", "--C", "1"}, "--E");
  expect({"wobble", "--space", path, "--E", "0,x", "--C", "1"}, "--E");
  expect({"wobble", "--space", path, "--E", "0..3", "--C", "1/0"}, "--C");
  auto q = s.write("q.json", R"({"x":{"summands":[{"words":["2"]}]},"y":{"summands":[]}})");
  expect({"type", "--instance", prefix, "--query", q}, "query.x");
  auto q2 = s.write("q2.json", R"({"x":{"summands":[]}})");
  expect({"type", "--instance", prefix, "--query", q2}, "query");
  auto grp = s.write("g.json", R"({"groupoid":{"points":3,"blocks":[[0,1],[1,2]]}})");
  expect({"rep", "--task", "full_group", "--input", grp}, "input.groupoid");
  auto ind = s.write("i.json", R"({"instance":{"backend":"symmetric","n":2},"pi":"adjoint"})");
  expect({"rep", "--task", "induce", "--input", ind}, "input.pi");
}

TEST_CASE("reports are byte-identical modulo timing") {
  Scratch s;
  auto i3 = s.write("i3.json", R"({"backend":"symmetric","n":3})");
  auto cp2 = s.write("cp2.json", R"({"backend":"prefix","arity":2})");
  std::vector<std::vector<std::string>> cmds{{"mean", "--instance", i3},
                                             {"mean", "--instance", cp2, "--depth", "2"},
                                             {"tarski", "--instance", cp2},
                                             {"green", "--instance", i3},
                                             {"vembed", "--instance", cp2, "--max-leaves", "2"},
                                             {"wobble", "--scan", "tree", "--r-min", "2", "--r-max", "4", "--C", "1"}};
  for (const auto& c : cmds) {
    auto a = run(c), b = run(c);
    REQUIRE(a.code == 0);
    CHECK(strip_timing(a.json()).dump(2) == strip_timing(b.json()).dump(2));
  }
}

TEST_CASE("every emitted witness passes --verify") {
  Scratch s;
  auto i2 = s.write("i2.json", R"({"backend":"symmetric","n":2})");
  auto i3 = s.write("i3.json", R"({"backend":"symmetric","n":3})");
  auto cp2 = s.write("cp2.json", R"({"backend":"prefix","arity":2})");
  auto cp3 = s.write("cp3.json", R"({"backend":"prefix","arity":3})");
  auto path = s.write("path.json", R"({"kind":"path","n":100})");
  auto tree = s.write("tree.json", R"({"kind":"tree","depth":5})");
  auto q = s.write("q.json", R"({"x":{"summands":[{"words":[""]}]},"y":{"summands":[{"words":["0"]},{"words":["1"]}]}})");
  auto q3 = s.write("q3.json", R"({"x":{"summands":[{"points":[0,1]}]},"y":{"summands":[{"points":[1,2]}]}})");
  auto dec = s.write("dec.json", R"({"instance":{"backend":"symmetric","n":3}})");
  auto ind = s.write("ind.json", R"({"instance":{"backend":"symmetric","n":3},"pi":"standard"})");
  auto koop = s.write("koop.json", R"({"groupoid":{"points":3,"blocks":[[0,1,2]]},"measure":["1/2","1/4","1/4"],
      "elements":[{"dom":[1],"img":[0]},{"dom":[0,1,2],"img":[1,2,0]}]})");
  auto alg = s.write("alg.json", R"({"groupoid":{"points":4,"blocks":[[0,1],[2,3]]},
      "g1":{"dom":[0,1,2,3],"img":[1,0,2,3]},"g2":{"dom":[0,1,2,3],"img":[0,1,3,2]}})");
  auto norms = s.write("norms.json", R"({"groupoid":{"points":4,"blocks":[[0,1,2,3]]},
      "element":{"terms":[{"coef":"1","element":{"dom":[0,1,2,3],"img":[1,2,3,0]}},{"coef":"-1/2","element":{"dom":[0,1,2,3],"img":[1,0,2,3]}}]}})");
  auto fg = s.write("fg.json", R"({"groupoid":{"points":5,"blocks":[[0,1,2],[3,4]]},"rigid":[0,1,3]})");
  auto germ = s.write("germ.json", R"({"points":3,"generators":[{"dom":[0,1,2],"img":[1,2,0]}]})");

  std::vector<std::vector<std::string>> cmds{
      {"mean", "--instance", i3},
      {"mean", "--instance", i2},
      {"mean", "--instance", cp2},
      {"mean", "--instance", cp3, "--depth", "2"},
      {"tarski", "--instance", cp2, "--degree", "2"},
      {"tarski", "--instance", cp3, "--degree", "3"},
      {"tarski", "--instance", i3},
      {"type", "--instance", cp2, "--query", q},
      {"type", "--instance", i3, "--query", q3},
      {"vembed", "--instance", cp2},
      {"wobble", "--space", path, "--E", "0..59", "--C", "2"},
      {"wobble", "--space", tree, "--E", "0,1,2", "--C", "1"},
      {"wobble", "--scan", "path", "--r-min", "10", "--r-max", "14", "--C", "3"},
      {"wobble", "--scan", "grid", "--r-min", "2", "--r-max", "3", "--C", "1"},
      {"green", "--instance", i3},
      {"rep", "--task", "decompose", "--input", dec},
      {"rep", "--task", "induce", "--input", ind},
      {"rep", "--task", "koopman", "--input", koop},
      {"rep", "--task", "algkern", "--input", alg},
      {"rep", "--task", "norms", "--input", norms},
      {"rep", "--task", "full_group", "--input", fg},
      {"rep", "--task", "germ", "--input", germ}};
  for (const auto& c : cmds) {
    INFO(c[0] << " " << c[2]);
    auto v = round_trip(s, c);
    CHECK(v["mode"] == "verify");
    CHECK(v["digest_matches"] == true);
    CHECK(v["verified"] == true);
  }
}

TEST_CASE("--verify rejects tampered reports") {
  Scratch s;
  auto i3 = s.write("i3.json", R"({"backend":"symmetric","n":3})");
  auto i2 = s.write("i2.json", R"({"backend":"symmetric","n":2})");
  auto cp2 = s.write("cp2.json", R"({"backend":"prefix","arity":2})");
  auto verify = [&](const std::vector<std::string>& base, const Json& report) {
    auto args = base;
    args.push_back("--verify");
    args.push_back(s.write_json("tampered.json", report));
    auto r = run(args);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return r.json()["verified"].get<bool>();
  };

  std::vector<std::string> mean{"mean", "--instance", i3};
  auto m = run(mean).json();
  auto bad = m;
  bad["weights"] = {"1/2", "1/4", "1/4"};
  CHECK_FALSE(verify(mean, bad));
  CHECK_FALSE(verify({"mean", "--instance", i2}, m));

  std::vector<std::string> inf{"mean", "--instance", cp2};
  auto c = run(inf).json();
  c["certificate"]["multipliers"][0] = "7";
  CHECK_FALSE(verify(inf, c));

  std::vector<std::string> t{"tarski", "--instance", cp2};
  auto tj = run(t).json();
  tj["witness"]["entries"][1]["ran"] = {"0"};
  CHECK_FALSE(verify(t, tj));

  std::vector<std::string> v{"vembed", "--instance", cp2, "--max-leaves", "2"};
  auto vj = run(v).json();
  vj["images"].erase(vj["images"].size() - 1);
  CHECK_FALSE(verify(v, vj));

  auto path = s.write("path.json", R"({"kind":"path","n":20})");
  std::vector<std::string> w{"wobble", "--space", path, "--E", "0..9", "--C", "2"};
  auto wj = run(w).json();
  wj["C"] = "5";
  CHECK_FALSE(verify(w, wj));

  std::vector<std::string> g{"green", "--instance", i3};
  auto gj = run(g).json();
  gj["classes"][1]["witnesses"][0]["witness"] = pbj({0}, {0});
  CHECK_FALSE(verify(g, gj));

  auto wrong = run({"green", "--instance", i3, "--verify", s.write_json("m.json", m)});
  CHECK(wrong.code == cli::Malformed);
  CHECK(wrong.err.find("report.command") != std::string::npos);
}

TEST_CASE("round trip on random finite instances") {
  Scratch s;
  std::mt19937 rng(20261018);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 3 + trial % 2;
    Json gens = Json::array();
    std::uniform_int_distribution<int> ngen(1, 3);
    for (int k = ngen(rng); k > 0; --k) {
      std::vector<int> pts(n), img(n);
      std::iota(pts.begin(), pts.end(), 0);
      std::shuffle(pts.begin(), pts.end(), rng);
      img = pts;
      std::shuffle(img.begin(), img.end(), rng);
      std::uniform_int_distribution<int> len(1, n);
      int l = len(rng);
      gens.push_back(pbj({pts.begin(), pts.begin() + l}, {img.begin(), img.begin() + l}));
    }
    auto inst = s.write_json("inst.json", Json{{"backend", "finite"}, {"ground_size", n}, {"generators", gens}, {"adjoin_identity", true}});
    auto q = s.write_json("q.json", Json{{"x", {{"summands", {{{"points", gens[0]["dom"]}}}}}},
                                         {"y", {{"summands", {{{"points", gens[0]["img"]}}}}}}});
    INFO(gens.dump());
    for (auto args : std::vector<std::vector<std::string>>{{"mean", "--instance", inst},
                                                            {"tarski", "--instance", inst},
                                                            {"green", "--instance", inst},
                                                            {"type", "--instance", inst, "--query", q}}) {
      auto v = round_trip(s, args);
      CHECK(v["verified"] == true);
    }
    auto m = run({"mean", "--instance", inst}).json();
    if (m["verdict"] == "feasible") CHECK(m["measure_invariant"] == true);
  }
}

TEST_CASE("json codecs round trip") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<long> num(-1000, 1000), den(1, 1000);
  for (int i = 0; i < 200; ++i) {
    Rational q(num(rng), den(rng));
    q.canonicalize();
    auto j = io::to_json(q);
    CHECK(io::rational_from_json(j, "q") == q);
    CHECK(j.get<std::string>().find('/') != std::string::npos);
  }
  CHECK(io::rational_from_json(0.25, "q") == Rational(1, 4));
  CHECK(io::rational_from_json(3, "q") == Rational(3));
  CHECK_THROWS_AS(io::rational_from_json("1/x", "q"), io::SchemaError);
  CHECK_THROWS_AS(io::rational_from_json(Json::array(), "q"), io::SchemaError);

  auto inst = io::instance_from_json(Json{{"backend", "prefix"}, {"arity", 3}}, "i");
  for (const auto& g : enumerate_v(2, 3)) {
    auto j = io::to_json(g);
    CHECK(io::velement_from_json(j, "g") == g);
  }
  for (const auto& s : inst.generators) CHECK(io::bim_from_json(io::to_json(s), inst, "s") == s);

  DoublingCertificate inj = Injection{{3, 4, 5, 6}};
  CHECK(io::to_json(io::certificate_from_json(io::to_json(inj), "c")) == io::to_json(inj));
  auto ex = io::hex_digest(io::fnv1a("a"));
  CHECK(ex == "af63dc4c8601ec8c");
}
