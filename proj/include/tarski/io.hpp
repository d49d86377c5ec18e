#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tarski/bim.hpp"
#include "tarski/grpd.hpp"
#include "tarski/paradox.hpp"
#include "tarski/thompson.hpp"
#include "tarski/typesg.hpp"
#include "tarski/wobble.hpp"

namespace tarski::io {

using Json = nlohmann::json;

/// Input that parses but does not fit the schema; `path` names the field,
/// e.g. "instance.generators[2].img".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& msg) : std::runtime_error(path + ": " + msg), path(std::move(path)) {}
  std::string path;
};

class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& file);
/// Throws FileError when unreadable and SchemaError on a JSON syntax error.
Json parse_json(const std::string& text, const std::string& what);

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ull);
std::string hex_digest(std::uint64_t h);

Json to_json(const Rational& q);
/// "p/q" or "p" strings; integers; floats (converted exactly).
Rational rational_from_json(const Json& j, const std::string& path);

Json to_json(const PartialBijection& p);
PartialBijection pbij_from_json(const Json& j, std::size_t ground_size, const std::string& path);

Json to_json(const PrefixMap& m);
PrefixMap prefix_map_from_json(const Json& j, int arity, const std::string& path);

Json to_json(const Clopen& c);
Clopen clopen_from_json(const Json& j, const BimInstance& inst, const std::string& path);

Json to_json(const BimElement& s);
BimElement bim_from_json(const Json& j, const BimInstance& inst, const std::string& path);

/// {"backend":"finite","ground_size":n,"generators":[...],"adjoin_identity":b}
/// or {"backend":"symmetric","n":k} for I(k), or {"backend":"prefix","arity":n}.
BimInstance instance_from_json(const Json& j, const std::string& path);

Json to_json(const TypeElement& x);
TypeElement type_from_json(const Json& j, const BimInstance& inst, const std::string& path);

Json to_json(const EquivalenceWitness& w);
EquivalenceWitness witness_from_json(const Json& j, const BimInstance& inst, const std::string& path);

Json to_json(const TarskiMatrix& t);
TarskiMatrix tarski_from_json(const Json& j, const BimInstance& inst, const std::string& path);

/// PrefixMap layout plus "complete": true.
Json to_json(const VElement& g);
VElement velement_from_json(const Json& j, const std::string& path);

/// {"kind":"path","n":k}, {"kind":"grid","side":k}, {"kind":"tree","depth":k},
/// {"kind":"matrix","distances":[[...]]},
/// {"kind":"cayley_ball","generators":[[...]],"radius":r}.
FiniteMetricSpace space_from_json(const Json& j, const std::string& path);

Json to_json(const DoublingCertificate& c);
DoublingCertificate certificate_from_json(const Json& j, const std::string& path);

/// {"points":n,"blocks":[[...],...]}
FiniteGroupoid groupoid_from_json(const Json& j, const std::string& path);
Json to_json(const FiniteGroupoid& g);

/// {"terms":[{"coef":"p/q","element":{"dom":[...],"img":[...]}}]}
FormalElement formal_from_json(const Json& j, std::size_t ground_size, const std::string& path);
Json to_json(const FormalElement& a);

std::vector<Rational> measure_from_json(const Json& j, std::size_t ground_size, const std::string& path);

/// Field access with pointed errors.
const Json& field(const Json& j, const std::string& key, const std::string& path);
std::size_t size_from_json(const Json& j, const std::string& path);
std::vector<int> ints_from_json(const Json& j, const std::string& path);

}  // namespace tarski::io
