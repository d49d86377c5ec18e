#include "tarski/rational.hpp"

namespace tarski {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  Rational q;
  if (q.set_str(s, 10) != 0) {
    throw std::invalid_argument("malformed rational literal '" + s + "'");
  }
  if (sgn(q.get_den()) == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(10); }

bool rational_sqrt(const Rational& q, Rational& root) {
  if (sgn(q) < 0) return false;
  mpz_class num = q.get_num(), den = q.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) return false;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  root = Rational(rn, rd);
  root.canonicalize();
  return true;
}

}  // namespace tarski
