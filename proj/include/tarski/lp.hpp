#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tarski/rational.hpp"

namespace tarski::lp {

/// minimize cost . x  subject to  A x = b,  x >= 0.
/// Rows of A are stored densely; every row has `num_vars` entries.
struct Problem {
  std::size_t num_vars = 0;
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> rhs;
  std::vector<Rational> cost;  // empty means pure feasibility
  std::vector<std::string> row_labels;

  void add_row(std::vector<Rational> coeffs, Rational b, std::string label = {});
};

enum class Status { Optimal, Infeasible, Unbounded };

/// Farkas certificate: multipliers y with y.A >= 0 componentwise and
/// y.b = -1. Adding up the equations with these weights gives
/// sum_j c_j x_j = -1 with every c_j >= 0, impossible for x >= 0.
struct Certificate {
  std::vector<Rational> multipliers;  // one per row
  std::vector<Rational> combined;     // y.A, one per variable
  Rational combined_rhs;              // y.b
};

struct Result {
  Status status = Status::Infeasible;
  std::vector<Rational> x;
  Rational value;
  Certificate certificate;  // filled when Infeasible
};

/// Two-phase dense simplex in exact arithmetic with Bland's rule, so it
/// always terminates. Infeasible results carry a certificate that has
/// already been rechecked against the input.
Result solve(const Problem& problem);

/// Exact check that x satisfies every row and is nonnegative.
bool satisfies(const Problem& problem, const std::vector<Rational>& x);

/// Exact recheck of a Farkas certificate against the problem.
bool certificate_valid(const Problem& problem, const Certificate& cert);

}  // namespace tarski::lp
