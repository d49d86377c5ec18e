#include "tarski/lp.hpp"

#include <stdexcept>

namespace tarski::lp {

void Problem::add_row(std::vector<Rational> coeffs, Rational b, std::string label) {
  if (coeffs.size() != num_vars) throw std::invalid_argument("lp row has wrong width");
  rows.push_back(std::move(coeffs));
  rhs.push_back(std::move(b));
  row_labels.push_back(std::move(label));
}

namespace {

// Tableau with the basic solution in column `width`. Column indices
// [0, n) are structural variables, [n, n + m) artificials.
struct Tableau {
  std::size_t m = 0, n = 0, width = 0;
  std::vector<std::vector<Rational>> t;
  std::vector<std::size_t> basis;
  std::vector<bool> row_alive;

  void pivot(std::size_t row, std::size_t col) {
    Rational inv = 1 / t[row][col];
    for (auto& v : t[row]) v *= inv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == row || !row_alive[r] || sgn(t[r][col]) == 0) continue;
      Rational f = t[r][col];
      for (std::size_t c = 0; c <= width; ++c) {
        if (sgn(t[row][c]) != 0) t[r][c] -= f * t[row][c];
      }
    }
    basis[row] = col;
  }

  Rational reduced_cost(const std::vector<Rational>& cost, std::size_t col) const {
    Rational d = cost[col];
    for (std::size_t r = 0; r < m; ++r) {
      if (!row_alive[r]) continue;
      const Rational& cb = cost[basis[r]];
      if (sgn(cb) != 0 && sgn(t[r][col]) != 0) d -= cb * t[r][col];
    }
    return d;
  }

  // Bland's rule over the allowed columns. Returns false when unbounded.
  bool optimize(const std::vector<Rational>& cost, const std::vector<bool>& allowed) {
    for (;;) {
      std::size_t enter = width;
      for (std::size_t c = 0; c < width; ++c) {
        if (!allowed[c]) continue;
        if (sgn(reduced_cost(cost, c)) < 0) {
          enter = c;
          break;
        }
      }
      if (enter == width) return true;
      std::size_t leave = m;
      Rational best;
      for (std::size_t r = 0; r < m; ++r) {
        if (!row_alive[r] || sgn(t[r][enter]) <= 0) continue;
        Rational ratio = t[r][width] / t[r][enter];
        if (leave == m || ratio < best || (ratio == best && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

bool satisfies(const Problem& p, const std::vector<Rational>& x) {
  if (x.size() != p.num_vars) return false;
  for (const auto& v : x)
    if (sgn(v) < 0) return false;
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    Rational s = 0;
    for (std::size_t j = 0; j < p.num_vars; ++j) s += p.rows[r][j] * x[j];
    if (s != p.rhs[r]) return false;
  }
  return true;
}

bool certificate_valid(const Problem& p, const Certificate& cert) {
  if (cert.multipliers.size() != p.rows.size()) return false;
  std::vector<Rational> combined(p.num_vars, Rational(0));
  Rational rhs = 0;
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    const Rational& y = cert.multipliers[r];
    if (sgn(y) == 0) continue;
    for (std::size_t j = 0; j < p.num_vars; ++j) combined[j] += y * p.rows[r][j];
    rhs += y * p.rhs[r];
  }
  for (const auto& c : combined)
    if (sgn(c) < 0) return false;
  return rhs == -1 && combined == cert.combined && rhs == cert.combined_rhs;
}

Result solve(const Problem& p) {
  const std::size_t m = p.rows.size(), n = p.num_vars;
  if (!p.cost.empty() && p.cost.size() != n) throw std::invalid_argument("lp cost has wrong width");

  Tableau tab;
  tab.m = m;
  tab.n = n;
  tab.width = n + m;
  tab.t.assign(m, std::vector<Rational>(tab.width + 1, Rational(0)));
  tab.basis.resize(m);
  tab.row_alive.assign(m, true);
  std::vector<int> sign(m, 1);
  for (std::size_t r = 0; r < m; ++r) {
    sign[r] = sgn(p.rhs[r]) < 0 ? -1 : 1;
    for (std::size_t j = 0; j < n; ++j) tab.t[r][j] = sign[r] * p.rows[r][j];
    tab.t[r][n + r] = 1;
    tab.t[r][tab.width] = sign[r] * p.rhs[r];
    tab.basis[r] = n + r;
  }

  // Phase 1: minimize the sum of artificials.
  std::vector<Rational> phase1(tab.width, Rational(0));
  for (std::size_t r = 0; r < m; ++r) phase1[n + r] = 1;
  std::vector<bool> all(tab.width, true);
  tab.optimize(phase1, all);
  Rational infeasibility = 0;
  for (std::size_t r = 0; r < m; ++r)
    if (tab.basis[r] >= n) infeasibility += tab.t[r][tab.width];

  Result result;
  if (sgn(infeasibility) > 0) {
    // y_f = c_B B^{-1}; the artificial columns hold B^{-1}.
    std::vector<Rational> yf(m, Rational(0));
    for (std::size_t r = 0; r < m; ++r) {
      const Rational& cb = phase1[tab.basis[r]];
      if (sgn(cb) == 0) continue;
      for (std::size_t i = 0; i < m; ++i) yf[i] += cb * tab.t[r][n + i];
    }
    Certificate cert;
    cert.multipliers.resize(m);
    for (std::size_t i = 0; i < m; ++i) cert.multipliers[i] = -sign[i] * yf[i] / infeasibility;
    cert.combined.assign(n, Rational(0));
    cert.combined_rhs = 0;
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < n; ++j) cert.combined[j] += cert.multipliers[r] * p.rows[r][j];
      cert.combined_rhs += cert.multipliers[r] * p.rhs[r];
    }
    if (!certificate_valid(p, cert)) throw std::logic_error("simplex produced an invalid infeasibility certificate");
    result.status = Status::Infeasible;
    result.certificate = std::move(cert);
    return result;
  }

  // Drive zero-level artificials out of the basis; rows where that is
  // impossible are linearly dependent and are dropped.
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis[r] < n) continue;
    std::size_t col = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (sgn(tab.t[r][j]) != 0) {
        col = j;
        break;
      }
    }
    if (col == n) {
      tab.row_alive[r] = false;
    } else {
      tab.pivot(r, col);
    }
  }

  std::vector<Rational> cost(tab.width, Rational(0));
  for (std::size_t j = 0; j < n && !p.cost.empty(); ++j) cost[j] = p.cost[j];
  std::vector<bool> structural(tab.width, false);
  for (std::size_t j = 0; j < n; ++j) structural[j] = true;
  bool bounded = tab.optimize(cost, structural);

  result.x.assign(n, Rational(0));
  for (std::size_t r = 0; r < m; ++r)
    if (tab.row_alive[r] && tab.basis[r] < n) result.x[tab.basis[r]] = tab.t[r][tab.width];
  if (!bounded) {
    result.status = Status::Unbounded;
    return result;
  }
  result.status = Status::Optimal;
  result.value = 0;
  for (std::size_t j = 0; j < n && !p.cost.empty(); ++j) result.value += p.cost[j] * result.x[j];
  if (!satisfies(p, result.x)) throw std::logic_error("simplex returned a point violating the constraints");
  return result;
}

}  // namespace tarski::lp
