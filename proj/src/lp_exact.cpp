#include <cmath>
#include <cstring>
#include <stdexcept>

#include <gmpxx.h>

#include "oneperc/lp.hpp"

namespace oneperc {

namespace {

mpq_class exact(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in exact arithmetic");
  mpq_class q(v);  // exact: every finite double is a dyadic rational
  return q;
}

mpz_class pow10(int k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(k));
  return r;
}

// Largest double <= q.
double floor_to_double(const mpq_class& q) {
  double d = q.get_d();  // truncates toward zero
  if (mpq_class(d) > q) d = std::nextafter(d, -INFINITY);
  while (mpq_class(d) > q) d = std::nextafter(d, -INFINITY);
  return d;
}

// Smallest double >= q.
double ceil_to_double(const mpq_class& q) {
  double d = q.get_d();
  while (mpq_class(d) < q) d = std::nextafter(d, INFINITY);
  return d;
}

mpq_class floor_decimal(const mpq_class& q, int decimals) {
  const mpz_class scale = pow10(decimals);
  mpq_class scaled = q * scale;
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  mpq_class out(fl, scale);
  out.canonicalize();
  return out;
}

mpq_class ceil_decimal(const mpq_class& q, int decimals) {
  const mpz_class scale = pow10(decimals);
  mpq_class scaled = q * scale;
  mpz_class cl;
  mpz_cdiv_q(cl.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  mpq_class out(cl, scale);
  out.canonicalize();
  return out;
}

// Right-hand side of a row stating sum(x) == mass over every variable, if any.
bool find_mass_row(const LinearProgramSpec& lp, mpq_class& mass) {
  for (const auto& row : lp.constraints) {
    if (row.index.size() != lp.n_vars) continue;
    std::vector<char> seen(lp.n_vars, 0);
    bool ok = true;
    for (std::size_t k = 0; k < row.index.size() && ok; ++k) {
      ok = row.coeff[k] == 1.0 && !seen[row.index[k]];
      seen[row.index[k]] = 1;
    }
    if (ok && row.rhs >= 0.0) {
      mass = exact(row.rhs);
      return true;
    }
  }
  return false;
}

}  // namespace

RigorousBound rigorous_lower_bound(const LinearProgramSpec& lp, std::span<const double> dual,
                                   int decimals) {
  if (dual.size() != lp.constraints.size()) throw std::invalid_argument("dual length != constraint count");
  lp.validate();
  RigorousBound out;
  out.decimals = decimals;

  std::vector<mpq_class> d(lp.n_vars);
  for (std::size_t j = 0; j < lp.n_vars; ++j) d[j] = exact(lp.objective[j]);
  mpq_class by = 0;
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    if (dual[i] == 0.0) continue;
    const mpq_class y = exact(dual[i]);
    const auto& row = lp.constraints[i];
    by += y * exact(row.rhs);
    for (std::size_t k = 0; k < row.index.size(); ++k) d[row.index[k]] -= y * exact(row.coeff[k]);
  }
  mpq_class worst = 0;
  for (const auto& v : d)
    if (v < worst) worst = v;
  out.min_reduced_cost = floor_to_double(worst);

  mpq_class bound = by;
  if (worst < 0) {
    mpq_class mass;
    if (!find_mass_row(lp, mass)) {
      out.reason = "negative reduced cost and no total-mass row to charge it against";
      return out;
    }
    bound += worst * mass;
  }
  out.valid = true;
  out.value = floor_to_double(bound);
  out.truncated = floor_to_double(floor_decimal(bound, decimals));
  return out;
}

namespace {

// Exact value of [-]digits[.digits].
mpq_class parse_decimal(const std::string& text) {
  std::string s = text;
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.erase(0, 1);
  }
  auto dot = s.find('.');
  std::string intpart = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? std::string() : s.substr(dot + 1);
  if (intpart.empty()) intpart = "0";
  if ((intpart + frac).find_first_not_of("0123456789") != std::string::npos || (intpart + frac).empty())
    throw std::invalid_argument("not a decimal number: " + text);
  mpz_class num(intpart + frac, 10);
  mpq_class q(num, pow10(static_cast<int>(frac.size())));
  q.canonicalize();
  if (neg) q = -q;
  return q;
}

}  // namespace

double decimal_floor_to_double(const std::string& text) { return floor_to_double(parse_decimal(text)); }

double decimal_complement_round_up(const std::string& text, int decimals) {
  return ceil_to_double(ceil_decimal(mpq_class(1) - parse_decimal(text), decimals));
}

double truncate_down(double x, int decimals) { return floor_to_double(floor_decimal(exact(x), decimals)); }

double round_up(double x, int decimals) { return ceil_to_double(ceil_decimal(exact(x), decimals)); }

double complement_round_up(double x, int decimals) {
  return ceil_to_double(ceil_decimal(mpq_class(1) - exact(x), decimals));
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;
  void operator()(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
};

}  // namespace

std::uint64_t problem_hash(const LinearProgramSpec& lp) {
  Fnv1a mix;
  const std::uint64_t n = lp.n_vars;
  mix(&n, sizeof n);
  for (double c : lp.objective) mix(&c, sizeof c);
  for (const auto& row : lp.constraints) {
    const std::uint64_t len = row.index.size();
    mix(&len, sizeof len);
    mix(row.index.data(), row.index.size() * sizeof(std::uint32_t));
    mix(row.coeff.data(), row.coeff.size() * sizeof(double));
    mix(&row.rhs, sizeof row.rhs);
  }
  return mix.h;
}

std::uint64_t certificate_hash(std::uint64_t problem, std::span<const double> dual) {
  Fnv1a mix;
  mix(&problem, sizeof problem);
  mix(dual.data(), dual.size() * sizeof(double));
  return mix.h;
}

}  // namespace oneperc
