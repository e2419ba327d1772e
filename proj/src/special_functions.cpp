#include "walkbounds/special_functions.hpp"

#include <cmath>
#include <string>

#include "walkbounds/error.hpp"

namespace walkbounds {

namespace {

void require(bool ok, const char* fn, double x) {
  if (!ok) throw DomainError(std::string(fn) + " undefined at " + std::to_string(x));
}

}  // namespace

double F(double x) {
  require(std::isfinite(x) && std::abs(x) < 1.0, "F", x);
  return 2.0 * x * std::atanh(x);
}

double G(double x) {
  require(std::isfinite(x) && std::abs(x) <= 1.0, "G", x);
  const double x2 = x * x;
  return x2 / (1.0 + std::sqrt(1.0 - x2));
}

std::vector<double> fg_inv_coefficients(int n) {
  std::vector<double> c;
  if (n < 1) return c;
  c.push_back(4.0);
  for (int k = 2; k <= n; ++k) {
    c.push_back(((k - 2) * c.back() + 2.0) / (2.0 * k - 1.0));
  }
  return c;
}

double FG_inv_series(double x, int n) {
  const auto c = fg_inv_coefficients(n);
  double sum = 0.0;
  for (int k = n; k >= 1; --k) sum = (sum + c[k - 1]) * x;
  return sum;
}

double FG_inv_closed(double x) {
  require(std::isfinite(x) && x >= 0.0 && x < 1.0, "FG_inv", x);
  // With s = sqrt(2x - x^2), 1 - s = (1-x)^2 / (1+s), so
  // log((1+s)/(1-s)) = 2 log((1+s)/(1-x)).
  const double s = std::sqrt(x * (2.0 - x));
  return 2.0 * s * std::log((1.0 + s) / (1.0 - x));
}

double FG_inv(double x) {
  require(std::isfinite(x) && x >= 0.0 && x < 1.0, "FG_inv", x);
  if (x < 1e-3) return FG_inv_series(x, 12);
  return FG_inv_closed(x);
}

double FG_inv_rho(double rho) {
  require(std::isfinite(rho) && rho > 0.0 && rho <= 1.0, "FG_inv_rho", rho);
  if (rho > 0.5) return FG_inv(1.0 - rho);
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  return 2.0 * s * std::log((1.0 + s) / rho);
}

double A_carne(double x) {
  require(std::isfinite(x) && std::abs(x) <= 1.0, "A_carne", x);
  x = std::abs(x);
  if (x < 1e-2) {
    // sum_n x^{2n} / (n (2n-1))
    const double x2 = x * x;
    double term = x2, sum = 0.0;
    for (int n = 1; n <= 12; ++n, term *= x2) sum += term / (n * (2.0 * n - 1.0));
    return sum;
  }
  const double hi = (1.0 + x) * std::log1p(x);
  const double lo = x == 1.0 ? 0.0 : (1.0 - x) * std::log1p(-x);
  return hi + lo;
}

double A_ledr(double x) {
  require(std::isfinite(x) && std::abs(x) < 1.0, "A_ledr", x);
  x = std::abs(x);
  if (x < 0.1) {
    // Coefficient of x^{2m}: (2/(2m-1)) (1 - 2 C(2m,m)/4^m); zero for m = 1.
    const double x2 = x * x;
    double r = 0.5;  // C(2m,m)/4^m at m = 1
    double pw = x2, sum = 0.0;
    for (int m = 2; m <= 40; ++m) {
      r *= (2.0 * m - 1.0) / (2.0 * m);
      pw *= x2;
      const double term = 2.0 / (2.0 * m - 1.0) * (1.0 - 2.0 * r) * pw;
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return sum;
  }
  return F(x) + 4.0 * std::sqrt(1.0 - x * x) - 4.0;
}

double eval_special(std::string_view name, double x) {
  if (name == "F") return F(x);
  if (name == "G") return G(x);
  if (name == "FG_inv") return FG_inv(x);
  if (name == "A_carne") return A_carne(x);
  if (name == "A_ledr") return A_ledr(x);
  throw InvalidInput("unknown special function '" + std::string(name) + "'");
}

}  // namespace walkbounds
