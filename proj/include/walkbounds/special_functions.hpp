#pragma once

#include <string_view>
#include <vector>

namespace walkbounds {

/// 2x artanh(x) on (-1, 1).
double F(double x);
/// 1 - sqrt(1 - x^2) on [-1, 1].
double G(double x);
/// F(G^{-1}(x)) on [0, 1); series below 1e-3.
double FG_inv(double x);
/// FG_inv(1 - rho), accurate for rho far below double epsilon.
double FG_inv_rho(double rho);
/// Closed form only, no series branch.
double FG_inv_closed(double x);
/// Taylor coefficients c_1..c_n of FG_inv at 0.
std::vector<double> fg_inv_coefficients(int n);
/// sum_{k<=n} c_k x^k.
double FG_inv_series(double x, int n);

/// (1+x)log(1+x) + (1-x)log(1-x) on [-1, 1].
double A_carne(double x);
/// 2x artanh(x) + 4 sqrt(1-x^2) - 4 on (-1, 1).
double A_ledr(double x);

/// Dispatch by name: F, G, FG_inv, A_carne, A_ledr. Throws DomainError
/// outside the domain and InvalidInput for an unknown name.
double eval_special(std::string_view name, double x);

}  // namespace walkbounds
