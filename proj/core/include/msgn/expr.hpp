#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace msgn {

// Rate expressions are polynomial trees over continuous species x_i,
// discrete species y_j, named parameters and constants, closed under
// d/dx_i. Two extra node kinds keep the closure after truncation:
//
//   Cutoff(k, m)  — evaluates theta^(m)((|x|+|y|)/k), the m-th derivative
//                   of the C^2 smoothstep cutoff theta (theta == 1 on
//                   [0,1], == 0 on [2,inf), quintic 1 - s(u-1) with
//                   s(t) = 6t^5 - 15t^4 + 10t^3 in between);
//   InvNormX(p)   — evaluates |x|^(-p), defined on |x| > 0.
//
// Only the grammar kinds (constants, symbols, sum, product, power, and
// order-zero cutoffs) ever appear in networks; derivative-only kinds show
// up inside gradient expressions and are never serialized.
enum class ExprKind {
  Constant,
  SpeciesX,
  SpeciesY,
  Param,
  Sum,
  Product,
  Power,
  Cutoff,
  InvNormX,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Constant;
  double value = 0.0;             // Constant
  int index = 0;                  // species/param index, Power exponent,
                                  // Cutoff derivative order, InvNormX power
  double cutoff_k = 0.0;          // Cutoff scale k
  std::vector<ExprPtr> children;  // Sum/Product operands; Power base
};

struct EvalContext {
  std::span<const double> x;
  std::span<const long long> y;
  std::span<const double> params;
};

ExprPtr make_constant(double v);
ExprPtr make_species_x(int i);
ExprPtr make_species_y(int j);
ExprPtr make_param(int index);
ExprPtr make_sum(std::vector<ExprPtr> terms);
ExprPtr make_product(std::vector<ExprPtr> factors);
ExprPtr make_power(ExprPtr base, int exponent);  // exponent >= 0
ExprPtr make_cutoff(double k);                   // order-zero theta(|z|/k)

double eval_expr(const Expr& e, const EvalContext& ctx);

// Symbolic d/dx_i; the result is again an expression over the same
// symbols (possibly using the derivative-only node kinds). Constants are
// folded and trivial sums/products collapsed.
ExprPtr differentiate(const ExprPtr& e, int xi);

// m-th derivative of the cutoff smoothstep at argument u (m = 0 gives
// theta itself). Piecewise polynomial; exact formula documented above.
double cutoff_theta(double u, int order);

// Infix rendering. Grammar kinds round-trip through the network parser;
// derivative-only kinds render in a debug-only functional form.
std::string to_string(const Expr& e, std::span<const std::string> x_names,
                      std::span<const std::string> y_names,
                      std::span<const std::string> param_names);

// Structural equality (same tree shape, kinds, indices and constants).
bool expr_equal(const Expr& a, const Expr& b);

}  // namespace msgn
