#include "msgn/expr.hpp"

#include <cmath>
#include <stdexcept>

#include "msgn/util.hpp"

namespace msgn {

namespace {

std::shared_ptr<Expr> node(ExprKind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}

bool is_constant(const ExprPtr& e, double v) {
  return e->kind == ExprKind::Constant && e->value == v;
}

}  // namespace

ExprPtr make_constant(double v) {
  auto e = node(ExprKind::Constant);
  e->value = v;
  return e;
}

ExprPtr make_species_x(int i) {
  auto e = node(ExprKind::SpeciesX);
  e->index = i;
  return e;
}

ExprPtr make_species_y(int j) {
  auto e = node(ExprKind::SpeciesY);
  e->index = j;
  return e;
}

ExprPtr make_param(int index) {
  auto e = node(ExprKind::Param);
  e->index = index;
  return e;
}

ExprPtr make_sum(std::vector<ExprPtr> terms) {
  std::vector<ExprPtr> kept;
  double c = 0.0;
  for (auto& t : terms) {
    if (t->kind == ExprKind::Constant)
      c += t->value;
    else if (t->kind == ExprKind::Sum)  // flatten nested sums
      for (auto& g : t->children) kept.push_back(g);
    else
      kept.push_back(t);
  }
  if (c != 0.0 || kept.empty()) kept.push_back(make_constant(c));
  if (kept.size() == 1) return kept[0];
  auto e = node(ExprKind::Sum);
  e->children = std::move(kept);
  return e;
}

ExprPtr make_product(std::vector<ExprPtr> factors) {
  std::vector<ExprPtr> kept;
  double c = 1.0;
  for (auto& f : factors) {
    if (f->kind == ExprKind::Constant)
      c *= f->value;
    else if (f->kind == ExprKind::Product)
      for (auto& g : f->children) kept.push_back(g);
    else
      kept.push_back(f);
  }
  if (c == 0.0) return make_constant(0.0);
  if (c != 1.0 || kept.empty()) kept.insert(kept.begin(), make_constant(c));
  if (kept.size() == 1) return kept[0];
  auto e = node(ExprKind::Product);
  e->children = std::move(kept);
  return e;
}

ExprPtr make_power(ExprPtr base, int exponent) {
  if (exponent < 0) throw std::invalid_argument("power exponent must be nonnegative");
  if (exponent == 0) return make_constant(1.0);
  if (exponent == 1) return base;
  if (base->kind == ExprKind::Constant) return make_constant(std::pow(base->value, exponent));
  auto e = node(ExprKind::Power);
  e->index = exponent;
  e->children.push_back(std::move(base));
  return e;
}

ExprPtr make_cutoff(double k) {
  if (!(k > 0.0)) throw std::invalid_argument("cutoff scale must be positive");
  auto e = node(ExprKind::Cutoff);
  e->cutoff_k = k;
  e->index = 0;
  return e;
}

namespace {

ExprPtr make_cutoff_deriv(double k, int order) {
  auto e = node(ExprKind::Cutoff);
  e->cutoff_k = k;
  e->index = order;
  return e;
}

ExprPtr make_inv_norm_x(int p) {
  auto e = node(ExprKind::InvNormX);
  e->index = p;
  return e;
}

// |x| + |y| with Euclidean norms on each block.
double state_norm(const EvalContext& ctx) {
  return norm2(ctx.x) + norm2_ll(ctx.y);
}

}  // namespace

double cutoff_theta(double u, int order) {
  if (u <= 1.0) return order == 0 ? 1.0 : 0.0;
  if (u >= 2.0) return 0.0;
  // theta(u) = 1 - s(u-1), s(t) = 10 t^3 - 15 t^4 + 6 t^5.
  static const double s_coeff[6] = {0.0, 0.0, 0.0, 10.0, -15.0, 6.0};
  double c[6];
  for (int i = 0; i < 6; ++i) c[i] = -s_coeff[i];
  c[0] += 1.0;  // the leading 1 of theta
  // differentiate the polynomial `order` times
  int deg = 5;
  for (int d = 0; d < order; ++d) {
    for (int i = 0; i < deg; ++i) c[i] = c[i + 1] * (i + 1);
    c[deg] = 0.0;
    --deg;
    if (deg < 0) return 0.0;
  }
  double t = u - 1.0;
  double acc = 0.0;
  for (int i = deg; i >= 0; --i) acc = acc * t + c[i];
  return acc;
}

double eval_expr(const Expr& e, const EvalContext& ctx) {
  switch (e.kind) {
    case ExprKind::Constant:
      return e.value;
    case ExprKind::SpeciesX:
      return ctx.x[e.index];
    case ExprKind::SpeciesY:
      return static_cast<double>(ctx.y[e.index]);
    case ExprKind::Param:
      return ctx.params[e.index];
    case ExprKind::Sum: {
      double s = 0.0;
      for (const auto& c : e.children) s += eval_expr(*c, ctx);
      return s;
    }
    case ExprKind::Product: {
      double p = 1.0;
      for (const auto& c : e.children) p *= eval_expr(*c, ctx);
      return p;
    }
    case ExprKind::Power: {
      double b = eval_expr(*e.children[0], ctx);
      double r = 1.0;
      for (int i = 0; i < e.index; ++i) r *= b;
      return r;
    }
    case ExprKind::Cutoff:
      return cutoff_theta(state_norm(ctx) / e.cutoff_k, e.index);
    case ExprKind::InvNormX: {
      double n = norm2(ctx.x);
      return std::pow(n, -e.index);
    }
  }
  return 0.0;
}

ExprPtr differentiate(const ExprPtr& e, int xi) {
  switch (e->kind) {
    case ExprKind::Constant:
    case ExprKind::SpeciesY:
    case ExprKind::Param:
      return make_constant(0.0);
    case ExprKind::SpeciesX:
      return make_constant(e->index == xi ? 1.0 : 0.0);
    case ExprKind::Sum: {
      std::vector<ExprPtr> terms;
      for (const auto& c : e->children) {
        auto d = differentiate(c, xi);
        if (!is_constant(d, 0.0)) terms.push_back(d);
      }
      if (terms.empty()) return make_constant(0.0);
      return make_sum(std::move(terms));
    }
    case ExprKind::Product: {
      std::vector<ExprPtr> terms;
      for (size_t i = 0; i < e->children.size(); ++i) {
        auto d = differentiate(e->children[i], xi);
        if (is_constant(d, 0.0)) continue;
        std::vector<ExprPtr> factors;
        factors.push_back(d);
        for (size_t j = 0; j < e->children.size(); ++j)
          if (j != i) factors.push_back(e->children[j]);
        terms.push_back(make_product(std::move(factors)));
      }
      if (terms.empty()) return make_constant(0.0);
      return make_sum(std::move(terms));
    }
    case ExprKind::Power: {
      auto d = differentiate(e->children[0], xi);
      if (is_constant(d, 0.0)) return make_constant(0.0);
      return make_product({make_constant(static_cast<double>(e->index)),
                           make_power(e->children[0], e->index - 1), d});
    }
    case ExprKind::Cutoff: {
      // d/dx_i theta^(m)(|z|/k) = theta^(m+1)(|z|/k) * x_i / (k |x|)
      return make_product({make_constant(1.0 / e->cutoff_k),
                           make_cutoff_deriv(e->cutoff_k, e->index + 1),
                           make_species_x(xi), make_inv_norm_x(1)});
    }
    case ExprKind::InvNormX: {
      // d/dx_i |x|^(-p) = -p x_i |x|^(-p-2)
      return make_product({make_constant(-static_cast<double>(e->index)),
                           make_species_x(xi), make_inv_norm_x(e->index + 2)});
    }
  }
  return make_constant(0.0);
}

namespace {

// precedence: sum < product < power/atom
void render(const Expr& e, std::span<const std::string> xs, std::span<const std::string> ys,
            std::span<const std::string> ps, int parent_prec, std::string& out) {
  auto paren = [&](int prec, auto&& body) {
    bool need = prec < parent_prec;
    if (need) out += '(';
    body();
    if (need) out += ')';
  };
  switch (e.kind) {
    case ExprKind::Constant:
      if (e.value < 0.0) {
        out += '(';
        out += format_double(e.value);
        out += ')';
      } else {
        out += format_double(e.value);
      }
      break;
    case ExprKind::SpeciesX:
      out += xs[e.index];
      break;
    case ExprKind::SpeciesY:
      out += ys[e.index];
      break;
    case ExprKind::Param:
      out += ps[e.index];
      break;
    case ExprKind::Sum:
      paren(1, [&] {
        for (size_t i = 0; i < e.children.size(); ++i) {
          if (i) out += " + ";
          render(*e.children[i], xs, ys, ps, 1, out);
        }
      });
      break;
    case ExprKind::Product:
      paren(2, [&] {
        for (size_t i = 0; i < e.children.size(); ++i) {
          if (i) out += '*';
          render(*e.children[i], xs, ys, ps, 2, out);
        }
      });
      break;
    case ExprKind::Power:
      paren(3, [&] {
        render(*e.children[0], xs, ys, ps, 4, out);
        out += '^';
        out += std::to_string(e.index);
      });
      break;
    case ExprKind::Cutoff:
      if (e.index == 0) {
        out += "cutoff(";
        out += format_double(e.cutoff_k);
        out += ')';
      } else {
        out += "cutoff_d" + std::to_string(e.index) + "(" + format_double(e.cutoff_k) + ")";
      }
      break;
    case ExprKind::InvNormX:
      out += "inv_norm_x(" + std::to_string(e.index) + ")";
      break;
  }
}

}  // namespace

std::string to_string(const Expr& e, std::span<const std::string> x_names,
                      std::span<const std::string> y_names,
                      std::span<const std::string> param_names) {
  std::string out;
  render(e, x_names, y_names, param_names, 0, out);
  return out;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.value != b.value || a.index != b.index ||
      a.cutoff_k != b.cutoff_k || a.children.size() != b.children.size())
    return false;
  for (size_t i = 0; i < a.children.size(); ++i)
    if (!expr_equal(*a.children[i], *b.children[i])) return false;
  return true;
}

}  // namespace msgn
