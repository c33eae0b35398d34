#include "msgn/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "msgn/errors.hpp"
#include "msgn/rng.hpp"

namespace msgn {

double state_norm(const HybridState& s) { return norm2(s.x) + norm2_ll(s.y); }

ReactionNetwork::ReactionNetwork(std::vector<std::string> continuous_species,
                                 std::vector<std::string> discrete_species,
                                 std::vector<std::string> param_names,
                                 std::vector<double> param_values,
                                 std::vector<Reaction> reactions,
                                 std::optional<double> rate_bound)
    : species_x_(std::move(continuous_species)),
      species_y_(std::move(discrete_species)),
      param_names_(std::move(param_names)),
      param_values_(std::move(param_values)),
      reactions_(std::move(reactions)),
      rate_bound_(rate_bound) {
  for (int r = 0; r < static_cast<int>(reactions_.size()); ++r) {
    if (reactions_[r].cls == ReactionClass::Continuous)
      continuous_idx_.push_back(r);
    else
      discrete_idx_.push_back(r);
  }
}

int ReactionNetwork::reaction_index(std::string_view id) const {
  for (int r = 0; r < static_cast<int>(reactions_.size()); ++r)
    if (reactions_[r].id == id) return r;
  throw std::invalid_argument("unknown reaction id: " + std::string(id));
}

namespace {

struct Symbols {
  const std::vector<std::string>* xs;
  const std::vector<std::string>* ys;
  const std::vector<std::string>* params;

  // kind: 0 = x, 1 = y, 2 = param; returns index or -1
  std::pair<int, int> lookup(const std::string& name) const {
    for (size_t i = 0; i < xs->size(); ++i)
      if ((*xs)[i] == name) return {0, static_cast<int>(i)};
    for (size_t i = 0; i < ys->size(); ++i)
      if ((*ys)[i] == name) return {1, static_cast<int>(i)};
    for (size_t i = 0; i < params->size(); ++i)
      if ((*params)[i] == name) return {2, static_cast<int>(i)};
    return {-1, -1};
  }
};

// Recursive-descent parser for rate expressions:
//   expr   := term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' uint)?
//   atom   := number | ident | 'cutoff' '(' number ')' | '(' expr ')' | '-' atom
class ExprParser {
 public:
  ExprParser(std::string_view src, int line, int col0, const Symbols& sym)
      : src_(src), line_(line), col0_(col0), sym_(sym) {}

  ExprPtr parse() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input in rate expression");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw parse_error(msg, line_, col0_ + static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  ExprPtr parse_expr() {
    std::vector<ExprPtr> terms;
    bool negate = eat('-');
    auto first = parse_term();
    terms.push_back(negate ? make_product({make_constant(-1.0), first}) : first);
    for (;;) {
      if (eat('+'))
        terms.push_back(parse_term());
      else if (eat('-'))
        terms.push_back(make_product({make_constant(-1.0), parse_term()}));
      else
        break;
    }
    return terms.size() == 1 ? terms[0] : make_sum(std::move(terms));
  }

  ExprPtr parse_term() {
    std::vector<ExprPtr> factors{parse_factor()};
    while (true) {
      char c = peek();
      if (c == '*') {
        ++pos_;
        factors.push_back(parse_factor());
      } else if (c == '/') {
        fail("division is not supported; rates are polynomial");
      } else {
        break;
      }
    }
    return factors.size() == 1 ? factors[0] : make_product(std::move(factors));
  }

  ExprPtr parse_factor() {
    auto base = parse_atom();
    if (eat('^')) {
      skip_ws();
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ == start) fail("expected nonnegative integer exponent after '^'");
      int exp = std::stoi(std::string(src_.substr(start, pos_ - start)));
      return make_power(base, exp);
    }
    return base;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of rate expression");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == '-') {
      ++pos_;
      return make_product({make_constant(-1.0), parse_atom()});
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name = parse_ident();
      if (name == "cutoff") {
        if (!eat('(')) fail("expected '(' after cutoff");
        auto num = parse_number();
        if (!eat(')')) fail("expected ')' after cutoff scale");
        if (num->value <= 0.0) fail("cutoff scale must be positive");
        return make_cutoff(num->value);
      }
      auto [kind, idx] = sym_.lookup(name);
      if (kind == 0) return make_species_x(idx);
      if (kind == 1) return make_species_y(idx);
      if (kind == 2) return make_param(idx);
      fail("undeclared symbol '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::shared_ptr<const Expr> parse_number() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
            src_[pos_] == 'e' || src_[pos_] == 'E' ||
            ((src_[pos_] == '+' || src_[pos_] == '-') && pos_ > start &&
             (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E'))))
      ++pos_;
    if (pos_ == start) fail("expected number");
    try {
      return make_constant(std::stod(std::string(src_.substr(start, pos_ - start))));
    } catch (const std::exception&) {
      fail("malformed number");
    }
  }

  std::string parse_ident() {
    size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                  src_[pos_] == '_'))
      ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_;
  int col0_;
  const Symbols& sym_;
};

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<long long> parse_int_vector(const std::string& s, int line) {
  size_t lb = s.find('[');
  size_t rb = s.rfind(']');
  if (lb == std::string::npos || rb == std::string::npos || rb < lb)
    throw parse_error("expected bracketed integer vector", line);
  std::string body = s.substr(lb + 1, rb - lb - 1);
  for (char& c : body)
    if (c == ',') c = ' ';
  std::istringstream is(body);
  std::vector<long long> v;
  long long x;
  while (is >> x) v.push_back(x);
  if (!is.eof()) throw parse_error("malformed integer vector", line);
  return v;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

}  // namespace

ReactionNetwork parse_network(std::string_view text, const DomainBox& box) {
  std::vector<std::string> xs, ys, param_names;
  std::vector<double> param_values;
  std::optional<double> bound;
  struct RawReaction {
    std::string id, cls, h, e, rate;
    int line;
    int rate_col;
  };
  std::vector<RawReaction> raw;

  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = line;
    if (size_t hash = stripped.find('#'); hash != std::string::npos)
      stripped.resize(hash);
    size_t first = stripped.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    size_t last = stripped.find_last_not_of(" \t\r");
    stripped = stripped.substr(first, last - first + 1);

    std::istringstream ls(stripped);
    std::string kw;
    ls >> kw;
    if (kw == "species") {
      std::string which;
      ls >> which;
      bool cont;
      if (which == "continuous:" || which == "continuous")
        cont = true;
      else if (which == "discrete:" || which == "discrete")
        cont = false;
      else
        throw parse_error("expected 'continuous:' or 'discrete:' after species", lineno);
      std::string rest;
      std::getline(ls, rest);
      if (size_t colon = rest.find(':'); which.back() != ':' && colon != std::string::npos)
        rest = rest.substr(colon + 1);
      for (auto& name : split_names(rest)) {
        if (!valid_name(name)) throw parse_error("invalid species name '" + name + "'", lineno);
        (cont ? xs : ys).push_back(name);
      }
    } else if (kw == "param") {
      std::string name, eq;
      double v;
      ls >> name >> eq >> v;
      if (ls.fail() || eq != "=") throw parse_error("expected 'param <name> = <value>'", lineno);
      if (!valid_name(name)) throw parse_error("invalid parameter name '" + name + "'", lineno);
      param_names.push_back(name);
      param_values.push_back(v);
    } else if (kw == "bound") {
      std::string eq;
      double v;
      ls >> eq >> v;
      if (ls.fail() || eq != "=") throw parse_error("expected 'bound = <value>'", lineno);
      if (!(v > 0.0)) throw parse_error("rate bound must be positive", lineno);
      bound = v;
    } else if (kw == "reaction") {
      RawReaction rr;
      rr.line = lineno;
      std::string cls_f, h_f, e_f, rate_kw, eq;
      ls >> rr.id >> cls_f >> h_f >> e_f >> rate_kw >> eq;
      if (ls.fail() || rate_kw != "rate" || eq != "=")
        throw parse_error(
            "expected 'reaction <id> class=<C|D> h=[..] e=[..] rate = <expr>'", lineno);
      if (!valid_name(rr.id)) throw parse_error("invalid reaction id '" + rr.id + "'", lineno);
      if (cls_f.rfind("class=", 0) != 0 || cls_f.size() != 7)
        throw parse_error("expected class=C or class=D", lineno);
      rr.cls = cls_f.substr(6);
      if (rr.cls != "C" && rr.cls != "D") throw parse_error("reaction class must be C or D", lineno);
      if (h_f.rfind("h=", 0) != 0 || e_f.rfind("e=", 0) != 0)
        throw parse_error("expected h=[..] followed by e=[..]", lineno);
      rr.h = h_f.substr(2);
      rr.e = e_f.substr(2);
      std::getline(ls, rr.rate);
      rr.rate_col = static_cast<int>(first + stripped.size() - rr.rate.size());
      raw.push_back(std::move(rr));
    } else {
      throw parse_error("unknown directive '" + kw + "'", lineno);
    }
  }

  // duplicate-name checks across species and params
  {
    std::vector<std::string> all;
    all.insert(all.end(), xs.begin(), xs.end());
    all.insert(all.end(), ys.begin(), ys.end());
    all.insert(all.end(), param_names.begin(), param_names.end());
    auto sorted = all;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end())
      throw parse_error("duplicate declaration of '" + *dup + "'");
  }

  Symbols sym{&xs, &ys, &param_names};
  std::vector<Reaction> reactions;
  for (auto& rr : raw) {
    Reaction r;
    r.id = rr.id;
    r.cls = rr.cls == "C" ? ReactionClass::Continuous : ReactionClass::Discrete;
    r.h = parse_int_vector(rr.h, rr.line);
    r.e = parse_int_vector(rr.e, rr.line);
    r.rate = ExprParser(rr.rate, rr.line, rr.rate_col, sym).parse();
    reactions.push_back(std::move(r));
  }
  for (size_t i = 0; i < reactions.size(); ++i)
    for (size_t j = i + 1; j < reactions.size(); ++j)
      if (reactions[i].id == reactions[j].id)
        throw parse_error("duplicate reaction id '" + reactions[i].id + "'");

  ReactionNetwork net(std::move(xs), std::move(ys), std::move(param_names),
                      std::move(param_values), std::move(reactions), bound);
  validate_network(net, box);
  return net;
}

void validate_network(const ReactionNetwork& net, const DomainBox& box) {
  const int n = net.n(), d = net.d();
  for (const auto& r : net.reactions()) {
    if (static_cast<int>(r.h.size()) != n)
      throw validation_error("reaction '" + r.id + "': h has length " +
                             std::to_string(r.h.size()) + ", expected " + std::to_string(n));
    if (static_cast<int>(r.e.size()) != d)
      throw validation_error("reaction '" + r.id + "': e has length " +
                             std::to_string(r.e.size()) + ", expected " + std::to_string(d));
    bool h_zero = std::all_of(r.h.begin(), r.h.end(), [](long long v) { return v == 0; });
    bool e_zero = std::all_of(r.e.begin(), r.e.end(), [](long long v) { return v == 0; });
    if (r.cls == ReactionClass::Continuous && !e_zero)
      throw validation_error("reaction '" + r.id + "' is class C but has nonzero e");
    if (h_zero && e_zero)
      throw validation_error("reaction '" + r.id + "' has zero stoichiometry");
  }

  // Randomized domain checks: nonnegativity of every rate, and the
  // declared bound when present.
  if (box.samples > 0 && (n + d) > 0) {
    rng::KeyedStream ks(rng::combine(box.seed, 0x76616c69646174ULL));
    HybridState s;
    s.x.resize(n);
    s.y.resize(d);
    for (int it = 0; it < box.samples; ++it) {
      for (int i = 0; i < n; ++i) s.x[i] = box.x_max * ks.next_unit();
      for (int j = 0; j < d; ++j)
        s.y[j] = static_cast<long long>(ks.next_u64() % (box.y_max + 1));
      for (int r = 0; r < static_cast<int>(net.reactions().size()); ++r) {
        double v = eval_rate(net, r, s);
        if (!std::isfinite(v))
          throw validation_error("rate '" + net.reactions()[r].id +
                                 "' is non-finite on the sampled domain");
        if (v < 0.0)
          throw validation_error("rate '" + net.reactions()[r].id +
                                 "' is negative on the sampled domain (value " +
                                 format_double(v) + ")");
        if (net.rate_bound() && v > *net.rate_bound())
          throw validation_error("rate '" + net.reactions()[r].id +
                                 "' exceeds declared bound on the sampled domain (value " +
                                 format_double(v) + ")");
      }
    }
  }
}

void check_state(const ReactionNetwork& net, const HybridState& s) {
  if (static_cast<int>(s.x.size()) != net.n() || static_cast<int>(s.y.size()) != net.d())
    throw std::invalid_argument("state dimensions do not match the network");
  for (double v : s.x)
    if (!(v >= 0.0)) throw std::invalid_argument("continuous state must be nonnegative");
  for (long long v : s.y)
    if (v < 0) throw std::invalid_argument("discrete state must be nonnegative");
}

namespace {

// Rates are only meaningful on the nonnegative orthant; jumps of size
// h/N from the boundary may leave a raw state slightly negative, so all
// evaluations clamp x first.
struct ClampedEval {
  std::vector<double> xc;
  EvalContext ctx;
  ClampedEval(const ReactionNetwork& net, const HybridState& s) {
    xc.resize(s.x.size());
    for (size_t i = 0; i < s.x.size(); ++i) xc[i] = s.x[i] < 0.0 ? 0.0 : s.x[i];
    ctx = EvalContext{xc, s.y, net.param_values()};
  }
};

void check_dims(const ReactionNetwork& net, const HybridState& s) {
  if (static_cast<int>(s.x.size()) != net.n() || static_cast<int>(s.y.size()) != net.d())
    throw std::invalid_argument("state dimensions do not match the network");
}

}  // namespace

double eval_rate(const ReactionNetwork& net, int r, const HybridState& s) {
  if (r < 0 || r >= static_cast<int>(net.reactions().size()))
    throw std::invalid_argument("reaction index out of range");
  check_dims(net, s);
  ClampedEval ce(net, s);
  return eval_expr(*net.reactions()[r].rate, ce.ctx);
}

double eval_rate(const ReactionNetwork& net, std::string_view id, const HybridState& s) {
  return eval_rate(net, net.reaction_index(id), s);
}

std::vector<double> drift(const ReactionNetwork& net, const HybridState& s) {
  check_dims(net, s);
  ClampedEval ce(net, s);
  std::vector<double> f(net.n(), 0.0);
  for (int r : net.continuous_reactions()) {
    const Reaction& rx = net.reactions()[r];
    double lam = eval_expr(*rx.rate, ce.ctx);
    for (int i = 0; i < net.n(); ++i) f[i] += static_cast<double>(rx.h[i]) * lam;
  }
  return f;
}

std::vector<ExprPtr> rate_gradient(const ReactionNetwork& net, int r) {
  if (r < 0 || r >= static_cast<int>(net.reactions().size()))
    throw std::invalid_argument("reaction index out of range");
  std::vector<ExprPtr> g;
  g.reserve(net.n());
  for (int i = 0; i < net.n(); ++i) g.push_back(differentiate(net.reactions()[r].rate, i));
  return g;
}

std::vector<ExprPtr> rate_gradient(const ReactionNetwork& net, std::string_view id) {
  return rate_gradient(net, net.reaction_index(id));
}

Mat drift_jacobian(const ReactionNetwork& net, const HybridState& s) {
  check_dims(net, s);
  ClampedEval ce(net, s);
  Mat jac(net.n(), net.n());
  for (int r : net.continuous_reactions()) {
    const Reaction& rx = net.reactions()[r];
    for (int j = 0; j < net.n(); ++j) {
      auto dj = differentiate(rx.rate, j);
      double v = eval_expr(*dj, ce.ctx);
      for (int i = 0; i < net.n(); ++i) jac(i, j) += static_cast<double>(rx.h[i]) * v;
    }
  }
  return jac;
}

DriftJacobianEvaluator::DriftJacobianEvaluator(const ReactionNetwork& net)
    : net_(&net), xc_(net.n(), 0.0) {
  for (int r : net.continuous_reactions()) {
    std::vector<ExprPtr> g;
    g.reserve(net.n());
    for (int j = 0; j < net.n(); ++j) g.push_back(differentiate(net.reactions()[r].rate, j));
    grads_.push_back(std::move(g));
  }
}

void DriftJacobianEvaluator::eval(const HybridState& s, Mat& out) {
  const int n = net_->n();
  for (int i = 0; i < n; ++i) xc_[i] = s.x[i] < 0.0 ? 0.0 : s.x[i];
  EvalContext ctx{xc_, s.y, net_->param_values()};
  std::fill(out.a.begin(), out.a.end(), 0.0);
  const auto& cont = net_->continuous_reactions();
  for (size_t c = 0; c < cont.size(); ++c) {
    const Reaction& rx = net_->reactions()[cont[c]];
    for (int j = 0; j < n; ++j) {
      double v = eval_expr(*grads_[c][j], ctx);
      if (v == 0.0) continue;
      for (int i = 0; i < n; ++i) out(i, j) += static_cast<double>(rx.h[i]) * v;
    }
  }
}

Mat diffusion_matrix(const ReactionNetwork& net, const HybridState& s) {
  check_dims(net, s);
  ClampedEval ce(net, s);
  const auto& cont = net.continuous_reactions();
  Mat sigma(net.n(), static_cast<int>(cont.size()));
  for (int c = 0; c < static_cast<int>(cont.size()); ++c) {
    const Reaction& rx = net.reactions()[cont[c]];
    double lam = eval_expr(*rx.rate, ce.ctx);
    if (lam < 0.0)
      throw validation_error("negative rate for reaction '" + rx.id +
                             "' at the requested state");
    double root = std::sqrt(lam);
    for (int i = 0; i < net.n(); ++i) sigma(i, c) = static_cast<double>(rx.h[i]) * root;
  }
  return sigma;
}

ReactionNetwork truncate_rates(const ReactionNetwork& net, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("truncation radius must be positive");
  std::vector<Reaction> reactions = net.reactions();
  for (auto& r : reactions) r.rate = make_product({make_cutoff(k), r.rate});

  // Estimate the bound by sampling |z| <= 2k; beyond that radius every
  // truncated rate is exactly zero.
  rng::KeyedStream ks(rng::combine(0x7472756e63ULL, static_cast<uint64_t>(k * 4096.0)));
  const int n = net.n(), d = net.d();
  HybridState s;
  s.x.resize(n);
  s.y.resize(d);
  double max_rate = 0.0;
  ReactionNetwork tmp(net.continuous_species(), net.discrete_species(), net.param_names(),
                      net.param_values(), reactions, std::nullopt);
  for (int it = 0; it < 2000; ++it) {
    double scale = 2.0 * k;
    for (int attempt = 0;; ++attempt) {
      for (int i = 0; i < n; ++i) s.x[i] = scale * ks.next_unit();
      for (int j = 0; j < d; ++j)
        s.y[j] = static_cast<long long>(ks.next_u64() %
                                        (static_cast<unsigned long long>(scale) + 1));
      if (state_norm(s) <= 2.0 * k) break;
      if (attempt >= 64) scale *= 0.5;
    }
    for (int r = 0; r < static_cast<int>(reactions.size()); ++r)
      max_rate = std::max(max_rate, eval_rate(tmp, r, s));
  }
  std::optional<double> bound;
  if (max_rate > 0.0) bound = max_rate * 1.05;
  return ReactionNetwork(net.continuous_species(), net.discrete_species(), net.param_names(),
                         net.param_values(), std::move(reactions), bound);
}

std::string serialize_network(const ReactionNetwork& net) {
  std::string out;
  auto names_line = [&](const char* kind, const std::vector<std::string>& names) {
    out += "species ";
    out += kind;
    out += ":";
    for (const auto& s : names) {
      out += ' ';
      out += s;
    }
    out += '\n';
  };
  names_line("continuous", net.continuous_species());
  names_line("discrete", net.discrete_species());
  for (size_t i = 0; i < net.param_names().size(); ++i)
    out += "param " + net.param_names()[i] + " = " + format_double(net.param_values()[i]) + "\n";
  if (net.rate_bound()) out += "bound = " + format_double(*net.rate_bound()) + "\n";
  for (const auto& r : net.reactions()) {
    out += "reaction " + r.id + " class=";
    out += r.cls == ReactionClass::Continuous ? 'C' : 'D';
    auto vec = [&](const std::vector<long long>& v) {
      std::string s = "[";
      for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
      }
      return s + "]";
    };
    out += " h=" + vec(r.h) + " e=" + vec(r.e) + " rate = ";
    out += to_string(*r.rate, net.continuous_species(), net.discrete_species(),
                     net.param_names());
    out += '\n';
  }
  return out;
}

}  // namespace msgn
