#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "msgn/errors.hpp"
#include "msgn/network.hpp"
#include "test_util.hpp"

using namespace msgn;
using testutil::state;

TEST_CASE("telegraph source parses to the expected structure") {
  auto net = testutil::telegraph();
  CHECK(net.n() == 1);
  CHECK(net.d() == 1);
  CHECK(net.reactions().size() == 4);
  CHECK(net.continuous_reactions().size() == 2);
  CHECK(net.discrete_reactions().size() == 2);
  CHECK(net.reactions()[net.reaction_index("prod")].cls == ReactionClass::Continuous);
  CHECK(net.reactions()[net.reaction_index("deg")].cls == ReactionClass::Continuous);
  CHECK(net.reactions()[net.reaction_index("on")].cls == ReactionClass::Discrete);
  CHECK(net.reactions()[net.reaction_index("off")].cls == ReactionClass::Discrete);
}

TEST_CASE("empty reaction list is a valid network") {
  auto net = parse_network("species continuous: A\nspecies discrete: B\n");
  CHECK(net.reactions().empty());
  CHECK(net.n() == 1);
}

TEST_CASE("undeclared symbol is a parse error") {
  CHECK_THROWS_AS(parse_network(R"(
species continuous: P
species discrete: G
reaction r class=C h=[1] e=[0] rate = w
)"),
                  parse_error);
}

TEST_CASE("parse errors carry line information") {
  try {
    parse_network("species continuous: P\nspecies discrete: G\n"
                  "reaction r class=C h=[1] e=[0] rate = w\n");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("undeclared symbol") != std::string::npos);
  }
}

TEST_CASE("class C with nonzero e is rejected") {
  CHECK_THROWS_AS(parse_network(R"(
species continuous: P
species discrete: G
reaction r class=C h=[1] e=[1] rate = 1.0
)"),
                  validation_error);
}

TEST_CASE("duplicate species names are rejected") {
  CHECK_THROWS_AS(parse_network("species continuous: P P\nspecies discrete: G\n"), parse_error);
}

TEST_CASE("zero stoichiometry is rejected") {
  CHECK_THROWS_AS(parse_network(R"(
species continuous: P
species discrete: G
reaction r class=D h=[0] e=[0] rate = 1.0
)"),
                  validation_error);
}

TEST_CASE("sampled negative rate is a validation error") {
  CHECK_THROWS_AS(parse_network(R"(
species continuous: P
species discrete:
reaction r class=C h=[1] e=[] rate = 1 - P
)"),
                  validation_error);
}

TEST_CASE("declared bound is checked by sampling") {
  CHECK_THROWS_AS(parse_network(R"(
species continuous: P
species discrete:
bound = 1.0
reaction r class=C h=[1] e=[] rate = 2*P
)"),
                  validation_error);
  // and accepted when it actually bounds the rates on the box
  auto net = parse_network(R"(
species continuous: P
species discrete:
bound = 25.0
reaction r class=C h=[1] e=[] rate = 2*P
)");
  CHECK(net.rate_bound() == 25.0);
}

TEST_CASE("eval_rate matches hand evaluation on the telegraph model") {
  auto net = testutil::telegraph();
  CHECK(eval_rate(net, "deg", state({3.0}, {0})) == doctest::Approx(3.0));
  CHECK(eval_rate(net, "prod", state({5.0}, {0})) == doctest::Approx(0.0));
  CHECK(eval_rate(net, "on", state({0.0}, {1})) == doctest::Approx(0.0));
  CHECK_THROWS_AS(eval_rate(net, "nope", state({0.0}, {1})), std::invalid_argument);
  CHECK_THROWS_AS(eval_rate(net, "deg", state({1.0, 2.0}, {1})), std::invalid_argument);
}

TEST_CASE("drift is the stoichiometry-weighted sum of continuous rates") {
  auto net = testutil::telegraph();
  CHECK(drift(net, state({1.0}, {1}))[0] == doctest::Approx(1.0));
  CHECK(drift(net, state({2.0}, {1}))[0] == doctest::Approx(0.0));

  auto disc_only = parse_network(R"(
species continuous: P
species discrete: G
reaction on  class=D h=[0] e=[+1] rate = 0.5*(1-G)
reaction off class=D h=[0] e=[-1] rate = G
)");
  for (double x : {0.0, 1.0, 7.5}) CHECK(drift(disc_only, state({x}, {1}))[0] == 0.0);
}

TEST_CASE("re-summation oracle: drift equals sum of h_r * eval_rate") {
  auto net = testutil::burst_network();
  std::mt19937_64 gen(7);
  for (int it = 0; it < 50; ++it) {
    auto s = testutil::random_state(net, gen);
    auto f = drift(net, s);
    std::vector<double> manual(net.n(), 0.0);
    for (int r : net.continuous_reactions()) {
      double lam = eval_rate(net, r, s);
      for (int i = 0; i < net.n(); ++i)
        manual[i] += static_cast<double>(net.reactions()[r].h[i]) * lam;
    }
    for (int i = 0; i < net.n(); ++i) CHECK(f[i] == manual[i]);
  }
}

TEST_CASE("rate gradients match hand differentiation") {
  auto net = testutil::telegraph();
  auto grad_deg = rate_gradient(net, "deg");
  auto grad_prod = rate_gradient(net, "prod");
  HybridState s = state({3.7}, {1});
  EvalContext ctx{s.x, s.y, net.param_values()};
  CHECK(eval_expr(*grad_deg[0], ctx) == doctest::Approx(1.0));
  CHECK(eval_expr(*grad_prod[0], ctx) == doctest::Approx(0.0));

  auto quad = parse_network(R"(
species continuous: X
species discrete:
param c = 0.5
reaction r class=C h=[1] e=[] rate = c*X^2
)");
  auto g = rate_gradient(quad, "r");
  HybridState q = state({3.0}, {});
  EvalContext qctx{q.x, q.y, quad.param_values()};
  CHECK(eval_expr(*g[0], qctx) == doctest::Approx(3.0));
}

namespace {

// central finite differences of eval_rate, step 1e-5
double fd_gradient(const ReactionNetwork& net, int r, HybridState s, int i) {
  const double h = 1e-5;
  s.x[i] += h;
  double up = eval_rate(net, r, s);
  s.x[i] -= 2 * h;
  double dn = eval_rate(net, r, s);
  return (up - dn) / (2 * h);
}

void check_gradients_against_fd(const ReactionNetwork& net, unsigned rng_seed) {
  std::mt19937_64 gen(rng_seed);
  for (int r = 0; r < static_cast<int>(net.reactions().size()); ++r) {
    auto grad = rate_gradient(net, r);
    for (int it = 0; it < 100; ++it) {
      auto s = testutil::random_state(net, gen);
      EvalContext ctx{s.x, s.y, net.param_values()};
      for (int i = 0; i < net.n(); ++i) {
        double sym = eval_expr(*grad[i], ctx);
        double fd = fd_gradient(net, r, s, i);
        CHECK(std::abs(sym - fd) <= 1e-6 * (1.0 + std::abs(sym)));
      }
    }
  }
}

}  // namespace

TEST_CASE("symbolic gradients agree with central finite differences") {
  check_gradients_against_fd(testutil::telegraph_xdep(), 11);
  auto cubic = parse_network(R"(
species continuous: A B
species discrete: G
param c = 0.25
reaction r1 class=C h=[1,0]  e=[0] rate = c*A^3 + A*B + 2*G
reaction r2 class=C h=[0,-1] e=[0] rate = B^2*(1+A)
)");
  check_gradients_against_fd(cubic, 12);
}

TEST_CASE("gradients of truncated rates stay consistent with finite differences") {
  auto net = truncate_rates(testutil::telegraph_xdep(), 4.0);
  // states inside, across, and outside the cutoff shoulder
  std::mt19937_64 gen(13);
  for (int r = 0; r < static_cast<int>(net.reactions().size()); ++r) {
    auto grad = rate_gradient(net, r);
    for (int it = 0; it < 100; ++it) {
      auto s = testutil::random_state(net, gen);
      EvalContext ctx{s.x, s.y, net.param_values()};
      for (int i = 0; i < net.n(); ++i) {
        double sym = eval_expr(*grad[i], ctx);
        double fd = fd_gradient(net, r, s, i);
        CHECK(std::abs(sym - fd) <= 1e-5 * (1.0 + std::abs(sym)));
      }
    }
  }
}

TEST_CASE("drift jacobian matches hand value and finite differences") {
  auto net = testutil::telegraph();
  auto jac = drift_jacobian(net, state({1.0}, {1}));
  CHECK(jac(0, 0) == doctest::Approx(-1.0));

  auto disc_only = parse_network(R"(
species continuous: P
species discrete: G
reaction on class=D h=[0] e=[+1] rate = 0.5*(1-G)
)");
  CHECK(drift_jacobian(disc_only, state({1.0}, {0}))(0, 0) == 0.0);

  // finite differences of drift at x = 0.7
  HybridState s = state({0.7}, {1});
  const double h = 1e-6;
  auto up = drift(net, state({0.7 + h}, {1}));
  auto dn = drift(net, state({0.7 - h}, {1}));
  double fd = (up[0] - dn[0]) / (2 * h);
  auto j = drift_jacobian(net, s);
  CHECK(std::abs(j(0, 0) - fd) <= 1e-6 * std::abs(fd));
}

TEST_CASE("diffusion matrix columns are h_r sqrt(rate)") {
  auto net = testutil::telegraph();
  auto sigma = diffusion_matrix(net, state({1.0}, {1}));
  REQUIRE(sigma.rows == 1);
  REQUIRE(sigma.cols == 2);
  CHECK(sigma(0, 0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sigma(0, 1) == doctest::Approx(-1.0));

  auto zero = diffusion_matrix(net, state({0.0}, {0}));
  CHECK(zero(0, 0) == 0.0);
  CHECK(zero(0, 1) == 0.0);

  // sigma sigma^T = sum h h^T lambda, here 2 + 1 = 3
  double ss = sigma(0, 0) * sigma(0, 0) + sigma(0, 1) * sigma(0, 1);
  CHECK(ss == doctest::Approx(3.0));
}

TEST_CASE("sigma sigma^T identity holds to machine precision at random states") {
  auto net = testutil::burst_network();
  std::mt19937_64 gen(17);
  for (int it = 0; it < 100; ++it) {
    auto s = testutil::random_state(net, gen);
    auto sigma = diffusion_matrix(net, s);
    for (int i = 0; i < net.n(); ++i)
      for (int j = 0; j < net.n(); ++j) {
        double lhs = 0.0;
        for (int c = 0; c < sigma.cols; ++c) lhs += sigma(i, c) * sigma(j, c);
        double rhs = 0.0;
        for (int r : net.continuous_reactions()) {
          const auto& rx = net.reactions()[r];
          rhs += static_cast<double>(rx.h[i]) * static_cast<double>(rx.h[j]) *
                 eval_rate(net, r, s);
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      }
  }
}

TEST_CASE("diffusion matrix rejects states with negative rates") {
  auto net = parse_network(R"(
species continuous: X
species discrete: G
reaction r class=C h=[1] e=[0] rate = 1 - G
)",
                           DomainBox{10.0, 1, 1000});
  // G = 1 keeps the rate at zero; evaluation at G = 3 dips negative
  CHECK_THROWS_AS(diffusion_matrix(net, state({1.0}, {3})), validation_error);
}

TEST_CASE("truncation: identity inside, zero outside, documented value between") {
  auto net = testutil::telegraph();
  auto cut = truncate_rates(net, 10.0);

  // |z| = 4 + 1 = 5 < k: unchanged
  CHECK(eval_rate(cut, "deg", state({4.0}, {1})) ==
        doctest::Approx(eval_rate(net, "deg", state({4.0}, {1}))));
  // |z| = 30 = 3k: identically zero
  CHECK(eval_rate(cut, "deg", state({30.0}, {0})) == 0.0);
  // |z| = 15 = 1.5k: theta(1.5) = 1/2 from the quintic smoothstep
  CHECK(eval_rate(cut, "deg", state({15.0}, {0})) == doctest::Approx(15.0 * 0.5));
  CHECK(cutoff_theta(1.25, 0) == doctest::Approx(0.896484375));
  CHECK(cutoff_theta(0.3, 0) == 1.0);
  CHECK(cutoff_theta(2.7, 0) == 0.0);

  // truncated network declares a bound
  CHECK(cut.rate_bound().has_value());
  CHECK(*cut.rate_bound() > 0.0);
}

TEST_CASE("truncated rates are pointwise dominated and equal on |z| <= k") {
  auto net = testutil::telegraph_xdep();
  auto cut = truncate_rates(net, 6.0);
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> ux(0.0, 20.0);
  std::uniform_int_distribution<long long> uy(0, 3);
  for (int it = 0; it < 500; ++it) {
    HybridState s = state({ux(gen)}, {uy(gen)});
    for (int r = 0; r < static_cast<int>(net.reactions().size()); ++r) {
      double orig = eval_rate(net, r, s);
      double trunc = eval_rate(cut, r, s);
      CHECK(trunc <= orig + 1e-12);
      if (state_norm(s) <= 6.0) CHECK(trunc == doctest::Approx(orig));
    }
  }
}

TEST_CASE("parse then serialize is the identity on semantic content") {
  auto check_roundtrip = [](const ReactionNetwork& net) {
    auto text = serialize_network(net);
    auto back = parse_network(text);
    REQUIRE(back.reactions().size() == net.reactions().size());
    CHECK(back.continuous_species() == net.continuous_species());
    CHECK(back.discrete_species() == net.discrete_species());
    CHECK(back.param_names() == net.param_names());
    CHECK(back.param_values() == net.param_values());
    CHECK(back.rate_bound() == net.rate_bound());
    std::mt19937_64 gen(29);
    for (size_t r = 0; r < net.reactions().size(); ++r) {
      CHECK(back.reactions()[r].id == net.reactions()[r].id);
      CHECK(back.reactions()[r].h == net.reactions()[r].h);
      CHECK(back.reactions()[r].e == net.reactions()[r].e);
      for (int it = 0; it < 20; ++it) {
        auto s = testutil::random_state(net, gen);
        CHECK(eval_rate(back, static_cast<int>(r), s) ==
              doctest::Approx(eval_rate(net, static_cast<int>(r), s)).epsilon(1e-14));
      }
    }
  };
  check_roundtrip(testutil::telegraph());
  check_roundtrip(testutil::telegraph_xdep());
  check_roundtrip(truncate_rates(testutil::telegraph(), 10.0));
}

TEST_CASE("check_state enforces dimensions and nonnegativity") {
  auto net = testutil::telegraph();
  CHECK_NOTHROW(check_state(net, state({1.0}, {0})));
  CHECK_THROWS_AS(check_state(net, state({-0.5}, {0})), std::invalid_argument);
  CHECK_THROWS_AS(check_state(net, state({1.0}, {-1})), std::invalid_argument);
  CHECK_THROWS_AS(check_state(net, state({1.0, 2.0}, {0})), std::invalid_argument);
}

TEST_CASE("rates evaluate at the clamped state when x dips below zero") {
  auto net = testutil::telegraph();
  // raw state with slightly negative x, as a boundary jump can produce
  HybridState s = state({1.0}, {1});
  s.x[0] = -1e-9;
  CHECK(eval_rate(net, "deg", s) == 0.0);
}
