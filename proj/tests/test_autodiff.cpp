#include <doctest.h>

#include "autodiff.hpp"
#include "support.hpp"

using namespace claqs;
using namespace testing;
namespace A = claqs::ad;

namespace {

constexpr int kSeeds = 20;

// Naive triple-loop reference for matrix-vector products.
std::vector<cplx> naive_matvec(const std::vector<cplx>& m, const std::vector<cplx>& v,
                               std::size_t rows, std::size_t cols) {
  std::vector<cplx> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double re = 0, im = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const cplx a = m[r * cols + c], b = v[c];
      re += a.real() * b.real() - a.imag() * b.imag();
      im += a.real() * b.imag() + a.imag() * b.real();
    }
    out[r] = {re, im};
  }
  return out;
}

// Inputs kept away from zero so kinked ops (abs, relu) stay differentiable
// inside the finite-difference stencil.
std::vector<cplx> away_from_zero(Rng& rng, std::size_t n) {
  auto v = random_complex(rng, n);
  for (auto& x : v) {
    if (std::abs(x.real()) < 0.05) x += 0.1;
  }
  return v;
}

}  // namespace

TEST_CASE("matvec examples") {
  Tape t;
  auto id = t.constant({2, 2}, {1, 0, 0, 1});
  auto e0 = t.constant({2}, {1, 0});
  auto y = A::matvec(id, e0);
  CHECK(y.values()[0] == cplx(1, 0));
  CHECK(y.values()[1] == cplx(0, 0));

  auto perm = t.constant({2, 2}, {0, 1, 1, 0});
  auto ab = t.constant({2}, {cplx(2, 1), cplx(-3, 4)});
  auto z = A::matvec(perm, ab);
  CHECK(z.values()[0] == cplx(-3, 4));
  CHECK(z.values()[1] == cplx(2, 1));
}

TEST_CASE("matvec matches a naive loop") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng(seed);
    auto m = random_complex(rng, 16), v = random_complex(rng, 4);
    Tape t;
    auto y = A::matvec(t.constant({4, 4}, m), t.constant({4}, v));
    CHECK(max_diff(y.values(), naive_matvec(m, v, 4, 4)) <= 1e-12);
  }
}

TEST_CASE("matvec shape mismatch is a dimension error") {
  Tape t;
  auto m = t.constant({2, 3}, std::vector<cplx>(6));
  auto v = t.constant({2}, std::vector<cplx>(2));
  try {
    A::matvec(m, v);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Dimension);
  }
}

TEST_CASE("weighted_sum examples") {
  Tape t;
  auto v = t.constant({3}, {cplx(1, 2), cplx(-1, 0), cplx(0, 3)});
  std::vector<Tensor> one{v}, two{v, v};

  auto single = A::weighted_sum(t.constant({1}, {1.0}), one);
  CHECK(max_diff(single.values(), v.values()) == 0.0);

  auto half = A::weighted_sum(t.constant({2}, {0.5, 0.5}), two);
  CHECK(max_diff(half.values(), v.values()) <= 1e-15);

  auto cancel = A::weighted_sum(t.constant({2}, {cplx(0, 1), cplx(0, -1)}), two);
  for (auto x : cancel.values()) CHECK(std::abs(x) == 0.0);
}

TEST_CASE("weighted_sum with no terms is an arity error") {
  Tape t;
  std::vector<Tensor> none;
  CHECK_THROWS_AS(A::weighted_sum(t.constant({0}, {}), none), Error);
  try {
    A::weighted_sum(t.constant({0}, {}), none);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Arity);
  }
}

TEST_CASE("backward examples") {
  SUBCASE("|z|^2 at 1+i") {
    std::vector<cplx> z{cplx(1, 1)}, g(1);
    Tape t;
    auto leaf = t.leaf({1}, z, g);
    auto f = A::real(A::sum(A::hadamard(leaf, A::conj(leaf))));
    t.backward(f);
    CHECK(g[0].real() == doctest::Approx(2.0));
    CHECK(g[0].imag() == doctest::Approx(2.0));
  }
  SUBCASE("sum of identity matvec") {
    std::vector<cplx> v{0.3, -1.2, 2.0}, g(3);
    Tape t;
    auto leaf = t.leaf({3}, v, g);
    auto id = t.constant({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    t.backward(A::real(A::sum(A::matvec(id, leaf))));
    for (auto x : g) CHECK(x == cplx(1, 0));
  }
  SUBCASE("second backward accumulates") {
    std::vector<cplx> v{cplx(0.5, -0.25)}, g(1);
    Tape t;
    auto leaf = t.leaf({1}, v, g);
    auto f = A::squared_norm(leaf);
    t.backward(f);
    const cplx once = g[0];
    t.backward(f);
    CHECK(std::abs(g[0] - 2.0 * once) <= 1e-15);
  }
}

TEST_CASE("backward rejects non-scalar and complex outputs") {
  std::vector<cplx> v{cplx(1, 1), cplx(2, 0)}, g(2);
  Tape t;
  auto leaf = t.leaf({2}, v, g);
  auto check_kind = [](auto&& fn) {
    try {
      fn();
      FAIL("expected an autodiff error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Autodiff);
    }
  };
  check_kind([&] { t.backward(leaf); });
  check_kind([&] { t.backward(A::sum(leaf)); });  // imaginary part 1
}

TEST_CASE("every op agrees with central differences") {
  using Ts = std::vector<Tensor>;
  struct Case {
    const char* name;
    std::function<std::vector<Input>(Rng&)> inputs;
    std::function<Tensor(Tape&, const Ts&, const std::vector<cplx>&)> build;
    std::size_t out;
  };
  const std::vector<Case> cases = {
      {"matvec", [](Rng& r) { return std::vector<Input>{{{3, 4}, random_complex(r, 12)}, {{4}, random_complex(r, 4)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::matvec(x[0], x[1]); }, 3},
      {"weighted_sum",
       [](Rng& r) {
         return std::vector<Input>{{{3}, random_complex(r, 3)}, {{2}, random_complex(r, 2)},
                                   {{2}, random_complex(r, 2)}, {{2}, random_complex(r, 2)}};
       },
       [](Tape&, const Ts& x, const auto&) {
         Ts terms{x[1], x[2], x[3]};
         return A::weighted_sum(x[0], terms);
       },
       2},
      {"add", [](Rng& r) { return std::vector<Input>{{{3}, random_complex(r, 3)}, {{3}, random_complex(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::add(x[0], x[1]); }, 3},
      {"sub", [](Rng& r) { return std::vector<Input>{{{3}, random_complex(r, 3)}, {{3}, random_complex(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::sub(x[0], x[1]); }, 3},
      {"hadamard", [](Rng& r) { return std::vector<Input>{{{3}, random_complex(r, 3)}, {{3}, random_complex(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::hadamard(x[0], x[1]); }, 3},
      {"scale", [](Rng& r) { return std::vector<Input>{{{3}, random_complex(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::scale(x[0], cplx(0.7, -1.3)); }, 3},
      {"mul", [](Rng& r) { return std::vector<Input>{{{}, random_complex(r, 1)}, {{3}, random_complex(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::mul(x[0], x[1]); }, 3},
      {"mul_const", [](Rng& r) { return std::vector<Input>{{{3}, random_complex(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) {
         const std::vector<cplx> f{cplx(1, 2), 0.0, cplx(-0.5, 0.1)};
         return A::mul_const(x[0], f);
       },
       3},
      {"conj", [](Rng& r) { return std::vector<Input>{{{3}, random_complex(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::conj(x[0]); }, 3},
      {"real", [](Rng& r) { return std::vector<Input>{{{3}, random_complex(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::real(x[0]); }, 3},
      {"abs", [](Rng& r) { return std::vector<Input>{{{3}, away_from_zero(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::abs(x[0]); }, 3},
      {"tanh", [](Rng& r) { return std::vector<Input>{{{3}, random_complex(r, 3)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::tanh(x[0]); }, 3},
      {"relu", [](Rng& r) { return std::vector<Input>{{{4}, away_from_zero(r, 4)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::relu(x[0]); }, 4},
      {"pow_real",
       [](Rng& r) {
         auto v = random_complex(r, 3);
         for (auto& z : v) z = {0.2 + std::abs(z.real()), z.imag()};
         return std::vector<Input>{{{3}, v}};
       },
       [](Tape&, const Ts& x, const auto&) { return A::pow_real(x[0], -0.5); }, 3},
      {"sum", [](Rng& r) { return std::vector<Input>{{{4}, random_complex(r, 4)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::sum(x[0]); }, 1},
      {"squared_norm", [](Rng& r) { return std::vector<Input>{{{4}, random_complex(r, 4)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::squared_norm(x[0]); }, 1},
      {"gather", [](Rng& r) { return std::vector<Input>{{{4}, random_complex(r, 4)}}; },
       [](Tape&, const Ts& x, const auto&) {
         const std::vector<std::size_t> idx{3, 0, 3};
         return A::gather(x[0], idx);
       },
       3},
      {"element", [](Rng& r) { return std::vector<Input>{{{4}, random_complex(r, 4)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::element(x[0], 2); }, 1},
      {"stack", [](Rng& r) { return std::vector<Input>{{{}, random_complex(r, 1)}, {{}, random_complex(r, 1)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::stack(x); }, 2},
      {"softmax", [](Rng& r) { return std::vector<Input>{{{4}, random_complex(r, 4, 2.0)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::softmax(x[0]); }, 4},
      {"softmax_cross_entropy", [](Rng& r) { return std::vector<Input>{{{3}, random_complex(r, 3, 2.0)}}; },
       [](Tape&, const Ts& x, const auto&) { return A::softmax_cross_entropy(x[0], 1); }, 1},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    double worst = 0.0;
    for (int seed = 0; seed < kSeeds; ++seed) {
      Rng rng(1000 + seed);
      auto inputs = c.inputs(rng);
      const auto w = random_complex(rng, c.out);
      worst = std::max(worst, fd_error(
                                  [&](Tape& t, const Ts& x) { return project(c.build(t, x, w), w); },
                                  inputs));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("backward is linear in the output") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng(seed);
    auto m = random_complex(rng, 9), v = random_complex(rng, 3);
    const double alpha = rng.uniform(-2, 2), beta = rng.uniform(-2, 2);
    auto grad_of = [&](double a, double b) {
      std::vector<cplx> gm(9), gv(3);
      Tape t;
      auto lm = t.leaf({3, 3}, m, gm);
      auto lv = t.leaf({3}, v, gv);
      auto y = A::matvec(lm, lv);
      auto f = A::squared_norm(y);
      auto g = A::real(A::sum(A::tanh(y)));
      t.backward(A::add(A::scale(f, a), A::scale(g, b)));
      gm.insert(gm.end(), gv.begin(), gv.end());
      return gm;
    };
    const auto combined = grad_of(alpha, beta);
    const auto f = grad_of(1, 0), g = grad_of(0, 1);
    for (std::size_t i = 0; i < combined.size(); ++i) {
      CHECK(std::abs(combined[i] - (alpha * f[i] + beta * g[i])) <= 1e-12);
    }
  }
}

TEST_CASE("forward and backward are bitwise deterministic") {
  Rng rng(5);
  auto m = random_complex(rng, 16), v = random_complex(rng, 4);
  auto run = [&] {
    std::vector<cplx> gm(16), gv(4);
    Tape t;
    auto y = A::matvec(t.leaf({4, 4}, m, gm), t.leaf({4}, v, gv));
    auto loss = A::softmax_cross_entropy(A::tanh(y), 2);
    t.backward(loss);
    gm.insert(gm.end(), gv.begin(), gv.end());
    gm.push_back(loss.item());
    return gm;
  };
  CHECK(run() == run());
}

TEST_CASE("cross-entropy rejects labels outside the class range") {
  Tape t;
  auto logits = t.constant({2}, {0.1, 0.2});
  try {
    A::softmax_cross_entropy(logits, 2);
    FAIL("expected a label error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Label);
  }
}

TEST_CASE("constant shape mismatch") {
  Tape t;
  CHECK_THROWS_AS(t.constant({2, 2}, std::vector<cplx>(3)), Error);
}
