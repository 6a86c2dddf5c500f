#include <cmath>
#include <random>

#include "test_util.hpp"

using namespace semiflow;
using testutil::half_power;
using testutil::quad;

TEST(Generators, HalfPowerConstants)
{
  const auto g = half_power();
  EXPECT_CNEAR(g.constants().lambda, 2.0, 1e-15);
  EXPECT_CNEAR(g.constants().mu, cplx(0.0, std::sqrt(2.0)), 1e-15);
  EXPECT_FALSE(g.tangential());
}

TEST(Generators, PureQuadraticConstants)
{
  const auto g = quad();
  EXPECT_CNEAR(g.constants().lambda, 2.0, 0.0);
  EXPECT_CNEAR(g.constants().mu, 0.0, 0.0);
}

TEST(Generators, DerivedConstantIdentities)
{
  for (auto [a, al, b, be] : {std::tuple{cplx(0.7, 0.2), 0.6, cplx(0.1, -0.3), 0.4}, std::tuple{cplx(2.0, -0.5), 1.5, cplx(0.0, 0.2), 2.5}}) {
    const auto g = make_generator(a, al, b, be);
    const auto& k = g.constants();
    EXPECT_CNEAR(k.A, std::pow(2.0, al) * a, 1e-14);
    EXPECT_CNEAR(k.B, std::pow(2.0, al + be) * b, 1e-14);
    EXPECT_CNEAR(k.lambda, std::pow(2.0, al) * al * a, 1e-14);
    EXPECT_CNEAR(k.mu, std::pow(2.0, be) * b / a, 1e-14);
  }
}

TEST(Generators, Rejections)
{
  EXPECT_THROW(make_generator(std::polar(1.0, 3 * pi / 4), 1.0, 0.0, 1.0), ConfigError);
  EXPECT_THROW(make_generator(0.0, 1.0, 0.0, 1.0), ConfigError);
  EXPECT_THROW(make_generator(1.0, 0.0, 0.0, 1.0), ConfigError);
  EXPECT_THROW(make_generator(1.0, 2.5, 0.0, 1.0), ConfigError);
  EXPECT_THROW(make_generator(1.0, 1.0, 0.0, 0.0), ConfigError);
  EXPECT_THROW(make_generator(1.0, 1.0, 0.0, -1.0), ConfigError);
  // alpha = 1.5 allows |arg a| <= pi/4
  EXPECT_THROW(make_generator(std::polar(1.0, 0.8), 1.5, 0.0, 1.0), ConfigError);
  EXPECT_NO_THROW(make_generator(std::polar(1.0, 0.78), 1.5, 0.0, 1.0));
  Remainder r{RemainderKind::ExtraPower, {0.1, 0.0}, 1.5};
  EXPECT_THROW(make_generator(1.0, 1.0, 0.0, 0.5, r), ConfigError);
  Remainder rat{RemainderKind::RationalExample1, {}, 0.0};
  EXPECT_THROW(make_generator(1.0, 1.0, 0.0, 2.0, rat), ConfigError);
}

TEST(Generators, TangentialFlag)
{
  EXPECT_TRUE(make_generator(cplx(0.0, 1.0), 1.0, 0.0, 1.0).tangential());
  EXPECT_TRUE(make_generator(std::polar(2.0, -pi / 4), 0.5, 0.0, 1.0).tangential());
  EXPECT_FALSE(make_generator(std::polar(1.0, 0.3), 1.0, 0.0, 1.0).tangential());
}

TEST(Generators, EvalF)
{
  EXPECT_CNEAR(eval_f(quad(), 0.0), 1.0, 0.0);
  EXPECT_CNEAR(eval_f(rational_example_1(), 0.0), 1.0 / cplx(4.0, 1.0), 1e-16);
  EXPECT_CNEAR(eval_f(half_power(), 0.0), cplx(1.0, 1.0), 1e-15);
  const cplx z(0.3, -0.4);
  const cplx g = 1.0 - z;
  EXPECT_CNEAR(eval_f(rational_example_1(), z), g * g / (4.0 + cplx(0, 1) * g * g), 1e-15);
  EXPECT_THROW(eval_f(quad(), 1.0), ConfigError);
  EXPECT_THROW(eval_f(quad(), cplx(0.8, 0.8)), ConfigError);
}

TEST(Generators, EvalFPrimeClosedForms)
{
  EXPECT_CNEAR(eval_f_prime(quad(), 0.0), -2.0, 0.0);
  EXPECT_CNEAR(eval_f_prime(quad(), 0.5), -1.0, 1e-15);
  EXPECT_CNEAR(eval_f_prime(half_power(), 0.0), cplx(-2.0, -2.5), 1e-15);
  // d/dz u/(4+iu) with u = (1-z)^2 is 4u'/(4+iu)^2, u' = -2(1-z)
  EXPECT_CNEAR(eval_f_prime(rational_example_1(), 0.0), -8.0 / (cplx(4.0, 1.0) * cplx(4.0, 1.0)), 1e-16);
}

TEST(Generators, EvalFPrimeMatchesDifferenceQuotient)
{
  Remainder r{RemainderKind::ExtraPower, {0.05, -0.02}, 2.7};
  const auto gens = {half_power(), rational_example_1(), make_generator(std::polar(1.0, 0.2), 1.3, cplx(0.1, 0.1), 0.6, r)};
  for (const auto& g : gens)
    for (cplx z : {cplx(0.1, 0.2), cplx(-0.5, 0.1), cplx(0.7, -0.2)}) {
      const double h = 1e-5;
      const cplx fd = (eval_f(g, z + h) - eval_f(g, z - h)) / (2 * h);
      const cplx fdi = (eval_f(g, z + cplx(0, h)) - eval_f(g, z - cplx(0, h))) / cplx(0, 2 * h);
      EXPECT_CNEAR(eval_f_prime(g, z), fd, 1e-8);
      EXPECT_CNEAR(eval_f_prime(g, z), fdi, 1e-8);  // holomorphy
    }
}

TEST(Generators, Cayley)
{
  EXPECT_CNEAR(cayley(0.0), 1.0, 0.0);
  EXPECT_CNEAR(cayley_inverse(cayley(cplx(0.3, 0.2))), cplx(0.3, 0.2), 1e-16);
  EXPECT_CNEAR(cayley(cayley_inverse(cplx(2.0, -3.0))), cplx(2.0, -3.0), 1e-14);
  // i is a boundary fixed point; approach it from inside
  EXPECT_CNEAR(cayley(cplx(0.0, 1.0 - 1e-9)), cplx(0.0, 1.0), 1e-8);
  EXPECT_THROW(cayley(cplx(0.0, 1.0)), ConfigError);
  EXPECT_THROW(cayley_inverse(cplx(0.0, 1.0)), ConfigError);
}

TEST(Generators, HalfPlaneClosedForms)
{
  const auto q = to_half_plane(quad());
  for (cplx w : {cplx(1, 0), cplx(0.1, 5), cplx(30, -2)}) EXPECT_CNEAR(q.phi(w), 2.0, 1e-15);
  const auto f = to_half_plane(half_power());
  for (cplx w : {cplx(1, 0), cplx(0.1, 5), cplx(30, -2)})
    EXPECT_CNEAR(f.phi(w), 2.0 + std::pow(2.0, 1.5) * cplx(0, 1) * std::pow(w + 1.0, -0.5), 1e-14);
  const auto r = rational_example_1();
  EXPECT_CNEAR(r.constants().A, 0.5, 1e-16);
  EXPECT_CNEAR(r.constants().lambda, 0.5, 1e-16);
}

TEST(Generators, HalfPlaneMatchesDiskThroughCayley)
{
  Remainder r{RemainderKind::ExtraPower, {0.05, 0.02}, 2.9};
  const auto gens = {half_power(), rational_example_1(), quad(), make_generator(std::polar(1.0, -0.3), 0.7, cplx(0.2, 0.1), 1.2, r)};
  for (const auto& g : gens) {
    const auto hp = to_half_plane(g);
    for (cplx z : {cplx(0, 0), cplx(0.5, 0.3), cplx(-0.8, 0.1), cplx(0.95, -0.2)}) {
      const cplx p = eval_f(g, z) / ((1.0 - z) * (1.0 - z));
      EXPECT_CNEAR(hp.phi(cayley(z)), 2.0 * p, 1e-12 * std::max(1.0, std::abs(p)));
    }
  }
}

TEST(Generators, HalfPlaneRangeOnGrid)
{
  const auto gens = {half_power(), rational_example_1(), make_generator(1.0, 1.5, {0, 0.3}, 1.0), make_generator(1.0, 0.5, {0, 0.2}, 0.7)};
  for (const auto& g : gens) {
    const auto hp = to_half_plane(g);
    for (double x : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3})
      for (double y : {-1e3, -10.0, -1.0, 0.0, 0.5, 3.0, 100.0, 1e4}) {
        const cplx v = hp.phi({x, y});
        EXPECT_GE(v.real(), -1e-12 * std::max(1.0, std::abs(v)));
      }
  }
}

TEST(Generators, PrincipalBranchPowers)
{
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const cplx z(u(rng), u(rng));
    if (std::abs(z) >= 1.0) continue;
    const double s = 2.5 * u(rng);
    const cplx g = 1.0 - z;
    EXPECT_CNEAR(cpow(g, s), std::exp(s * std::log(g)), 1e-12 * std::abs(cpow(g, s)));
  }
  EXPECT_CNEAR(pow1p_m1(cplx(1e-12, 1e-13), 0.5), cplx(0.5e-12, 0.5e-13), 1e-24);
}

TEST(Generators, Admissibility)
{
  EXPECT_TRUE(validate_admissibility(quad()).pass);
  EXPECT_TRUE(validate_admissibility(rational_example_1()).pass);
  EXPECT_TRUE(validate_admissibility(half_power()).pass);
  const auto bad = validate_admissibility(make_generator(1.0, 1.0, {0, 100}, 0.5));
  EXPECT_FALSE(bad.pass);
  EXPECT_LT(bad.min_re_p, 0.0);
  // sup Im (1-z)^{1/2} over the disk is 1/2, so b = 1.1i is the largest safe imaginary shift here
  EXPECT_TRUE(validate_admissibility(make_generator(1.0, 1.0, {0, 1.1}, 0.5)).pass);
  EXPECT_FALSE(validate_admissibility(make_generator(1.0, 1.0, {0, 2.5}, 0.5)).pass);
}

TEST(Generators, JsonRoundTrip)
{
  Remainder r{RemainderKind::ExtraPower, {0.05, -0.02}, 2.7};
  for (const auto& g : {half_power(), rational_example_1(), make_generator(std::polar(1.0, 0.2), 1.3, cplx(0.1, 0.1), 0.6, r)}) {
    const auto j = generator_to_json(g);
    const auto back = generator_from_json(json::parse(j.dump()));
    EXPECT_EQ(generator_to_json(back).dump(), j.dump());
    EXPECT_CNEAR(back.constants().lambda, g.constants().lambda, 0.0);
  }
  EXPECT_THROW(generator_from_json(json::parse(R"({"a":[0,0],"alpha":1})")), ConfigError);
  EXPECT_THROW(generator_from_json(json::parse(R"({"a":[1,0]})")), ConfigError);
  EXPECT_THROW(generator_from_json(json::parse(R"({"a":[1,0],"alpha":1,"remainder":{"kind":"spline"}})")), ConfigError);
}
