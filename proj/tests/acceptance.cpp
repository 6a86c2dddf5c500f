// Acceptance run: one line per criterion, reports under --out, exit status 1 on any failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <semiflow/semiflow.hpp>

using namespace semiflow;
namespace fs = std::filesystem;

namespace {

const cplx I(0.0, 1.0);

struct Outcome {
  bool pass = false;
  std::string detail;
  json report;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

IntegratorConfig grid(double t_first, double t_max, int per_decade, double rel = 1e-12, double abs = 1e-14)
{
  IntegratorConfig c;
  c.rel_tol = rel;
  c.abs_tol = abs;
  c.grid = TimeGrid::decades(t_first, t_max, per_decade);
  return c;
}

struct Named {
  std::string name;
  GeneratorSpec gen;
};

std::vector<Named> matrix()
{
  return {
      {"pure_quadratic", make_generator(1.0, 1.0, 0.0, 1.0)},
      {"pure_power_rotated", make_generator(std::polar(1.0, 0.3), 1.5, 0.0, 1.0)},
      {"beta_less", make_generator(std::polar(1.0, pi / 8), 0.5, 0.2 * I, 0.3)},
      {"beta_equal", make_generator(1.0, 1.0, 0.3 * I, 1.0)},
      {"beta_greater", make_generator(1.0, 1.0, 0.3 * I, 1.5)},
      {"beta_greater_small_alpha", make_generator(1.0, 0.5, cplx(0.1, 0.2), 1.2)},
      {"rational_example_1", rational_example_1()},
      {"half_power", make_generator(1.0, 1.0, I, 0.5)},
  };
}

const std::vector<cplx> matrix_points{0.0, 0.3, cplx(-0.5, 0.5), cplx(0.2, -0.6), cplx(0.0, 0.7)};

Outcome c1_oracle()
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = make_generator(1.0, 1.0, 0.0, 1.0);
  auto cfg = grid(1e-2, 1e4, 4, 1e-11);
  double worst = 0.0;
  json pts = json::array();
  for (int k = 0; k < 10; ++k) {
    const cplx z = std::polar(0.9 * (k + 1) / 10.0, 2.0 * pi * k / 10.0 + 0.1);
    const auto tr = integrate_trajectory(g, z, cfg, Frame::Disk);
    double e = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) e = std::max(e, std::abs(tr.points[i] - pure_quadratic_flow(1.0, z, tr.times[i])));
    worst = std::max(worst, e);
    pts.push_back({{"point", to_json(z)}, {"max_abs_error", e}});
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-8 && secs < 1.0, "max_err=" + fmt("%.2e", worst) + " time=" + fmt("%.3fs", secs),
          {{"points", pts}, {"max_abs_error", worst}}};
}

Outcome c2_abel()
{
  const auto t0 = std::chrono::steady_clock::now();
  IntegratorConfig base;
  base.rel_tol = 1e-12;
  base.abs_tol = 1e-14;
  double worst = 0.0;
  json gens = json::array();
  for (const auto& [name, g] : matrix()) {
    const KoenigsEvaluator ev(g);
    double gw = 0.0;
    for (cplx z : matrix_points)
      for (double t : {1.0, 10.0, 100.0, 1000.0}) gw = std::max(gw, abel_residual(ev, z, t, base) / (1.0 + t));
    worst = std::max(worst, gw);
    gens.push_back({{"generator", name}, {"max_scaled_residual", gw}});
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-6 && secs < 30.0, "max_residual/(1+t)=" + fmt("%.2e", worst) + " time=" + fmt("%.1fs", secs),
          {{"generators", gens}, {"max_scaled_residual", worst}}};
}

Outcome c3_leading_order()
{
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.method = Method::HalfPlane;
  cfg.grid = TimeGrid::list({1e6});
  double worst = 0.0;
  json gens = json::array();
  for (const auto& [name, g] : matrix()) {
    const double lam = std::abs(g.constants().lambda);
    double gw = 0.0;
    for (cplx z : matrix_points) {
      const auto tr = integrate_trajectory(g, z, cfg, Frame::Disk);
      gw = std::max(gw, std::abs(std::abs(tr.gaps.back()) * std::pow(lam * 1e6, 1.0 / g.alpha()) / 2.0 - 1.0));
    }
    worst = std::max(worst, gw);
    gens.push_back({{"generator", name}, {"max_deviation", gw}});
  }
  return {worst < 0.02, "max_dev=" + fmt("%.2e", worst), {{"generators", gens}}};
}

Outcome c4_slope()
{
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.grid = TimeGrid::list({1e6});
  double worst = 0.0;
  json gens = json::array();
  for (const auto& [name, g] : matrix()) {
    if (g.tangential()) continue;
    double gw = 0.0;
    for (cplx z : matrix_points) {
      const auto tr = integrate_trajectory(g, z, cfg, Frame::Disk);
      gw = std::max(gw, std::abs(std::arg(tr.gaps.back()) - limit_slope(g)));
    }
    worst = std::max(worst, gw);
    gens.push_back({{"generator", name}, {"limit_slope", limit_slope(g)}, {"max_deviation", gw}});
  }
  return {worst < 1e-2, "max_dev=" + fmt("%.2e", worst), {{"generators", gens}}};
}

Outcome c5_contact()
{
  const auto g = make_generator(1.0, 1.0, I, 0.5);
  const KoenigsEvaluator ev(g);
  const auto tr = integrate_trajectory(g, 0.0, grid(1, 1e6, 8, 1e-12, 1e-16), Frame::Disk);
  std::vector<double> t, d, gap;
  for (const auto& s : tangent_distance(g, tr)) {
    t.push_back(s.t);
    d.push_back(s.distance);
    gap.push_back(s.gap);
  }
  const auto th = contact_theory(g, ev, 0.0);
  const auto rep = contact_order_estimate(t, d, gap, th);
  const double k = rep.limit_constant.value.real();
  const bool ok = !rep.above_all && std::abs(rep.estimated_order - 0.5) <= 0.05 && std::abs(k - 2.0) <= 0.05 * 2.0;
  return {ok, "order=" + fmt("%.4f", rep.estimated_order) + " constant=" + fmt("%.5f", k),
          {{"estimated_order", rep.estimated_order}, {"fit_r2", rep.fit_r2}, {"limit_constant", to_json(rep.limit_constant)},
           {"theory_constant", th.constant}}};
}

// region membership written as independent set conditions
int omega_oracle(double a, double b)
{
  int hit = 0, which = 0;
  auto mark = [&](bool in, int k) {
    if (in) {
      ++hit;
      which = k;
    }
  };
  mark(a > 1 && b > 1, 1);
  mark(a == 1 && b > 1, 2);
  mark(a < 1 && a < b, 3);
  mark(a > 1 && b == 1, 4);
  mark(b <= 1 && b <= a && !(a > 1 && b == 1), 5);
  return hit == 1 ? which : -hit;
}

Outcome c6_omega()
{
  const std::vector<std::pair<std::pair<double, double>, int>> table{{{1.5, 2}, 1}, {{1, 2}, 2}, {{0.5, 0.7}, 3}, {{2, 1}, 4}, {{1, 1}, 5}};
  bool ok = true;
  json rows = json::array();
  for (const auto& [ab, r] : table) {
    const auto got = classify_omega(ab.first, ab.second);
    ok = ok && static_cast<int>(got) == r;
    rows.push_back({{"alpha", ab.first}, {"beta", ab.second}, {"region", to_string(got)}});
  }
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> ua(0.0, 2.0), ub(0.0, 4.0);
  std::uniform_int_distribution<int> pick(0, 5);
  int mismatches = 0, checked = 0;
  while (checked < 10000) {
    double a = ua(rng), b = ub(rng);
    switch (pick(rng)) {
    case 0: a = 1.0; break;
    case 1: b = 1.0; break;
    case 2: b = a; break;
    case 3: a = b = 1.0; break;
    default: break;
    }
    if (!(a > 0.0) || !(b > 0.0)) continue;
    ++checked;
    if (static_cast<int>(classify_omega(a, b)) != omega_oracle(a, b)) ++mismatches;
  }
  ok = ok && mismatches == 0;
  return {ok, "table ok=" + std::string(ok ? "yes" : "no") + " random mismatches=" + std::to_string(mismatches),
          {{"table", rows}, {"random_checks", checked}, {"mismatches", mismatches}}};
}

Outcome c7_asymptotes()
{
  enum class Expect { ThroughMinusOne, MatchesPrediction, None };
  struct Case {
    std::string name;
    GeneratorSpec gen;
    Expect expect;
  };
  const std::vector<Case> cases{
      {"omega1", make_generator(1.0, 1.5, 0.2 * I, 2.0), Expect::ThroughMinusOne},
      {"omega2", make_generator(1.0, 1.0, 0.3 * I, 1.5), Expect::MatchesPrediction},
      {"omega3", make_generator(1.0, 0.5, 0.3 * I, 0.7), Expect::None},
      {"omega4_im_nonzero", make_generator(1.0, 1.5, 0.3 * I, 1.0), Expect::MatchesPrediction},
      {"omega4_im_zero", make_generator(1.0, 1.5, 0.3, 1.0), Expect::ThroughMinusOne},
      {"omega5_im_nonzero", make_generator(1.0, 1.0, I, 0.5), Expect::None},
      {"omega5_im_zero", make_generator(1.0, 1.5, 0.3, 0.5), Expect::ThroughMinusOne},
  };
  const cplx w(1.0, 0.5);
  const auto cfg = grid(1, 1e6, 4);
  bool ok = true;
  std::string detail;
  json rows = json::array();
  for (const auto& c : cases) {
    const auto rep = asymptote_report(c.gen, KoenigsEvaluator(c.gen), w, cfg);
    const double L = rep.numeric_limit.value.real();
    bool pass = false;
    switch (c.expect) {
    case Expect::ThroughMinusOne: pass = rep.passes_through_minus_one && !rep.numeric_limit.divergent && std::abs(L) < 0.01; break;
    case Expect::MatchesPrediction:
      pass = rep.predicted_limit && !rep.numeric_limit.divergent && std::abs(L - *rep.predicted_limit) <= 0.01 * std::abs(*rep.predicted_limit);
      break;
    case Expect::None: pass = rep.exists != AsymptoteExists::Yes && rep.numeric_limit.divergent && std::abs(rep.last_value) > 1e2; break;
    }
    ok = ok && pass;
    detail += c.name + (pass ? "+ " : "- ");
    json r = {{"case", c.name}, {"region", to_string(rep.region)}, {"exists", to_string(rep.exists)},
              {"numeric_limit", to_json(rep.numeric_limit)}, {"value_at_t_max", rep.last_value}};
    if (rep.predicted_limit) r["predicted_limit"] = *rep.predicted_limit;
    rows.push_back(r);
  }
  return {ok, detail, {{"point", to_json(w)}, {"cases", rows}}};
}

Outcome c8_mutual()
{
  const auto cfg = grid(1, 1e6, 4);
  const auto gc = make_generator(1.0, 1.5, 0.3 * I, 1.2);
  const auto conv = mutual_position(gc, KoenigsEvaluator(gc), 1.0, cplx(1.5, 0.5), cfg);
  const auto gd = make_generator(1.0, 0.5, 0.3 * I, 0.7);
  const auto div = mutual_position(gd, KoenigsEvaluator(gd), 1.0, cplx(1.5, 0.5), cfg);
  const auto gp = make_generator(1.0, 1.0, 0.3 * I, 1.5);
  const KoenigsEvaluator evp(gp);
  const std::vector<std::pair<cplx, cplx>> pairs{{1.0, cplx(1.5, 0.5)}, {cplx(2.0, -1.0), cplx(0.5, 0.3)}, {cplx(3.0, 2.0), 1.0}};
  std::vector<cplx> ratios;
  json rs = json::array();
  for (const auto& [a, b] : pairs) {
    const auto mp = mutual_position(gp, evp, a, b, cfg);
    ratios.push_back(mp.s_over_sigma.value_or(cplx(NAN, NAN)));
    rs.push_back({{"w1", to_json(a)}, {"w2", to_json(b)}, {"ratio", to_json(ratios.back())}});
  }
  double spread = 0.0;
  for (const auto& r : ratios) spread = std::max(spread, std::abs(r - ratios.front()) / std::abs(ratios.front()));
  if (!std::isfinite(spread)) spread = INFINITY;
  const bool ok = conv.last_abs_difference < 1e-2 && div.last_abs_difference > 1e2 && spread <= 0.02;
  return {ok,
          "conv=" + fmt("%.2e", conv.last_abs_difference) + " div=" + fmt("%.2e", div.last_abs_difference) +
              " ratio_spread=" + fmt("%.2e", spread),
          {{"convergent_difference", conv.last_abs_difference}, {"divergent_difference", div.last_abs_difference}, {"ratios", rs}}};
}

Outcome c9_remainders()
{
  const std::vector<Named> gens{
      {"pure_power", make_generator(std::polar(1.0, 0.3), 1.5, 0.0, 1.0)},
      {"beta_less", make_generator(1.0, 1.0, I, 0.5)},
      {"beta_equal", make_generator(1.0, 1.0, 0.3 * I, 1.0)},
      {"beta_greater", make_generator(1.0, 1.0, 0.3 * I, 1.5)},
  };
  const auto cfg = grid(1, 1e6, 4);
  bool ok = true;
  std::string detail;
  json rows = json::array();
  for (const auto& [name, g] : gens) {
    const KoenigsEvaluator ev(g);
    const auto r = remainder_decay(g, ev, cplx(0.2, 0.1), Frame::Disk, cfg);
    double at3 = NAN, at6 = std::abs(r.scaled.back());
    bool mono = true;
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      if (r.t[i] == 1e3) at3 = std::abs(r.scaled[i]);
      if (r.t[i] >= 1e5 && i > 0 && r.t[i - 1] >= 1e5 && std::abs(r.scaled[i]) > std::abs(r.scaled[i - 1])) mono = false;
    }
    const double ratio = at6 / at3;
    const bool pass = ratio < 0.1 && mono;
    ok = ok && pass;
    detail += name + "=" + fmt("%.3g", ratio) + (pass ? "+ " : "- ");
    rows.push_back({{"generator", name}, {"regime", to_string(r.regime)}, {"scaled_at_1e3", at3}, {"scaled_at_1e6", at6},
                    {"ratio", ratio}, {"monotone_last_decade", mono}});
  }
  return {ok, detail, {{"regimes", rows}}};
}

Outcome c10_appendix()
{
  const auto g = make_generator(1.0, 1.0, I, 0.5);
  const KoenigsEvaluator ev(g);
  const auto cfg = grid(1, 1e6, 4);
  double worst = 0.0;
  json rows = json::array();
  for (cplx w : {cplx(2.0), cplx(3.0), cplx(1.0, 1.0)}) {
    const auto c = appendix_limit(g, ev, w, cfg, Frame::HalfPlane);
    worst = std::max(worst, c.rel_diff());
    rows.push_back({{"point", to_json(w)}, {"numeric", to_json(c.numeric)}, {"closed_form", to_json(c.closed_form)}, {"rel_diff", c.rel_diff()}});
  }
  return {worst < 0.02, "max_rel_diff=" + fmt("%.2e", worst), {{"points", rows}}};
}

Outcome c11_weak()
{
  const auto g = make_generator(1.0, 1.0, I, 0.5);
  const auto cfg = grid(1, 1e6, 8);
  bool ok = true;
  std::string detail;
  json rows = json::array();
  for (cplx c : {cplx(0.0), cplx(0.1), cplx(-0.1), 0.1 * I}) {
    const auto r = weak_rigidity_experiment(g, c, 0.0, cfg);
    const bool zero = c == cplx(0.0);
    const bool pass = r.pair.above_all == zero && r.order_approx_beta == !zero;
    ok = ok && pass;
    detail += (zero ? std::string("above_all") : fmt("%.4f", r.pair.estimated_order)) + (pass ? "+ " : "- ");
    json j = {{"c", to_json(c)}, {"above_all", r.pair.above_all}, {"order_approx_beta", r.order_approx_beta}};
    if (!r.pair.above_all) {
      j["estimated_order"] = r.pair.estimated_order;
      j["fit_r2"] = r.pair.fit_r2;
    }
    rows.push_back(j);
  }
  return {ok, detail, {{"cases", rows}}};
}

Outcome c12_curvature()
{
  const auto cfg = grid(10, 1e5, 4);
  auto tail = [&](const GeneratorSpec& g) {
    const auto tr = integrate_trajectory(g, 0.0, cfg, Frame::Disk);
    std::vector<double> t;
    std::vector<cplx> k;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      t.push_back(tr.times[i]);
      k.push_back(curvature_at_gap(g, tr.gaps[i]));
    }
    return std::make_pair(estimate_limit(t, k), k.back().real());
  };
  const auto [l1, raw1] = tail(make_generator(1.0, 1.5, 0.2 * I, 2.0));
  const auto [l4, raw4] = tail(make_generator(1.0, 1.0, I, 0.5));
  double circle = 0.0;
  const cplx c(0.1, -0.2);
  for (int k = 0; k < 16; ++k) {
    const cplx z = c + std::polar(0.05 + 0.05 * k, 0.7 * k);
    circle = std::max(circle, std::abs(field_curvature(I * (z - c), I) - 1.0 / std::abs(z - c)));
  }
  const bool ok1 = !l1.divergent && std::abs(l1.value) + l1.error < 1e-2;
  const bool ok4 = std::abs(raw4) > 1e2 && l4.divergent;
  return {ok1 && ok4 && circle < 1e-10,
          "omega1_tail=" + fmt("%.2e", std::abs(l1.value)) + "+-" + fmt("%.1e", l1.error) + " (raw " + fmt("%.2e", raw1) +
              ") half_power=" + fmt("%.1f", raw4) + " circle_err=" + fmt("%.1e", circle),
          {{"omega1_tail", to_json(l1)}, {"omega1_at_t_max", raw1}, {"half_power_tail", to_json(l4)}, {"half_power_at_t_max", raw4},
           {"circle_max_error", circle}}};
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"acceptance run"};
  std::string out = "acceptance_reports";
  app.add_option("--out", out, "report directory");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out);

  const std::vector<Criterion> crit{
      {1, "oracle_equivalence", c1_oracle},   {2, "abel_residual", c2_abel},        {3, "leading_order", c3_leading_order},
      {4, "limit_slope", c4_slope},           {5, "contact_order", c5_contact}, {6, "omega_classifier", c6_omega},
      {7, "asymptote_matrix", c7_asymptotes}, {8, "mutual_position", c8_mutual},    {9, "remainder_decay", c9_remainders},
      {10, "appendix_limit", c10_appendix},   {11, "weak_rigidity", c11_weak},      {12, "curvature_dichotomy", c12_curvature},
  };

  const auto t0 = std::chrono::steady_clock::now();
  int failures = 0;
  std::vector<std::string> first;
  for (const auto& c : crit) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    json doc = {{"criterion", c.id}, {"name", c.name}, {"version", version}, {"data", o.report}};
    first.push_back(doc.dump(2) + "\n");
    char name[64];
    std::snprintf(name, sizeof name, "criterion_%02d.json", c.id);
    atomic_write(fs::path(out) / name, first.back());
    std::printf("criterion %2d %-20s %s  %s\n", c.id, c.name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }

  // second full pass: every report must come out byte-identical
  int differing = 0;
  for (std::size_t i = 0; i < crit.size(); ++i) {
    Outcome o;
    try {
      o = crit[i].run();
    } catch (const std::exception&) {
    }
    json doc = {{"criterion", crit[i].id}, {"name", crit[i].name}, {"version", version}, {"data", o.report}};
    if (doc.dump(2) + "\n" != first[i]) ++differing;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool det = differing == 0 && secs / 2.0 < 600.0;
  std::printf("criterion 13 %-20s %s  differing_reports=%d suite_time=%.1fs (two passes %.1fs)\n", "determinism",
              det ? "PASS" : "FAIL", differing, secs / 2.0, secs);
  if (!det) ++failures;
  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
