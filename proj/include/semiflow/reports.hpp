#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "asymptotics.hpp"
#include "flow.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "koenigs.hpp"
#include "rigidity.hpp"

namespace semiflow {

/**
 * Runs fn(0..n-1) on up to `workers` threads. Results keep index order and
 * the exception of the lowest failing index is rethrown, so the outcome does
 * not depend on scheduling.
 */
template <class R>
std::vector<R> parallel_map(std::size_t n, unsigned workers, const std::function<R(std::size_t)>& fn)
{
  std::vector<std::optional<R>> out(n);
  std::vector<std::exception_ptr> err(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < w; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (err[i]) std::rethrow_exception(err[i]);
  std::vector<R> res;
  res.reserve(n);
  for (auto& o : out) res.push_back(std::move(*o));
  return res;
}

struct ReportOutput {
  json report;
  std::vector<std::pair<std::string, std::string>> files;  // extra outputs, name -> content
};

inline const GeneratorSpec& need_generator(const ExperimentConfig& cfg)
{
  if (!cfg.generator) throw ConfigError("config needs a 'generator'");
  return *cfg.generator;
}

inline std::vector<cplx> points_or(const ExperimentConfig& cfg, cplx fallback)
{
  return cfg.points.empty() ? std::vector<cplx>{fallback} : cfg.points;
}

inline json curve_json(const std::vector<std::pair<double, double>>& c)
{
  json a = json::array();
  for (const auto& [t, e] : c) a.push_back({t, e});
  return a;
}

inline json to_json(const ContactTheory& th)
{
  return {{"order", th.order}, {"lower_bound_only", th.lower_bound_only}, {"constant", th.constant},
          {"log_corrected", th.log_corrected}};
}

inline std::string simulate_csv(const GeneratorSpec& gen, cplx z, Frame frame, const IntegratorConfig& ic)
{
  std::ostringstream os;
  write_trajectory_csv(integrate_trajectory(gen, z, ic, frame), os);
  return os.str();
}

inline std::string field_csv(const GeneratorSpec& gen, const FieldConfig& f)
{
  std::ostringstream os;
  write_field_csv(direction_field(gen, f.rect, f.nx, f.ny), os);
  return os.str();
}

inline ReportOutput report_asymptotics(const ExperimentConfig& cfg, unsigned workers)
{
  const auto& gen = need_generator(cfg);
  const KoenigsEvaluator ev(gen);
  const auto pts = points_or(cfg, cfg.frame == Frame::Disk ? cplx(0.0, 0.0) : cplx(1.0, 0.0));
  const auto info = regime_of(gen);
  ReportOutput out;
  out.report = report_header(cfg, "asymptotics");
  out.report["generator"] = generator_to_json(gen);
  out.report["regime"] = to_string(info.regime);
  out.report["binomial_depth"] = info.k;
  const auto items = parallel_map<json>(pts.size(), workers, [&](std::size_t i) {
    const auto rs = remainder_decay(gen, ev, pts[i], cfg.frame, cfg.integrator);
    json c = json::array();
    for (std::size_t k = 0; k < rs.t.size(); ++k) c.push_back({rs.t[k], std::abs(rs.scaled[k])});
    const double tl = cfg.integrator.grid.back();
    const cplx pred = cfg.frame == Frame::Disk ? predict_disk(gen, &ev, pts[i], tl) : predict_halfplane(gen, &ev, pts[i], tl);
    return json{{"point", to_json(pts[i])},
                {"regime", to_string(info.regime)},
                {"limit", to_json(remainder_limit(gen, rs))},
                {"scaled_remainder_curve", c},
                {"prediction_at_t_max", to_json(pred)},
                {"prediction_error_curve", curve_json(prediction_error_curve(gen, ev, pts[i], cfg.frame, cfg.integrator))}};
  });
  out.report["points"] = items;
  if (has_strong_remainder(gen) && gen.b() != cplx(0.0, 0.0) && gen.alpha() / 2.0 < gen.beta() && gen.beta() <= gen.alpha())
    out.report["refined_constant_C"] = to_json(constant_C_estimate(gen, cfg.frame, cfg.integrator));
  return out;
}

inline ReportOutput report_geometry(const ExperimentConfig& cfg, unsigned workers)
{
  const auto& gen = need_generator(cfg);
  if (cfg.frame != Frame::Disk) throw ConfigError("geometry reports use the disk frame");
  const KoenigsEvaluator ev(gen);
  const auto pts = points_or(cfg, 0.0);
  ReportOutput out;
  out.report = report_header(cfg, "geometry");
  out.report["generator"] = generator_to_json(gen);
  out.report["limit_slope"] = limit_slope(gen);
  out.report["tangential"] = gen.tangential();
  if (gen.b() != cplx(0.0, 0.0)) {
    const auto cc = limit_curvature_class(gen, cfg.twist_vanishes);
    out.report["omega_region"] = to_string(cc.region);
    out.report["limit_curvature_class"] = to_string(cc.cls);
    out.report["resolved_by_dichotomy"] = cc.resolved_by_dichotomy;
  }
  using Item = std::pair<json, std::string>;
  const auto items = parallel_map<Item>(pts.size(), workers, [&](std::size_t i) {
    const auto tr = integrate_trajectory(gen, pts[i], cfg.integrator, Frame::Disk);
    const auto td = tangent_distance(gen, tr);
    std::vector<double> t, d, g;
    std::ostringstream csv;
    csv << "t,d,gap,kappa\n";
    double kappa_last = 0.0;
    for (const auto& s : td) {
      t.push_back(s.t);
      d.push_back(s.distance);
      g.push_back(s.gap);
    }
    for (std::size_t k = 0; k < tr.size(); ++k) {
      kappa_last = curvature_at_gap(gen, tr.gaps[k]);
      csv << fmt17(td[k].t) << ',' << fmt17(td[k].signed_distance) << ',' << fmt17(td[k].gap) << ',' << fmt17(kappa_last) << '\n';
    }
    std::vector<double> ts(tr.times.begin() + 1, tr.times.end());
    std::vector<cplx> args;
    for (std::size_t k = 1; k < tr.size(); ++k) args.push_back(std::arg(tr.gaps[k]));
    json j = {{"point", to_json(pts[i])}, {"empirical_slope", to_json(estimate_limit(ts, args))}, {"curvature_at_t_max", kappa_last}};
    const auto th = contact_theory(gen, ev, pts[i]);
    j["theoretical_contact"] = to_json(th);
    const auto rep = contact_order_estimate(t, d, g, th);
    j["above_all"] = rep.above_all;
    if (!rep.above_all) {
      j["estimated_order"] = rep.estimated_order;
      j["fit_r2"] = rep.fit_r2;
      j["reliable"] = rep.reliable;
      j["limit_constant"] = to_json(rep.limit_constant);
    }
    j["tail_samples"] = rep.tail_samples;
    j["curve_file"] = "geometry_curve_" + std::to_string(i) + ".csv";
    return Item{j, csv.str()};
  });
  out.report["points"] = json::array();
  for (std::size_t i = 0; i < items.size(); ++i) {
    out.report["points"].push_back(items[i].first);
    out.files.emplace_back("geometry_curve_" + std::to_string(i) + ".csv", items[i].second);
  }
  return out;
}

inline ReportOutput report_omega(const ExperimentConfig& cfg, unsigned)
{
  auto pairs = cfg.omega_pairs;
  if (pairs.empty()) pairs = {{1.5, 2.0}, {1.0, 2.0}, {0.5, 0.7}, {2.0, 1.0}, {1.0, 1.0}};
  ReportOutput out;
  out.report = report_header(cfg, "omega");
  json a = json::array();
  for (const auto& [al, be] : pairs) a.push_back({{"alpha", al}, {"beta", be}, {"region", to_string(classify_omega(al, be))}});
  out.report["pairs"] = a;
  if (cfg.generator && cfg.generator->b() != cplx(0.0, 0.0)) {
    const auto& gen = *cfg.generator;
    const auto cc = limit_curvature_class(gen, cfg.twist_vanishes);
    out.report["generator"] = generator_to_json(gen);
    out.report["generator_region"] = to_string(cc.region);
    out.report["twist"] = to_json(twist(gen));
    out.report["limit_curvature_class"] = to_string(cc.cls);
    out.report["mutual_position_theory"] = to_string(mutual_theory(gen));
  }
  return out;
}

inline ReportOutput report_asymptote(const ExperimentConfig& cfg, unsigned workers)
{
  const auto& gen = need_generator(cfg);
  if (cfg.frame != Frame::HalfPlane) throw ConfigError("asymptote reports use the half-plane frame");
  const KoenigsEvaluator ev(gen);
  const auto pts = points_or(cfg, 1.0);
  ReportOutput out;
  out.report = report_header(cfg, "asymptote");
  out.report["generator"] = generator_to_json(gen);
  out.report["omega_region"] = to_string(classify_omega(gen.alpha(), gen.beta()));
  out.report["points"] = parallel_map<json>(pts.size(), workers, [&](std::size_t i) {
    const auto r = asymptote_report(gen, ev, pts[i], cfg.integrator, cfg.twist_vanishes);
    json j = {{"point", to_json(pts[i])},
              {"exists", to_string(r.exists)},
              {"shared_across_initial_points", r.shared_across_initial_points},
              {"passes_through_minus_one", r.passes_through_minus_one},
              {"numeric_limit", to_json(r.numeric_limit)},
              {"last_value", r.last_value},
              {"consistent", r.consistent}};
    j["predicted_limit"] = r.predicted_limit ? json(*r.predicted_limit) : json(nullptr);
    j["intercept"] = r.intercept ? json(*r.intercept) : json(nullptr);
    return j;
  });
  if (pts.size() >= 2) {
    json m = json::array();
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto mp = mutual_position(gen, ev, pts[0], pts[i], cfg.integrator);
      json e = {{"w1", to_json(pts[0])}, {"w2", to_json(pts[i])}, {"theory", to_string(mp.theory)},
                {"measured", to_string(mp.measured)}, {"evidence", to_json(mp.evidence)},
                {"last_abs_difference", mp.last_abs_difference}};
      e["s_over_sigma_difference"] = mp.s_over_sigma ? to_json(*mp.s_over_sigma) : json(nullptr);
      m.push_back(e);
    }
    out.report["mutual_position"] = m;
  }
  return out;
}

inline json pair_json(const PairOrderReport& p)
{
  json j = {{"above_all", p.above_all}, {"predicted_order", p.predicted_order}, {"predicted_lower_bound", p.predicted_lower_bound}};
  if (!p.above_all) {
    j["estimated_order"] = p.estimated_order;
    j["fit_r2"] = p.fit_r2;
  }
  return j;
}

inline std::string pair_csv(const PairCurve& c)
{
  std::ostringstream os;
  os << "t,gap,base\n";
  for (std::size_t i = 0; i < c.t.size(); ++i) os << fmt17(c.t[i]) << ',' << fmt17(c.gap[i]) << ',' << fmt17(c.base[i]) << '\n';
  return os.str();
}

inline ReportOutput report_rigidity(const ExperimentConfig& cfg, unsigned workers)
{
  const auto& gen = need_generator(cfg);
  const auto pts = points_or(cfg, 0.0);
  const auto& rc = cfg.rigidity;
  ReportOutput out;
  out.report = report_header(cfg, "rigidity");
  out.report["generator"] = generator_to_json(gen);
  out.report["mode"] = rc.mode;
  if (rc.mode == "weak") {
    using Item = std::pair<json, std::string>;
    const std::size_t n = rc.c.size() * pts.size();
    const auto items = parallel_map<Item>(n, workers, [&](std::size_t k) {
      const cplx c = rc.c[k / pts.size()];
      const cplx z = pts[k % pts.size()];
      const auto r = weak_rigidity_experiment(gen, c, z, cfg.integrator);
      json j = {{"c", to_json(c)}, {"point", to_json(z)}, {"pair", pair_json(r.pair)},
                {"order_greater_than_beta", r.order_greater_than_beta}, {"order_approx_beta", r.order_approx_beta},
                {"verdict", r.consistent ? "rigid_consistent" : "inconsistent"}};
      return Item{j, pair_csv(r.pair.curve)};
    });
    out.report["experiments"] = json::array();
    for (std::size_t k = 0; k < items.size(); ++k) {
      auto j = items[k].first;
      j["curve_file"] = "rigidity_curve_" + std::to_string(k) + ".csv";
      out.report["experiments"].push_back(j);
      out.files.emplace_back("rigidity_curve_" + std::to_string(k) + ".csv", items[k].second);
    }
  } else if (rc.mode == "strong") {
    if (!cfg.generator_star) throw ConfigError("strong rigidity needs 'generator_star'");
    const auto r = strong_rigidity_check(gen, *cfg.generator_star, rc.theta, pts, cfg.integrator, rc.exploratory);
    out.report["generator_star"] = generator_to_json(*cfg.generator_star);
    out.report["theta"] = rc.theta;
    out.report["exploratory"] = r.exploratory;
    json a = json::array();
    for (const auto& p : r.points)
      a.push_back({{"point", to_json(p.z)}, {"limit", to_json(p.limit)}, {"last_value", p.last_value}, {"vanishes", p.vanishes}});
    out.report["points"] = a;
    out.report["all_vanish"] = r.all_vanish;
    out.report["koenigs_difference_spread"] = r.koenigs_difference_spread;
    out.report["koenigs_difference_constant"] = r.koenigs_difference_constant;
  } else if (rc.mode == "pair" || rc.mode == "same") {
    if (pts.size() < 2) throw ConfigError("pair/same modes need at least two points");
    const GeneratorSpec& other = rc.mode == "pair" ? (cfg.generator_star ? *cfg.generator_star : throw ConfigError("pair mode needs 'generator_star'")) : gen;
    json a = json::array();
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (rc.mode == "pair") {
        const auto p = pair_order_estimate(gen, other, pts[0], pts[i], cfg.integrator);
        a.push_back({{"z1", to_json(pts[0])}, {"z2", to_json(pts[i])}, {"pair", pair_json(p)}});
      } else {
        const auto s = same_trajectory_order(gen, pts[0], pts[i], cfg.integrator);
        json j = {{"z1", to_json(pts[0])}, {"z2", to_json(pts[i])}, {"pair", pair_json(s.pair)}, {"order_check", s.order_check},
                  {"scaled_difference", to_json(s.scaled_difference)}, {"scaled_difference_vanishes", s.scaled_difference_vanishes}};
        if (s.unlogged) j["unlogged_scaled_difference"] = to_json(*s.unlogged);
        a.push_back(j);
      }
    }
    out.report["pairs"] = a;
  } else {
    throw ConfigError("unknown rigidity mode '" + rc.mode + "'");
  }
  return out;
}

inline ReportOutput report_appendix(const ExperimentConfig& cfg, unsigned workers)
{
  const auto& gen = need_generator(cfg);
  const KoenigsEvaluator ev(gen);
  const auto pts = points_or(cfg, cfg.frame == Frame::Disk ? cplx(0.3, 0.0) : cplx(3.0, 0.0));
  ReportOutput out;
  out.report = report_header(cfg, "appendix");
  out.report["generator"] = generator_to_json(gen);
  out.report["points"] = parallel_map<json>(pts.size(), workers, [&](std::size_t i) {
    const auto c = appendix_limit(gen, ev, pts[i], cfg.integrator, cfg.frame);
    return json{{"point", to_json(pts[i])}, {"numeric", to_json(c.numeric)}, {"closed_form", to_json(c.closed_form)},
                {"abs_diff", c.abs_diff()}, {"rel_diff", c.rel_diff()}};
  });
  return out;
}

inline ReportOutput run_report(const ExperimentConfig& cfg, unsigned workers)
{
  if (cfg.kind == "asymptotics") return report_asymptotics(cfg, workers);
  if (cfg.kind == "geometry") return report_geometry(cfg, workers);
  if (cfg.kind == "omega") return report_omega(cfg, workers);
  if (cfg.kind == "asymptote") return report_asymptote(cfg, workers);
  if (cfg.kind == "rigidity") return report_rigidity(cfg, workers);
  if (cfg.kind == "appendix") return report_appendix(cfg, workers);
  throw ConfigError("unknown report kind '" + cfg.kind + "'");
}

} // namespace semiflow
