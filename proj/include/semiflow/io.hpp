#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "complex.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "flow.hpp"
#include "generators.hpp"
#include "version.hpp"

namespace semiflow {

using json = nlohmann::json;

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx cplx_from_json(const json& j, const char* what)
{
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(std::string(what) + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::string to_string(RemainderKind k)
{
  switch (k) {
  case RemainderKind::Zero: return "zero";
  case RemainderKind::ExtraPower: return "extra_power";
  case RemainderKind::RationalExample1: return "rational_example_1";
  }
  return "?";
}

inline json generator_to_json(const GeneratorSpec& g)
{
  json r = {{"kind", to_string(g.remainder().kind)}};
  if (g.remainder().kind == RemainderKind::ExtraPower) {
    r["c"] = to_json(g.remainder().c);
    r["gamma"] = g.remainder().gamma;
  }
  return {{"a", to_json(g.a())}, {"alpha", g.alpha()}, {"b", to_json(g.b())}, {"beta", g.beta()}, {"remainder", r}};
}

inline double number_field(const json& j, const char* key)
{
  if (!j.contains(key) || !j[key].is_number()) throw ConfigError(std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

inline GeneratorSpec generator_from_json(const json& j)
{
  if (!j.is_object()) throw ConfigError("generator must be a JSON object");
  if (!j.contains("a")) throw ConfigError("generator needs 'a'");
  const cplx a = cplx_from_json(j["a"], "a");
  const double alpha = number_field(j, "alpha");
  const cplx b = j.contains("b") ? cplx_from_json(j["b"], "b") : cplx(0.0, 0.0);
  const double beta = j.contains("beta") ? number_field(j, "beta") : 1.0;
  Remainder rem;
  if (j.contains("remainder")) {
    const auto& r = j["remainder"];
    const std::string kind = r.value("kind", "zero");
    if (kind == "zero") rem.kind = RemainderKind::Zero;
    else if (kind == "extra_power") {
      rem.kind = RemainderKind::ExtraPower;
      rem.c = r.contains("c") ? cplx_from_json(r["c"], "remainder.c") : cplx(0.0, 0.0);
      rem.gamma = number_field(r, "gamma");
    } else if (kind == "rational_example_1") rem.kind = RemainderKind::RationalExample1;
    else throw ConfigError("unknown remainder kind '" + kind + "'");
  }
  return make_generator(a, alpha, b, beta, rem);
}

inline json to_json(const LimitEstimate& e)
{
  json j = {{"value", to_json(e.value)}, {"error", e.error}, {"model", to_string(e.model)},
            {"samples_used", e.samples_used}, {"divergent", e.divergent}};
  if (e.model == LimitModel::TailFit) j["p"] = e.p;
  return j;
}

inline std::string fnv1a64(const std::string& s)
{
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// write to a sibling temp file, then rename over the target
inline void atomic_write(const std::filesystem::path& path, const std::string& content)
{
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct FieldConfig {
  Rect rect{-1.0, 1.0, -1.0, 1.0};
  int nx = 41, ny = 41;
};

struct RigidityConfig {
  std::string mode = "weak";  // weak | strong | pair | same
  std::vector<cplx> c{{0.0, 0.0}};
  double theta = 0.0;
  bool exploratory = false;
};

struct ExperimentConfig {
  std::string kind;
  std::optional<GeneratorSpec> generator;
  std::optional<GeneratorSpec> generator_star;
  Frame frame = Frame::Disk;
  std::vector<cplx> points;
  IntegratorConfig integrator;
  FieldConfig field;
  std::vector<std::pair<double, double>> omega_pairs;
  RigidityConfig rigidity;
  std::optional<bool> twist_vanishes;
  json canonical;  // the document after overrides; hashed into reports

  std::string hash() const { return fnv1a64(canonical.dump()); }
};

struct Overrides {
  std::optional<double> t_max;
  std::optional<double> tol;
};

inline Method method_from_string(const std::string& s)
{
  if (s == "auto") return Method::Auto;
  if (s == "disk_direct") return Method::DiskDirect;
  if (s == "half_plane") return Method::HalfPlane;
  throw ConfigError("unknown method '" + s + "'");
}

/**
 * Config document:
 *   kind, generator, generator_star, frame ("disk" | "half_plane"), points,
 *   grid {t_first, t_max, per_decade} or grid {times}, tolerances {rel, abs},
 *   method, field {rect [re0, re1, im0, im1], nx, ny}, omega_pairs,
 *   rigidity {mode, c, theta, exploratory}, twist_vanishes.
 */
inline ExperimentConfig parse_config(json j, const Overrides& ov = {})
{
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (ov.t_max) {
    if (!(*ov.t_max > 0.0)) throw ConfigError("--t-max must be positive");
    if (j.contains("grid") && j["grid"].contains("times")) throw ConfigError("--t-max cannot override an explicit time list");
    j["grid"]["t_max"] = *ov.t_max;
  }
  if (ov.tol) {
    if (!(*ov.tol > 0.0)) throw ConfigError("--tol must be positive");
    j["tolerances"]["rel"] = *ov.tol;
  }
  ExperimentConfig cfg;
  cfg.kind = j.value("kind", "");
  if (j.contains("generator")) cfg.generator = generator_from_json(j["generator"]);
  if (j.contains("generator_star")) cfg.generator_star = generator_from_json(j["generator_star"]);
  const std::string frame = j.value("frame", "disk");
  if (frame == "disk") cfg.frame = Frame::Disk;
  else if (frame == "half_plane") cfg.frame = Frame::HalfPlane;
  else throw ConfigError("unknown frame '" + frame + "'");
  if (j.contains("points")) {
    if (!j["points"].is_array()) throw ConfigError("points must be an array");
    for (const auto& p : j["points"]) cfg.points.push_back(cplx_from_json(p, "points[]"));
  }
  for (cplx p : cfg.points) {
    if (cfg.frame == Frame::Disk) check_disk_point(p);
    else check_halfplane_point(p);
  }

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (g.contains("times")) {
      cfg.integrator.grid = TimeGrid::list(g["times"].get<std::vector<double>>());
    } else {
      const double t0 = g.value("t_first", 1.0);
      const double t1 = g.value("t_max", 1e6);
      const int pd = g.value("per_decade", 4);
      cfg.integrator.grid = TimeGrid::decades(t0, t1, pd);
    }
  }
  if (j.contains("tolerances")) {
    cfg.integrator.rel_tol = j["tolerances"].value("rel", cfg.integrator.rel_tol);
    cfg.integrator.abs_tol = j["tolerances"].value("abs", cfg.integrator.abs_tol);
    if (!(cfg.integrator.rel_tol > 0.0) || !(cfg.integrator.abs_tol > 0.0)) throw ConfigError("tolerances must be positive");
  }
  if (j.contains("method")) cfg.integrator.method = method_from_string(j["method"].get<std::string>());

  if (j.contains("field")) {
    const auto& f = j["field"];
    if (f.contains("rect")) {
      const auto r = f["rect"].get<std::vector<double>>();
      if (r.size() != 4) throw ConfigError("field.rect needs 4 numbers");
      cfg.field.rect = {r[0], r[1], r[2], r[3]};
    }
    cfg.field.nx = f.value("nx", cfg.field.nx);
    cfg.field.ny = f.value("ny", cfg.field.ny);
  }
  if (j.contains("omega_pairs"))
    for (const auto& p : j["omega_pairs"]) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("omega_pairs entries are [alpha, beta]");
      cfg.omega_pairs.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
  if (j.contains("rigidity")) {
    const auto& r = j["rigidity"];
    cfg.rigidity.mode = r.value("mode", cfg.rigidity.mode);
    if (r.contains("c")) {
      cfg.rigidity.c.clear();
      for (const auto& c : r["c"]) cfg.rigidity.c.push_back(cplx_from_json(c, "rigidity.c[]"));
    }
    cfg.rigidity.theta = r.value("theta", 0.0);
    cfg.rigidity.exploratory = r.value("exploratory", false);
  }
  if (j.contains("twist_vanishes") && !j["twist_vanishes"].is_null()) cfg.twist_vanishes = j["twist_vanishes"].get<bool>();
  cfg.canonical = std::move(j);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& ov = {})
{
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(std::move(j), ov);
}

// common header of every report
inline json report_header(const ExperimentConfig& cfg, const std::string& kind)
{
  return {{"kind", kind},
          {"version", version},
          {"config_hash", cfg.hash()},
          {"tolerances", {{"rel", cfg.integrator.rel_tol}, {"abs", cfg.integrator.abs_tol}}},
          {"t_max", cfg.integrator.grid.back()}};
}

} // namespace semiflow
