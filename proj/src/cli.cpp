#include "mmag/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "mmag/errors.hpp"
#include "mmag/geometry.hpp"
#include "mmag/grid3d.hpp"
#include "mmag/magnetostatics3d.hpp"
#include "mmag/mesh.hpp"
#include "mmag/shape_coeffs.hpp"
#include "mmag/sphere.hpp"
#include "mmag/wire_film.hpp"
#include "mmag/wire_wire.hpp"

namespace mmag {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// error reporting and file plumbing
// ---------------------------------------------------------------------------

int emit_error(int code, const std::string& type, const std::string& message) {
  const json doc{{"error", {{"type", type}, {"message", message}}}};
  std::fprintf(stderr, "%s\n", doc.dump().c_str());
  return code;
}

[[noreturn]] void reject(const std::string& path, const std::string& what) {
  throw InvalidArgument("config " + path + ": " + what);
}

json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config " + path + " is not valid JSON: " + e.what());
  }
}

// All result files go through a temporary so a crash never leaves a partial file.
void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp(path + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("failed while writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

void deliver_json(const json& doc, const std::string& path) {
  const std::string body = doc.dump(2) + "\n";
  if (path.empty())
    std::fputs(body.c_str(), stdout);
  else
    write_atomic(path, body);
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// strict config ingestion: every object is checked against its allowed keys
// ---------------------------------------------------------------------------

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) reject(path, "must be an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) reject(path, "unknown key \"" + item.key() + "\"");
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) reject(path, "must be a number");
  return j.get<double>();
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  return as_number(obj.at(key), path + "." + key);
}

int int_or(const json& obj, const char* key, const std::string& path, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& j = obj.at(key);
  if (!j.is_number_integer()) reject(path + "." + key, "must be an integer");
  return j.get<int>();
}

bool bool_or(const json& obj, const char* key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& j = obj.at(key);
  if (!j.is_boolean()) reject(path + "." + key, "must be true or false");
  return j.get<bool>();
}

Eigen::Vector2d vec2_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    reject(path, "must be a pair of numbers [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Eigen::Vector3d vec3_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number())
    reject(path, "must be a triple of numbers [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// A cross-section is either an explicit polygon or a regular-polygon disc.
CrossSectiond parse_section(const json& j, const std::string& path) {
  check_keys(j, path, {"polygon", "disc"});
  const bool has_poly = j.contains("polygon");
  const bool has_disc = j.contains("disc");
  if (has_poly == has_disc) reject(path, "needs exactly one of \"polygon\" or \"disc\"");
  if (has_poly) {
    const json& p = j.at("polygon");
    if (!p.is_array() || p.size() < 3)
      reject(path + ".polygon", "must be an array of at least three [x, y] pairs");
    CrossSectiond s;
    for (std::size_t i = 0; i < p.size(); ++i)
      s.vertices.push_back(vec2_at(p[i], path + ".polygon[" + std::to_string(i) + "]"));
    validate(s);
    return s;
  }
  const json& d = j.at("disc");
  check_keys(d, path + ".disc", {"center", "radius", "segments"});
  const Eigen::Vector2d center =
      d.contains("center") ? vec2_at(d.at("center"), path + ".disc.center")
                           : Eigen::Vector2d::Zero();
  const double radius = number_or(d, "radius", path + ".disc", 1.0);
  const int segments = int_or(d, "segments", path + ".disc", 64);
  return polygon_from_disc<double>(center, radius, segments);
}

// Applied fields are a constant [fx, fy, fz] or one triple per node.
std::vector<Eigen::Vector3d> parse_field(const json& j, const std::string& path,
                                         std::size_t n_nodes) {
  if (!j.is_array() || j.empty())
    reject(path, "must be [fx, fy, fz] or an array with one such triple per node");
  if (j[0].is_number()) return std::vector<Eigen::Vector3d>(n_nodes, vec3_at(j, path));
  if (j.size() != n_nodes)
    reject(path, "sampled field needs " + std::to_string(n_nodes) + " entries, got " +
                     std::to_string(j.size()));
  std::vector<Eigen::Vector3d> out;
  out.reserve(n_nodes);
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(vec3_at(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

AnisotropyModel parse_anisotropy(const json& obj, const std::string& path) {
  if (!obj.contains("anisotropy")) return AnisotropyModel::zero();
  const json& j = obj.at("anisotropy");
  check_keys(j, path, {"axis", "strength"});
  const double strength = number_or(j, "strength", path, 0.0);
  const Eigen::Vector3d axis =
      j.contains("axis") ? vec3_at(j.at("axis"), path + ".axis") : Eigen::Vector3d(0, 0, 1);
  if (strength == 0.0) return AnisotropyModel::zero();
  return AnisotropyModel::uniaxial(axis, strength);
}

MinimizeOptions parse_optimizer(const json& obj, const std::string& path) {
  MinimizeOptions o;
  if (!obj.contains("optimizer")) return o;
  const json& j = obj.at("optimizer");
  check_keys(j, path,
             {"max_iterations", "gradient_tolerance", "initial_step", "armijo_constant",
              "backtracking_ratio", "multistart", "seed"});
  o.max_iterations = int_or(j, "max_iterations", path, o.max_iterations);
  o.gradient_tolerance = number_or(j, "gradient_tolerance", path, o.gradient_tolerance);
  o.initial_step = number_or(j, "initial_step", path, o.initial_step);
  o.armijo_constant = number_or(j, "armijo_constant", path, o.armijo_constant);
  o.backtracking_ratio = number_or(j, "backtracking_ratio", path, o.backtracking_ratio);
  o.multistart = int_or(j, "multistart", path, o.multistart);
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
      reject(path + ".seed", "must be a non-negative integer");
    o.seed = s.get<std::uint64_t>();
  }
  validate(o);
  return o;
}

CoefficientParams parse_coefficient_params(const json& obj, const std::string& path) {
  CoefficientParams p;
  if (obj.contains("truncation_levels")) {
    const json& levels = obj.at("truncation_levels");
    if (!levels.is_array() || levels.size() < 2)
      reject(path + ".truncation_levels", "must be an array of at least two radii");
    p.truncation_levels.clear();
    for (std::size_t i = 0; i < levels.size(); ++i)
      p.truncation_levels.push_back(
          as_number(levels[i], path + ".truncation_levels[" + std::to_string(i) + "]"));
  }
  p.target_h = number_or(obj, "target_h", path, p.target_h);
  p.tol = number_or(obj, "tol", path, p.tol);
  p.h_refine = bool_or(obj, "h_refine", path, p.h_refine);
  if (!(p.target_h > 0)) reject(path + ".target_h", "must be positive");
  if (!(p.tol > 0 && p.tol < 1)) reject(path + ".tol", "must lie in (0, 1)");
  return p;
}

// Either explicit {alpha, beta, gamma} or settings for computing them from a
// cross-section (the given fallback section, or an inline "section" override).
ShapeCoefficients resolve_coefficients(const json& obj, const std::string& path,
                                       const CrossSectiond* fallback_section) {
  if (!obj.contains("coefficients")) {
    if (!fallback_section)
      reject(path, "missing \"coefficients\" (explicit values or computation settings)");
    return coefficients(*fallback_section, CoefficientParams{});
  }
  const json& j = obj.at("coefficients");
  check_keys(j, path,
             {"alpha", "beta", "gamma", "section", "truncation_levels", "target_h", "tol"});
  const bool has_explicit = j.contains("alpha") || j.contains("beta") || j.contains("gamma");
  if (has_explicit) {
    for (const char* k : {"section", "truncation_levels", "target_h", "tol"})
      if (j.contains(k)) reject(path, "mixes explicit values with computation settings");
    for (const char* k : {"alpha", "beta", "gamma"})
      if (!j.contains(k)) reject(path, std::string("explicit values need \"") + k + "\"");
    ShapeCoefficients c;
    c.alpha = as_number(j.at("alpha"), path + ".alpha");
    c.beta = as_number(j.at("beta"), path + ".beta");
    c.gamma = as_number(j.at("gamma"), path + ".gamma");
    validate(c);
    return c;
  }
  CrossSectiond section;
  if (j.contains("section"))
    section = parse_section(j.at("section"), path + ".section");
  else if (fallback_section)
    section = *fallback_section;
  else
    reject(path, "needs either explicit alpha/beta/gamma or a \"section\"");
  return coefficients(section, parse_coefficient_params(j, path));
}

// ---------------------------------------------------------------------------
// result serialization
// ---------------------------------------------------------------------------

json breakdown_json(const EnergyBreakdown& e) {
  return json{{"exchange", e.exchange},
              {"anisotropy", e.anisotropy},
              {"zeeman", e.zeeman},
              {"magnetostatic", e.magnetostatic},
              {"total", e.total}};
}

json nodes_json(const std::vector<Eigen::Vector3d>& nodes) {
  json out = json::array();
  for (const auto& m : nodes) out.push_back({m.x(), m.y(), m.z()});
  return out;
}

json coefficients_json(const ShapeCoefficients& c) {
  return json{{"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}};
}

std::string wire_profile_csv(const std::vector<Eigen::Vector3d>& nodes) {
  std::string out = "x,m1,m2,m3\n";
  const std::size_t n = nodes.size() - 1;
  for (std::size_t j = 0; j < nodes.size(); ++j)
    out += csv_number(double(j) / double(n)) + "," + csv_number(nodes[j].x()) + "," +
           csv_number(nodes[j].y()) + "," + csv_number(nodes[j].z()) + "\n";
  return out;
}

std::string film_profile_csv(const Mesh2D& mesh, const std::vector<Eigen::Vector3d>& nodes) {
  std::string out = "x1,x2,m1,m2,m3\n";
  for (std::size_t v = 0; v < nodes.size(); ++v)
    out += csv_number(mesh.vertices[v].x()) + "," + csv_number(mesh.vertices[v].y()) + "," +
           csv_number(nodes[v].x()) + "," + csv_number(nodes[v].y()) + "," +
           csv_number(nodes[v].z()) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// coeffs
// ---------------------------------------------------------------------------

struct CoeffsArgs {
  std::string config, output, csv;
  bool dump_defaults = false;
};

json coeffs_defaults() {
  return json{{"section", {{"disc", {{"center", {0.0, 0.0}}, {"radius", 1.0}, {"segments", 64}}}}},
              {"truncation_levels", {8.0, 16.0}},
              {"target_h", 0.05},
              {"tol", 1e-10},
              {"h_refine", false}};
}

int run_coeffs(const CoeffsArgs& a) {
  if (a.dump_defaults) {
    std::fputs((coeffs_defaults().dump(2) + "\n").c_str(), stdout);
    return 0;
  }
  const json cfg = load_config(a.config);
  check_keys(cfg, "$", {"section", "truncation_levels", "target_h", "tol", "h_refine"});
  if (!cfg.contains("section")) reject("$", "missing \"section\"");
  const CrossSectiond section = parse_section(cfg.at("section"), "$.section");
  const CoefficientParams params = parse_coefficient_params(cfg, "$");

  const ShapeCoefficients c = coefficients(section, params);

  json levels = json::array();
  for (const auto& l : c.levels)
    levels.push_back({{"truncation_radius", l.truncation_radius},
                      {"target_h", l.target_h},
                      {"alpha", l.alpha},
                      {"beta", l.beta},
                      {"gamma", l.gamma}});
  json doc{{"alpha", c.alpha},
           {"beta", c.beta},
           {"gamma", c.gamma},
           {"error_estimate", c.error_estimate},
           {"levels", levels}};
  if (c.h_refine_error) doc["h_refine_error"] = *c.h_refine_error;

  if (!a.csv.empty()) {
    std::string table = "truncation_radius,target_h,alpha,beta,gamma\n";
    for (const auto& l : c.levels)
      table += csv_number(l.truncation_radius) + "," + csv_number(l.target_h) + "," +
               csv_number(l.alpha) + "," + csv_number(l.beta) + "," + csv_number(l.gamma) + "\n";
    write_atomic(a.csv, table);
  }
  deliver_json(doc, a.output);
  return 0;
}

// ---------------------------------------------------------------------------
// wire-film
// ---------------------------------------------------------------------------

struct WireFilmArgs {
  std::string config, output, wire_csv, film_csv;
  bool dump_defaults = false;
};

json optimizer_defaults() {
  const MinimizeOptions o;
  return json{{"max_iterations", o.max_iterations},
              {"gradient_tolerance", o.gradient_tolerance},
              {"initial_step", o.initial_step},
              {"armijo_constant", o.armijo_constant},
              {"backtracking_ratio", o.backtracking_ratio},
              {"multistart", o.multistart},
              {"seed", o.seed}};
}

json wire_film_defaults() {
  const double half_pi = std::numbers::pi / 2;
  return json{
      {"lambda", 1.0},
      {"theta", {{"disc", {{"center", {0.0, 0.0}}, {"radius", 1.0}, {"segments", 64}}}}},
      {"coefficients", {{"alpha", half_pi}, {"beta", half_pi}, {"gamma", 0.0}}},
      {"anisotropy", {{"axis", {0.0, 0.0, 1.0}}, {"strength", 0.0}}},
      {"wire", {{"segments", 64}, {"applied", {0.0, 0.0, 0.0}}}},
      {"film", {{"target_h", 0.1}, {"applied", {0.0, 0.0, 0.0}}}},
      {"optimizer", optimizer_defaults()}};
}

int run_wire_film(const WireFilmArgs& a) {
  if (a.dump_defaults) {
    std::fputs((wire_film_defaults().dump(2) + "\n").c_str(), stdout);
    return 0;
  }
  const json cfg = load_config(a.config);
  check_keys(cfg, "$",
             {"lambda", "theta", "coefficients", "anisotropy", "wire", "film", "optimizer"});

  const double lambda = number_or(cfg, "lambda", "$", 1.0);
  if (!(lambda > 0)) reject("$.lambda", "must be positive");
  if (!cfg.contains("theta")) reject("$", "missing \"theta\"");
  const CrossSectiond theta = parse_section(cfg.at("theta"), "$.theta");
  const double theta_area = polygon_area(theta);
  const AnisotropyModel anisotropy = parse_anisotropy(cfg, "$.anisotropy");
  const MinimizeOptions opts = parse_optimizer(cfg, "$.optimizer");

  int wire_segments = 64;
  json wire_applied;
  if (cfg.contains("wire")) {
    const json& w = cfg.at("wire");
    check_keys(w, "$.wire", {"segments", "applied"});
    wire_segments = int_or(w, "segments", "$.wire", wire_segments);
    if (w.contains("applied")) wire_applied = w.at("applied");
  }
  if (wire_segments < 1) reject("$.wire.segments", "must be at least 1");

  double film_target_h = 0.1;
  json film_applied;
  if (cfg.contains("film")) {
    const json& f = cfg.at("film");
    check_keys(f, "$.film", {"target_h", "applied"});
    film_target_h = number_or(f, "target_h", "$.film", film_target_h);
    if (f.contains("applied")) film_applied = f.at("applied");
  }
  if (!(film_target_h > 0)) reject("$.film.target_h", "must be positive");

  const ShapeCoefficients coeffs = resolve_coefficients(cfg, "$.coefficients", &theta);

  WireParams wp;
  wp.lambda = lambda;
  wp.section_area = theta_area;
  wp.alpha = coeffs.alpha;
  wp.beta = coeffs.beta;
  wp.gamma = coeffs.gamma;
  wp.anisotropy = anisotropy;
  if (!wire_applied.is_null())
    wp.applied = parse_field(wire_applied, "$.wire.applied",
                             static_cast<std::size_t>(wire_segments) + 1);

  const auto mesh = std::make_shared<const Mesh2D>(triangulate_section(theta, film_target_h));
  FilmParams fp;
  fp.lambda = lambda;
  fp.anisotropy = anisotropy;
  fp.disc = std::make_shared<const FilmDiscretization>(mesh);
  if (!film_applied.is_null())
    fp.applied = parse_field(film_applied, "$.film.applied", mesh->vertices.size());

  const WireFilmSolution s = minimize_wire_film(wp, wire_segments, fp, opts);

  json film_vertices = json::array();
  for (const auto& v : mesh->vertices) film_vertices.push_back({v.x(), v.y()});
  const json doc{
      {"parameters",
       {{"lambda", lambda}, {"theta_area", theta_area}, {"coefficients", coefficients_json(coeffs)}}},
      {"wire",
       {{"converged", s.wire.converged},
        {"iterations", s.wire.iterations},
        {"start_index", s.wire.start_index},
        {"energy", breakdown_json(s.wire.energy)},
        {"nodes", nodes_json(s.wire.field.nodes)}}},
      {"film",
       {{"converged", s.film.converged},
        {"iterations", s.film.iterations},
        {"start_index", s.film.start_index},
        {"energy", breakdown_json(s.film.energy)},
        {"vertices", film_vertices},
        {"nodes", nodes_json(s.film.field.nodes)}}}};

  if (!a.wire_csv.empty()) write_atomic(a.wire_csv, wire_profile_csv(s.wire.field.nodes));
  if (!a.film_csv.empty()) write_atomic(a.film_csv, film_profile_csv(*mesh, s.film.field.nodes));
  deliver_json(doc, a.output);
  return 0;
}

// ---------------------------------------------------------------------------
// wire-wire
// ---------------------------------------------------------------------------

struct WireWireArgs {
  std::string config, output, wire_a_csv, wire_b_csv;
  bool dump_defaults = false;
};

json wire_wire_defaults() {
  return json{{"lambda", 1.0},
              {"coefficients", {{"alpha", 0.5}, {"beta", 0.5}, {"gamma", 0.0}}},
              {"anisotropy", {{"axis", {0.0, 0.0, 1.0}}, {"strength", 0.0}}},
              {"wire_a", {{"segments", 64}, {"applied", {0.0, 0.0, 0.0}}}},
              {"wire_b", {{"segments", 64}, {"applied", {0.0, 0.0, 0.0}}}},
              {"optimizer", optimizer_defaults()}};
}

int run_wire_wire(const WireWireArgs& a) {
  if (a.dump_defaults) {
    std::fputs((wire_wire_defaults().dump(2) + "\n").c_str(), stdout);
    return 0;
  }
  const json cfg = load_config(a.config);
  check_keys(cfg, "$",
             {"lambda", "coefficients", "anisotropy", "wire_a", "wire_b", "optimizer"});

  WireWireParams p;
  p.lambda = number_or(cfg, "lambda", "$", 1.0);
  if (!(p.lambda > 0)) reject("$.lambda", "must be positive");
  p.anisotropy = parse_anisotropy(cfg, "$.anisotropy");
  const ShapeCoefficients coeffs = resolve_coefficients(cfg, "$.coefficients", nullptr);
  p.alpha = coeffs.alpha;
  p.beta = coeffs.beta;
  p.gamma = coeffs.gamma;
  const MinimizeOptions opts = parse_optimizer(cfg, "$.optimizer");

  auto parse_branch = [&](const char* key, int& segments, json& applied) {
    if (!cfg.contains(key)) return;
    const json& w = cfg.at(key);
    const std::string path = std::string("$.") + key;
    check_keys(w, path, {"segments", "applied"});
    segments = int_or(w, "segments", path, segments);
    if (w.contains("applied")) applied = w.at("applied");
  };
  int segments_a = 64, segments_b = 64;
  json applied_a, applied_b;
  parse_branch("wire_a", segments_a, applied_a);
  parse_branch("wire_b", segments_b, applied_b);
  if (segments_a < 1) reject("$.wire_a.segments", "must be at least 1");
  if (segments_b < 1) reject("$.wire_b.segments", "must be at least 1");
  if (!applied_a.is_null())
    p.applied_a =
        parse_field(applied_a, "$.wire_a.applied", static_cast<std::size_t>(segments_a) + 1);
  if (!applied_b.is_null())
    p.applied_b =
        parse_field(applied_b, "$.wire_b.applied", static_cast<std::size_t>(segments_b) + 1);

  const WireWireSolution s = minimize_wire_wire(p, segments_a, segments_b, opts);

  std::vector<Eigen::Vector3d> profile_a, profile_b;
  for (int j = 0; j <= segments_a; ++j) profile_a.push_back(s.field.a(j));
  for (int j = 0; j <= segments_b; ++j) profile_b.push_back(s.field.b(j));

  const json doc{{"parameters", {{"lambda", p.lambda}, {"coefficients", coefficients_json(coeffs)}}},
                 {"converged", s.converged},
                 {"iterations", s.iterations},
                 {"start_index", s.start_index},
                 {"energy", breakdown_json(s.energy)},
                 {"junction", {s.field.a(0).x(), s.field.a(0).y(), s.field.a(0).z()}},
                 {"wire_a", {{"nodes", nodes_json(profile_a)}}},
                 {"wire_b", {{"nodes", nodes_json(profile_b)}}}};

  if (!a.wire_a_csv.empty()) write_atomic(a.wire_a_csv, wire_profile_csv(profile_a));
  if (!a.wire_b_csv.empty()) write_atomic(a.wire_b_csv, wire_profile_csv(profile_b));
  deliver_json(doc, a.output);
  return 0;
}

// ---------------------------------------------------------------------------
// validate3d
// ---------------------------------------------------------------------------

struct Validate3dArgs {
  std::string kind = "wire-film";
  std::vector<double> h_list{0.4, 0.2, 0.1};
  double delta_div = 4.0;
  double box = 4.0;
  double tol = 1e-8;
  double alpha = 0.5, beta = 0.5, gamma = 0.0;
  int film_layers = 2;
  std::vector<double> ma{1.0, 0.0, 0.0};
  std::vector<double> mb{0.0, 0.0, 1.0};
  std::string output, csv;
};

int run_validate3d(const Validate3dArgs& a) {
  const StructureKind kind =
      a.kind == "wire-film" ? StructureKind::wire_film : StructureKind::wire_wire;
  auto unit = [](const std::vector<double>& v, const char* name) {
    Eigen::Vector3d m(v[0], v[1], v[2]);
    if (!(m.norm() > 1e-12))
      throw InvalidArgument(std::string(name) + " must be a nonzero vector");
    return Eigen::Vector3d(m / m.norm());
  };
  const Eigen::Vector3d ma = unit(a.ma, "--ma");
  const Eigen::Vector3d mb = unit(a.mb, "--mb");

  ShapeCoefficients c;
  c.alpha = a.alpha;
  c.beta = a.beta;
  c.gamma = a.gamma;
  validate(c);

  StudyParams sp;
  sp.box = a.box;
  sp.tol = a.tol;
  sp.delta_div = a.delta_div;
  sp.spacing.film_layers = a.film_layers;

  std::vector<double> h_list = a.h_list;
  std::sort(h_list.begin(), h_list.end(), std::greater<>());
  h_list.erase(std::unique(h_list.begin(), h_list.end()), h_list.end());

  const ConvergenceStudy study = convergence_study(kind, ma, mb, h_list, c, sp);

  json rows = json::array();
  std::string table = "h,E_over_h2,limit,rel_error\n";
  for (const auto& r : study.rows) {
    rows.push_back({{"h", r.h},
                    {"energy", r.energy},
                    {"E_over_h2", r.scaled},
                    {"limit", r.limit},
                    {"rel_error", r.error},
                    {"nodes", r.nodes},
                    {"iterations", r.iterations},
                    {"seconds", r.seconds}});
    table += csv_number(r.h) + "," + csv_number(r.scaled) + "," + csv_number(r.limit) + "," +
             csv_number(r.error) + "\n";
  }
  const json doc{{"kind", a.kind},
                 {"coefficients", coefficients_json(c)},
                 {"rows", rows},
                 {"errors_strictly_decreasing", study.errors_strictly_decreasing}};

  if (!a.csv.empty()) write_atomic(a.csv, table);
  deliver_json(doc, a.output);
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

struct GradcheckArgs {
  int checks = 10;
  double tolerance = 1e-5;
  double h_fd = 1e-6;
  std::uint64_t seed = 2024;
  int wire_segments = 48;
  double film_h = 0.15;
  std::string output;
};

// Worst finite-difference error of a functional over deterministic random fields.
template <typename Functional>
double worst_fd_error(const Functional& f, std::size_t n_nodes, int checks, double h_fd,
                      std::uint64_t seed) {
  const auto starts = standard_starts(n_nodes, 6 + checks, seed);
  double worst = 0;
  for (int k = 0; k < checks; ++k)
    worst = std::max(worst, fd_gradient_check(f, starts[6 + k], h_fd, seed + 101 * k));
  return worst;
}

int run_gradcheck(const GradcheckArgs& a) {
  if (a.checks < 1) throw InvalidArgument("--checks must be at least 1");

  // every energy term is active so the check exercises all gradient paths
  const AnisotropyModel aniso = AnisotropyModel::uniaxial({0.3, -0.2, 0.93}, 0.6);
  auto smooth_field = [](std::size_t n) {
    std::vector<Eigen::Vector3d> f(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = double(j) / double(n - 1);
      f[j] = {0.3 * std::sin(2 * std::numbers::pi * x) + 0.1, -0.2 * std::cos(std::numbers::pi * x),
              0.15 + 0.05 * x};
    }
    return f;
  };

  WireParams wp;
  wp.lambda = 0.7;
  wp.section_area = 2.3;
  wp.alpha = 0.52;
  wp.beta = 0.44;
  wp.gamma = 0.12;
  wp.anisotropy = aniso;
  wp.applied = smooth_field(static_cast<std::size_t>(a.wire_segments) + 1);
  const WireFunctional wire_fn{&wp};
  const double wire_err = worst_fd_error(wire_fn, wp.applied.size(), a.checks, a.h_fd, a.seed);

  const auto mesh = std::make_shared<const Mesh2D>(
      triangulate_section(polygon_from_disc<double>(Eigen::Vector2d::Zero(), 1.0, 48), a.film_h));
  FilmParams fp;
  fp.lambda = 0.8;
  fp.anisotropy = aniso;
  fp.disc = std::make_shared<const FilmDiscretization>(mesh);
  fp.applied.assign(mesh->vertices.size(), {0.2, -0.1, 0.3});
  const FilmFunctional film_fn{&fp};
  const double film_err =
      worst_fd_error(film_fn, mesh->vertices.size(), a.checks, a.h_fd, a.seed + 7);

  WireWireParams pp;
  pp.lambda = 0.9;
  pp.alpha = 0.55;
  pp.beta = 0.4;
  pp.gamma = 0.1;
  pp.anisotropy = aniso;
  pp.applied_a = smooth_field(21);
  pp.applied_b = smooth_field(29);
  const JoinedFunctional joined_fn{&pp, 20, 28};
  const double joined_err = worst_fd_error(joined_fn, 20 + 28 + 1, a.checks, a.h_fd, a.seed + 13);

  const bool pass =
      wire_err <= a.tolerance && film_err <= a.tolerance && joined_err <= a.tolerance;
  const json doc{{"tolerance", a.tolerance},
                 {"checks_per_energy", a.checks},
                 {"wire_max_error", wire_err},
                 {"film_max_error", film_err},
                 {"coupled_max_error", joined_err},
                 {"pass", pass}};
  deliver_json(doc, a.output);
  return pass ? 0 : 3;
}

}  // namespace

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Shape coefficients and limit-energy minimization for thin ferromagnetic "
               "multistructures"};
  app.name("mmag");
  app.require_subcommand(1);

  CoeffsArgs coeffs_args;
  auto* coeffs_cmd = app.add_subcommand(
      "coeffs", "Cross-section shape coefficients via exterior transmission problems");
  coeffs_cmd->add_option("--config", coeffs_args.config, "JSON config path");
  coeffs_cmd->add_option("-o,--output", coeffs_args.output,
                         "result JSON path (stdout when omitted)");
  coeffs_cmd->add_option("--csv", coeffs_args.csv, "per-level raw values CSV path");
  coeffs_cmd->add_flag("--dump-defaults", coeffs_args.dump_defaults,
                       "print a fully populated config template and exit");

  WireFilmArgs wf_args;
  auto* wf_cmd =
      app.add_subcommand("wire-film", "Minimize the uncoupled wire + film limit energy");
  wf_cmd->add_option("--config", wf_args.config, "JSON config path");
  wf_cmd->add_option("-o,--output", wf_args.output, "result JSON path (stdout when omitted)");
  wf_cmd->add_option("--wire-csv", wf_args.wire_csv, "wire profile CSV path");
  wf_cmd->add_option("--film-csv", wf_args.film_csv, "film profile CSV path");
  wf_cmd->add_flag("--dump-defaults", wf_args.dump_defaults,
                   "print a fully populated config template and exit");

  WireWireArgs ww_args;
  auto* ww_cmd =
      app.add_subcommand("wire-wire", "Minimize the junction-coupled two-wire limit energy");
  ww_cmd->add_option("--config", ww_args.config, "JSON config path");
  ww_cmd->add_option("-o,--output", ww_args.output, "result JSON path (stdout when omitted)");
  ww_cmd->add_option("--wire-a-csv", ww_args.wire_a_csv, "first wire profile CSV path");
  ww_cmd->add_option("--wire-b-csv", ww_args.wire_b_csv, "second wire profile CSV path");
  ww_cmd->add_flag("--dump-defaults", ww_args.dump_defaults,
                   "print a fully populated config template and exit");

  Validate3dArgs v3_args;
  auto* v3_cmd = app.add_subcommand(
      "validate3d", "Compare 3D magnetostatic energies on shrinking structures to the limit");
  v3_cmd->add_option("--kind", v3_args.kind, "structure kind")
      ->check(CLI::IsMember({"wire-film", "wire-wire"}))
      ->capture_default_str();
  v3_cmd->add_option("--h-list", v3_args.h_list, "thickness list (descending)")
      ->check(CLI::Range(1e-3, 0.999))
      ->capture_default_str();
  v3_cmd->add_option("--delta-div", v3_args.delta_div, "in-plane spacing rule: delta = h / div")
      ->check(CLI::Range(4.0, 64.0))
      ->capture_default_str();
  v3_cmd->add_option("--box", v3_args.box, "truncation box half-width L")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  v3_cmd->add_option("--tol", v3_args.tol, "linear solver relative residual")
      ->capture_default_str();
  v3_cmd->add_option("--alpha", v3_args.alpha, "limit coefficient alpha")->capture_default_str();
  v3_cmd->add_option("--beta", v3_args.beta, "limit coefficient beta")->capture_default_str();
  v3_cmd->add_option("--gamma", v3_args.gamma, "limit coefficient gamma")->capture_default_str();
  v3_cmd->add_option("--film-layers", v3_args.film_layers, "cells across the film thickness")
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
  v3_cmd->add_option("--ma", v3_args.ma, "first branch magnetization (3 components)")
      ->expected(3);
  v3_cmd->add_option("--mb", v3_args.mb, "second branch magnetization (3 components)")
      ->expected(3);
  v3_cmd->add_option("-o,--output", v3_args.output, "summary JSON path (stdout when omitted)");
  v3_cmd->add_option("--csv", v3_args.csv, "per-thickness table CSV path");

  GradcheckArgs gc_args;
  auto* gc_cmd = app.add_subcommand(
      "gradcheck", "Finite-difference validation of all energy gradients at random fields");
  gc_cmd->add_option("--checks", gc_args.checks, "random fields per energy")
      ->capture_default_str();
  gc_cmd->add_option("--tolerance", gc_args.tolerance, "pass threshold")->capture_default_str();
  gc_cmd->add_option("--h-fd", gc_args.h_fd, "central-difference step")->capture_default_str();
  gc_cmd->add_option("--seed", gc_args.seed, "base seed")->capture_default_str();
  gc_cmd->add_option("--wire-segments", gc_args.wire_segments, "wire grid size")
      ->check(CLI::Range(4, 4096))
      ->capture_default_str();
  gc_cmd->add_option("--film-h", gc_args.film_h, "film mesh target spacing")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc_cmd->add_option("-o,--output", gc_args.output, "report JSON path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error(2, "usage", e.what());
  }

  try {
    if (coeffs_cmd->parsed()) {
      if (!coeffs_args.dump_defaults && coeffs_args.config.empty())
        return emit_error(2, "usage", "coeffs needs --config (or --dump-defaults)");
      return run_coeffs(coeffs_args);
    }
    if (wf_cmd->parsed()) {
      if (!wf_args.dump_defaults && wf_args.config.empty())
        return emit_error(2, "usage", "wire-film needs --config (or --dump-defaults)");
      return run_wire_film(wf_args);
    }
    if (ww_cmd->parsed()) {
      if (!ww_args.dump_defaults && ww_args.config.empty())
        return emit_error(2, "usage", "wire-wire needs --config (or --dump-defaults)");
      return run_wire_wire(ww_args);
    }
    if (v3_cmd->parsed()) return run_validate3d(v3_args);
    if (gc_cmd->parsed()) return run_gradcheck(gc_args);
    return emit_error(2, "usage", "no subcommand given");
  } catch (const BudgetExceeded& e) {
    return emit_error(4, "budget_exceeded", e.what());
  } catch (const SolverFailure& e) {
    return emit_error(3, "solver_failure", e.what());
  } catch (const InvalidArgument& e) {
    return emit_error(2, "invalid_argument", e.what());
  } catch (const InvalidGeometry& e) {
    return emit_error(2, "invalid_geometry", e.what());
  } catch (const InvalidState& e) {
    return emit_error(2, "invalid_state", e.what());
  } catch (const json::exception& e) {
    return emit_error(2, "config_error", e.what());
  } catch (const std::exception& e) {
    return emit_error(3, "runtime_error", e.what());
  }
}

}  // namespace mmag
