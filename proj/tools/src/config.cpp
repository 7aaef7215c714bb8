#include "config.hpp"

#include <cmath>
#include <set>

namespace grt::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw error(errc::config, "config " + path + ": " + msg);
}

void check_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(path + "/" + it.key(), "unknown key");
}

double get_num(const json& j, const std::string& path, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) fail(path + "/" + key, "expected a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, int dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer()) fail(path + "/" + key, "expected an integer");
  return j.at(key).get<int>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_boolean()) fail(path + "/" + key, "expected a boolean");
  return j.at(key).get<bool>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_string()) fail(path + "/" + key, "expected a string");
  return j.at(key).get<std::string>();
}

PhantomTerm parse_term(const json& j, const std::string& path, bool interior_support) {
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path,
             {"kind", "cx", "cy", "width", "amplitude", "amplitude_im", "cutoff", "power"});
  PhantomTerm t;
  std::string kind = get_str(j, path, "kind", "gaussian");
  if (kind == "gaussian")
    t.kind = PhantomTerm::Kind::Gaussian;
  else if (kind == "bump")
    t.kind = PhantomTerm::Kind::Bump;
  else
    fail(path + "/kind", "expected \"gaussian\" or \"bump\"");
  t.cx = get_num(j, path, "cx", t.cx);
  t.cy = get_num(j, path, "cy", t.cy);
  t.width = get_num(j, path, "width", t.width);
  t.amplitude = get_num(j, path, "amplitude", t.amplitude);
  t.amplitude_im = get_num(j, path, "amplitude_im", t.amplitude_im);
  t.cutoff = get_num(j, path, "cutoff", t.cutoff);
  t.power = get_int(j, path, "power", t.power);
  if (t.width <= 0.0) fail(path + "/width", "must be positive");
  if (t.power < 1) fail(path + "/power", "must be >= 1");
  if (interior_support) {
    // Sources must vanish strictly inside the rim (unit-disc units here;
    // everything scales with the metric radius when rendered).
    if (t.cutoff <= 0.0 && t.kind == PhantomTerm::Kind::Gaussian)
      fail(path + "/cutoff", "source terms need a positive support cutoff");
    double support = t.cutoff > 0.0 ? t.cutoff : std::hypot(t.cx, t.cy) + t.width;
    if (support > 0.95)
      fail(path, "support must stay inside 0.95 of the radius (got " +
                     std::to_string(support) + ")");
    if (std::hypot(t.cx, t.cy) >= std::max(t.cutoff, 0.95))
      fail(path, "center lies outside the support cutoff");
  }
  return t;
}

std::vector<PhantomTerm> parse_terms(const json& j, const std::string& path,
                                     bool interior_support) {
  if (!j.is_array()) fail(path, "expected an array of terms");
  std::vector<PhantomTerm> out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_term(j[i], path + "/" + std::to_string(i), interior_support));
  return out;
}

json term_to_json(const PhantomTerm& t) {
  return json{{"kind", t.kind == PhantomTerm::Kind::Gaussian ? "gaussian" : "bump"},
              {"cx", t.cx},
              {"cy", t.cy},
              {"width", t.width},
              {"amplitude", t.amplitude},
              {"amplitude_im", t.amplitude_im},
              {"cutoff", t.cutoff},
              {"power", t.power}};
}

const char* backend_name(I0Backend b) {
  switch (b) {
    case I0Backend::ExplicitCC: return "explicit_cc";
    case I0Backend::FredholmW2: return "fredholm_w2";
    case I0Backend::LeastSquares: return "least_squares";
  }
  return "least_squares";
}

}  // namespace

I0Backend backend_from_string(const std::string& s) {
  if (s == "explicit_cc" || s == "ExplicitCC") return I0Backend::ExplicitCC;
  if (s == "fredholm_w2" || s == "FredholmW2") return I0Backend::FredholmW2;
  if (s == "least_squares" || s == "LeastSquares") return I0Backend::LeastSquares;
  throw error(errc::config,
              "unknown backend \"" + s +
                  "\" (expected explicit_cc, fredholm_w2 or least_squares)");
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw error(errc::config, "config root must be an object");
  check_keys(j, "", {"metric", "attenuation", "phantom", "grid", "solver", "trace", "seed",
                     "outputs"});
  RunConfig c;

  if (j.contains("metric")) c.metric = io::metric_from_json(j.at("metric"));

  if (j.contains("attenuation")) {
    const json& ja = j.at("attenuation");
    if (!ja.is_object()) fail("/attenuation", "expected an object");
    check_keys(ja, "/attenuation", {"constant", "terms"});
    c.attenuation_constant = get_num(ja, "/attenuation", "constant", 0.0);
    if (ja.contains("terms"))
      c.attenuation_terms = parse_terms(ja.at("terms"), "/attenuation/terms", false);
  }

  if (j.contains("phantom")) {
    const json& jp = j.at("phantom");
    if (!jp.is_object()) fail("/phantom", "expected an object");
    check_keys(jp, "/phantom", {"terms", "gauge_potential"});
    if (jp.contains("terms") && jp.contains("gauge_potential"))
      fail("/phantom", "terms and gauge_potential are exclusive");
    if (jp.contains("terms"))
      c.phantom_terms = parse_terms(jp.at("terms"), "/phantom/terms", true);
    if (jp.contains("gauge_potential")) {
      c.gauge_mode = true;
      const json& jg = jp.at("gauge_potential");
      if (!jg.is_object()) fail("/phantom/gauge_potential", "expected an object");
      check_keys(jg, "/phantom/gauge_potential", {"polynomial", "terms"});
      c.gauge_polynomial_scale = get_num(jg, "/phantom/gauge_potential", "polynomial", 0.0);
      if (jg.contains("terms"))
        c.potential_terms =
            parse_terms(jg.at("terms"), "/phantom/gauge_potential/terms", true);
      if (c.gauge_polynomial_scale == 0.0 && c.potential_terms.empty())
        fail("/phantom/gauge_potential", "needs polynomial scale or terms");
    }
  }

  if (j.contains("grid")) {
    const json& jg = j.at("grid");
    if (!jg.is_object()) fail("/grid", "expected an object");
    check_keys(jg, "/grid", {"nx", "nboundary", "ntheta"});
    c.nx = get_int(jg, "/grid", "nx", c.nx);
    c.nboundary = get_int(jg, "/grid", "nboundary", c.nboundary);
    c.ntheta = get_int(jg, "/grid", "ntheta", c.ntheta);
    if (c.nx < 9) fail("/grid/nx", "must be at least 9");
    if (c.nboundary < 8 || (c.nboundary & (c.nboundary - 1)))
      fail("/grid/nboundary", "must be a power of two >= 8");
    if (c.ntheta != 0 && (c.ntheta < 8 || (c.ntheta & (c.ntheta - 1))))
      fail("/grid/ntheta", "must be 0 or a power of two >= 8");
  }

  if (j.contains("solver")) {
    const json& js = j.at("solver");
    if (!js.is_object()) fail("/solver", "expected an object");
    check_keys(js, "/solver",
               {"backend", "real_valued", "cgls_tol", "cgls_max_iterations", "neumann_tol",
                "neumann_max_terms"});
    if (js.contains("backend"))
      c.backend = backend_from_string(get_str(js, "/solver", "backend", ""));
    c.real_valued = get_bool(js, "/solver", "real_valued", c.real_valued);
    c.cgls_tol = get_num(js, "/solver", "cgls_tol", c.cgls_tol);
    c.cgls_max_iterations = get_int(js, "/solver", "cgls_max_iterations",
                                    c.cgls_max_iterations);
    c.neumann_tol = get_num(js, "/solver", "neumann_tol", c.neumann_tol);
    c.neumann_max_terms = get_int(js, "/solver", "neumann_max_terms", c.neumann_max_terms);
  }

  if (j.contains("trace")) {
    const json& jt = j.at("trace");
    if (!jt.is_object()) fail("/trace", "expected an object");
    check_keys(jt, "/trace", {"step", "tol_boundary", "max_steps"});
    c.trace.step = get_num(jt, "/trace", "step", c.trace.step);
    c.trace.tol_boundary = get_num(jt, "/trace", "tol_boundary", c.trace.tol_boundary);
    c.trace.max_steps = get_int(jt, "/trace", "max_steps", c.trace.max_steps);
    if (c.trace.step <= 0.0) fail("/trace/step", "must be positive");
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      fail("/seed", "expected an integer");
    c.seed = j.at("seed").get<uint64_t>();
  }

  if (j.contains("outputs")) {
    const json& jo = j.at("outputs");
    if (!jo.is_object()) fail("/outputs", "expected an object");
    check_keys(jo, "/outputs", {"prefix"});
    c.prefix = get_str(jo, "/outputs", "prefix", c.prefix);
  }
  return c;
}

RunConfig load_config_file(const std::string& path) {
  return parse_config(io::read_json_file(path));
}

json RunConfig::resolved() const {
  json ja{{"constant", attenuation_constant}, {"terms", json::array()}};
  for (const auto& t : attenuation_terms) ja["terms"].push_back(term_to_json(t));
  json jp;
  if (gauge_mode) {
    json jg{{"polynomial", gauge_polynomial_scale}, {"terms", json::array()}};
    for (const auto& t : potential_terms) jg["terms"].push_back(term_to_json(t));
    jp = json{{"gauge_potential", jg}};
  } else {
    jp = json{{"terms", json::array()}};
    for (const auto& t : phantom_terms) jp["terms"].push_back(term_to_json(t));
  }
  return json{
      {"metric", io::metric_to_json(metric)},
      {"attenuation", ja},
      {"phantom", jp},
      {"grid", {{"nx", nx}, {"nboundary", nboundary}, {"ntheta", ntheta}}},
      {"solver",
       {{"backend", backend_name(backend)},
        {"real_valued", real_valued},
        {"cgls_tol", cgls_tol},
        {"cgls_max_iterations", cgls_max_iterations},
        {"neumann_tol", neumann_tol},
        {"neumann_max_terms", neumann_max_terms}}},
      {"trace",
       {{"step", trace.step},
        {"tol_boundary", trace.tol_boundary},
        {"max_steps", trace.max_steps}}},
      {"seed", seed},
      {"outputs", {{"prefix", prefix}}}};
}

std::string RunConfig::hash() const { return io::config_hash(resolved()); }

CScalarField RunConfig::attenuation_field(const SpatialGrid& g) const {
  CScalarField a = render_phantom(attenuation_terms, g);
  if (attenuation_constant != 0.0) {
    auto mask = inside_mask(g);
    for (int s = 0; s < g.size(); ++s)
      if (mask[s]) a.v[s] += attenuation_constant;
  }
  return a;
}

CScalarField RunConfig::phantom_field(const SpatialGrid& g) const {
  return render_phantom(gauge_mode ? std::vector<PhantomTerm>{} : phantom_terms, g);
}

CScalarField RunConfig::potential_field(const SpatialGrid& g) const {
  CScalarField p = render_phantom(potential_terms, g);
  if (gauge_polynomial_scale != 0.0) {
    CScalarField q = polynomial_potential(g, gauge_polynomial_scale);
    for (size_t i = 0; i < p.v.size(); ++i) p.v[i] += q.v[i];
  }
  return p;
}

PairField RunConfig::source_pair(const SpatialGrid& g) const {
  if (!gauge_mode) return PairField{phantom_field(g), {}};
  CScalarField a = attenuation_field(g);
  CScalarField p = potential_field(g);
  if (potential_terms.empty()) {
    // Pure polynomial potential: use its closed-form differential.
    return gauge_pair(a, p, polynomial_potential_differential(g, gauge_polynomial_scale));
  }
  return gauge_pair(a, p);
}

ReconstructionConfig RunConfig::reconstruction_config() const {
  ReconstructionConfig rc;
  rc.i0_backend = backend;
  rc.real_valued = real_valued;
  rc.ntheta = ntheta;
  rc.cgls_tol = cgls_tol;
  rc.cgls_max_iterations = cgls_max_iterations;
  rc.neumann_tol = neumann_tol;
  rc.neumann_max_terms = neumann_max_terms;
  rc.trace = trace;
  return rc;
}

}  // namespace grt::cli
