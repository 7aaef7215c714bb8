#include "grt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace grt::io {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw error(errc::io, msg);
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  require(os.good(), "cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  require(is.good(), "cannot open for reading: " + path);
  return is;
}

void write_samples(std::ofstream& os, const std::vector<cplx>& v) {
  static_assert(sizeof(float) == 4);
  std::vector<float> buf(v.size() * 2);
  for (size_t i = 0; i < v.size(); ++i) {
    buf[2 * i] = (float)v[i].real();
    buf[2 * i + 1] = (float)v[i].imag();
  }
  os.write(reinterpret_cast<const char*>(buf.data()),
           (std::streamsize)(buf.size() * sizeof(float)));
}

std::vector<cplx> read_samples(std::ifstream& is, size_t count, const std::string& path) {
  std::vector<float> buf(count * 2);
  is.read(reinterpret_cast<char*>(buf.data()), (std::streamsize)(buf.size() * sizeof(float)));
  require((size_t)is.gcount() == buf.size() * sizeof(float), "truncated field file: " + path);
  std::vector<cplx> v(count);
  for (size_t i = 0; i < count; ++i) v[i] = cplx{buf[2 * i], buf[2 * i + 1]};
  return v;
}

json read_header(std::ifstream& is, const std::string& path, const char* kind) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "missing header line: " + path);
  json h = json::parse(line, nullptr, false);
  require(!h.is_discarded(), "malformed header line: " + path);
  require(h.value("format", "") == "grt-field", "not a field file: " + path);
  require(h.value("kind", "") == kind,
          std::string("expected a ") + kind + " field file: " + path);
  return h;
}

void emit(std::ofstream& os, const json& header, const std::vector<cplx>& v) {
  os << header.dump() << '\n';
  write_samples(os, v);
  require(os.good(), "write failed");
}

}  // namespace

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

std::string config_hash(const json& config) { return hex64(fnv1a64(config.dump())); }

json metric_to_json(const MetricModel& m) {
  json j;
  switch (m.kind()) {
    case MetricKind::Euclidean:
      j["kind"] = "euclidean";
      break;
    case MetricKind::ConstantCurvature:
      j["kind"] = "constant_curvature";
      j["kappa"] = m.kappa();
      break;
    case MetricKind::Perturbed:
      j["kind"] = "perturbed";
      j["kappa"] = m.kappa();
      j["epsilon"] = m.epsilon();
      j["bump"] = {{"cx", m.bump().cx},
                   {"cy", m.bump().cy},
                   {"sigma", m.bump().sigma},
                   {"amplitude", m.bump().amplitude}};
      break;
  }
  j["radius"] = m.radius();
  return j;
}

MetricModel metric_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw error(errc::config, "metric spec must be an object with a \"kind\"");
  std::string kind = j.at("kind").get<std::string>();
  double radius = j.value("radius", 1.0);
  if (kind == "euclidean") return MetricModel::euclidean(radius);
  if (kind == "constant_curvature")
    return MetricModel::constant_curvature(j.value("kappa", 0.0), radius);
  if (kind == "perturbed") {
    BumpSpec b;
    if (j.contains("bump")) {
      const json& jb = j.at("bump");
      b.cx = jb.value("cx", b.cx);
      b.cy = jb.value("cy", b.cy);
      b.sigma = jb.value("sigma", b.sigma);
      b.amplitude = jb.value("amplitude", b.amplitude);
    }
    return MetricModel::perturbed(j.value("kappa", 0.0), radius, j.value("epsilon", 0.0), b);
  }
  throw error(errc::config, "unknown metric kind: " + kind);
}

void write_scalar_binary(const std::string& path, const CScalarField& f, json meta) {
  meta["format"] = "grt-field";
  meta["kind"] = "scalar";
  meta["shape"] = {f.grid.nx, f.grid.ny};
  meta["radius"] = f.grid.radius;
  auto os = open_out(path, true);
  emit(os, meta, f.v);
}

CScalarField read_scalar_binary(const std::string& path, json* meta) {
  auto is = open_in(path, true);
  json h = read_header(is, path, "scalar");
  auto shape = h.at("shape");
  SpatialGrid g(shape.at(0).get<int>(), shape.at(1).get<int>(), h.at("radius").get<double>());
  CScalarField f(g);
  f.v = read_samples(is, g.size(), path);
  if (meta) *meta = std::move(h);
  return f;
}

void write_boundary_binary(const std::string& path, const BoundaryField& f, json meta) {
  meta["format"] = "grt-field";
  meta["kind"] = "boundary";
  meta["shape"] = {f.bgrid.n, f.bgrid.n};
  meta["radius"] = f.bgrid.radius;
  auto os = open_out(path, true);
  emit(os, meta, f.v);
}

BoundaryField read_boundary_binary(const std::string& path, json* meta) {
  auto is = open_in(path, true);
  json h = read_header(is, path, "boundary");
  BoundaryGrid bg(h.at("shape").at(0).get<int>(), h.at("radius").get<double>());
  BoundaryField f(bg);
  f.v = read_samples(is, bg.size(), path);
  if (meta) *meta = std::move(h);
  return f;
}

void write_bundle_binary(const std::string& path, const BundleField& f, json meta) {
  meta["format"] = "grt-field";
  meta["kind"] = "bundle";
  meta["shape"] = {f.grid.nx, f.grid.ny, f.ntheta};
  meta["radius"] = f.grid.radius;
  meta["metric"] = metric_to_json(f.metric);
  auto os = open_out(path, true);
  emit(os, meta, f.v);
}

BundleField read_bundle_binary(const std::string& path, json* meta) {
  auto is = open_in(path, true);
  json h = read_header(is, path, "bundle");
  auto shape = h.at("shape");
  SpatialGrid g(shape.at(0).get<int>(), shape.at(1).get<int>(), h.at("radius").get<double>());
  MetricModel m = metric_from_json(h.at("metric"));
  BundleField f(g, shape.at(2).get<int>(), m);
  f.v = read_samples(is, f.v.size(), path);
  if (meta) *meta = std::move(h);
  return f;
}

void write_sinogram_csv(const std::string& path, const BoundaryField& f, json meta) {
  meta["n"] = f.bgrid.n;
  meta["radius"] = f.bgrid.radius;
  auto os = open_out(path, false);
  os << "# " << meta.dump() << '\n';
  os << "phi,psi,re,im\n";
  char buf[160];
  const BoundaryGrid& bg = f.bgrid;
  for (int j = 0; j < bg.n; ++j)
    for (int k = 0; k < bg.n; ++k) {
      if (!bg.inflow(j, k)) continue;
      cplx z = f.at(j, k);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", bg.phi(j), bg.psi(j, k),
                    z.real(), z.imag());
      os << buf;
    }
  require(os.good(), "write failed: " + path);
}

BoundaryField read_sinogram_csv(const std::string& path, json* meta) {
  auto is = open_in(path, false);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)) && line.size() > 2 && line[0] == '#',
          "missing sinogram metadata line: " + path);
  json h = json::parse(line.substr(1), nullptr, false);
  require(!h.is_discarded(), "malformed sinogram metadata: " + path);
  BoundaryGrid bg(h.at("n").get<int>(), h.at("radius").get<double>());
  BoundaryField f(bg);
  require(static_cast<bool>(std::getline(is, line)), "missing column header: " + path);
  // Row order matches the writer (j outer, k inner, inflow only); values are
  // re-binned by their (phi, psi) coordinates so reordered files also load.
  double dphi = bg.dphi();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double phi, psi, re, im;
    require(std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg", &phi, &psi, &re, &im) == 4,
            "malformed sinogram row: " + line);
    int j = (int)std::lround(phi / dphi);
    int mm = (int)std::lround((psi + pi) / dphi);
    j = ((j % bg.n) + bg.n) % bg.n;
    int k = (j + mm) % bg.n;
    require(bg.inflow(j, k), "sinogram row is not an inflow node: " + line);
    f.at(j, k) = cplx{re, im};
  }
  if (meta) *meta = std::move(h);
  return f;
}

void write_json_file(const std::string& path, const json& j) {
  auto os = open_out(path, false);
  os << j.dump(2) << '\n';
  require(os.good(), "write failed: " + path);
}

json read_json_file(const std::string& path) {
  auto is = open_in(path, false);
  std::stringstream ss;
  ss << is.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  require(!j.is_discarded(), "malformed JSON: " + path);
  return j;
}

}  // namespace grt::io
