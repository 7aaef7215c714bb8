#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "grt/holomorphic.hpp"
#include "grt/inversion.hpp"
#include "grt/testing.hpp"
#include "grt/transport.hpp"

namespace grt::cli {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string out_path(const Options& o, const std::string& suffix) {
  fs::create_directories(o.out_dir);
  return (fs::path(o.out_dir) / (o.config.prefix + suffix)).string();
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::io, "cannot read back " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return io::hex64(io::fnv1a64(bytes));
}

json file_entry(const std::string& path) {
  return json{{"path", path}, {"fnv1a64", file_checksum(path)}};
}

// Relative metric-weighted L2 distance; zero truth reports the absolute norm.
double rel_l2(const MetricModel& m, const CScalarField& got, const CScalarField& truth) {
  CScalarField diff = got;
  for (size_t i = 0; i < diff.v.size(); ++i) diff.v[i] -= truth.v[i];
  double denom = scalar_norm(m, truth);
  double num = scalar_norm(m, diff);
  return denom > 0 ? num / denom : num;
}

}  // namespace

int cmd_forward(const Options& o) {
  const RunConfig& c = o.config;
  const MetricModel& m = c.metric;
  SpatialGrid g = c.spatial_grid();
  BoundaryGrid bg = c.boundary_grid();

  auto t0 = std::chrono::steady_clock::now();
  PairField src = c.source_pair(g);
  CScalarField a = c.attenuation_field(g);
  double t_fields = seconds_since(t0);

  auto t1 = std::chrono::steady_clock::now();
  BoundaryField sino =
      forward_attenuated(m, c.has_attenuation() ? &a : nullptr, src, bg, c.trace);
  double t_forward = seconds_since(t1);

  json stamp{{"config_hash", c.hash()}};
  std::string csv = out_path(o, "_sinogram.csv");
  std::string bin = out_path(o, "_sinogram.bin");
  io::write_sinogram_csv(csv, sino, stamp);
  io::write_boundary_binary(bin, sino, stamp);

  json meta{{"command", "forward"},
            {"config", c.resolved()},
            {"config_hash", c.hash()},
            {"threads", o.threads},
            {"files",
             {{"sinogram_csv", file_entry(csv)}, {"sinogram_bin", file_entry(bin)}}},
            {"timings", {{"fields_seconds", t_fields}, {"forward_seconds", t_forward}}},
            {"sinogram_norm", l2_norm_inflow(sino, m)}};
  std::string meta_path = out_path(o, "_meta.json");
  io::write_json_file(meta_path, meta);

  std::printf("forward: wrote %s, %s, %s (|data| = %.6e, %.2fs)\n", csv.c_str(),
              bin.c_str(), meta_path.c_str(), l2_norm_inflow(sino, m), t_forward);
  return 0;
}

int cmd_reconstruct(const Options& o) {
  const RunConfig& c = o.config;
  const MetricModel& m = c.metric;
  SpatialGrid g = c.spatial_grid();

  std::string input = o.input;
  if (input.empty()) {
    input = out_path(o, "_sinogram.bin");
    if (!fs::exists(input)) input = out_path(o, "_sinogram.csv");
  }
  json sino_meta;
  bool is_csv = input.size() >= 4 && input.substr(input.size() - 4) == ".csv";
  BoundaryField sino = is_csv ? io::read_sinogram_csv(input, &sino_meta)
                              : io::read_boundary_binary(input, &sino_meta);

  if (sino_meta.contains("config_hash") &&
      sino_meta.at("config_hash").get<std::string>() != c.hash() && !o.force) {
    throw error(errc::mismatch, "sinogram " + input + " was produced by config " +
                                    sino_meta.at("config_hash").get<std::string>() +
                                    ", this run resolves to " + c.hash() +
                                    " (pass --force to reconstruct anyway)");
  }
  if (sino.bgrid.n != c.nboundary)
    throw error(errc::mismatch, "sinogram boundary grid " +
                                    std::to_string(sino.bgrid.n) +
                                    " does not match configured " +
                                    std::to_string(c.nboundary));

  CScalarField a = c.attenuation_field(g);
  auto t0 = std::chrono::steady_clock::now();
  ReconstructionResult res = reconstruct_attenuated(m, a, sino, c.reconstruction_config());
  double t_recon = seconds_since(t0);
  const ReconstructionDiagnostics& d = res.diagnostics;

  json stamp{{"config_hash", c.hash()}};
  std::string recon_bin = out_path(o, "_recon.bin");
  io::write_scalar_binary(recon_bin, res.f, stamp);

  json report{
      {"command", "reconstruct"},
      {"config", c.resolved()},
      {"config_hash", c.hash()},
      {"threads", o.threads},
      {"backend", to_string(c.backend)},
      {"input", input},
      {"iterations",
       {{"cgls", d.cgls_iterations}, {"factor_terms", d.factor_terms}}},
      {"per_step_residuals",
       {{"cgls_normal_residual", d.cgls_normal_residual},
        {"cgls_data_residual", d.cgls_data_residual},
        {"uhat_mean_norm", d.uhat_mean_norm},
        {"q_angular_spread", d.q_angular_spread},
        {"interpolation_clamps", d.interpolation_clamps}}},
      {"holomorphicity_reports",
       json::array({json{{"stage", "integrating_factor"},
                         {"wrong_frequency", d.factor_wrong_frequency}},
                    json{{"stage", "solution_part"},
                         {"wrong_frequency", d.v_wrong_frequency}}})},
      {"timings", {{"reconstruct_seconds", t_recon}}},
      {"files", {{"recon_bin", file_entry(recon_bin)}}}};

  // Midline profile for plotting; the true phantom rides along when the
  // config embeds one, together with the relative error it implies.
  bool truth_known = !c.gauge_mode && !c.phantom_terms.empty();
  CScalarField truth = truth_known ? c.phantom_field(g) : CScalarField(g);
  if (truth_known) report["rel_l2_error"] = rel_l2(m, res.f, truth);

  std::string profile = out_path(o, "_profile.csv");
  {
    std::ofstream out(profile);
    if (!out) throw error(errc::io, "cannot write " + profile);
    out << "# config_hash=" << c.hash() << "\n";
    out << (truth_known ? "x,recon_re,recon_im,true_re,true_im\n"
                        : "x,recon_re,recon_im\n");
    int jmid = g.ny / 2;
    char line[256];
    for (int i = 0; i < g.nx; ++i) {
      cplx r = res.f(i, jmid);
      if (truth_known) {
        cplx t = truth(i, jmid);
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.x(i),
                      r.real(), r.imag(), t.real(), t.imag());
      } else {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", g.x(i), r.real(),
                      r.imag());
      }
      out << line;
    }
  }
  report["files"]["profile_csv"] = file_entry(profile);

  std::string report_path = out_path(o, "_report.json");
  io::write_json_file(report_path, report);

  if (truth_known)
    std::printf("reconstruct: backend=%s rel_l2_error=%.4f (%.2fs) -> %s\n",
                to_string(c.backend), report["rel_l2_error"].get<double>(), t_recon,
                recon_bin.c_str());
  else
    std::printf("reconstruct: backend=%s |f| = %.6e (%.2fs) -> %s\n",
                to_string(c.backend), scalar_norm(m, res.f), t_recon,
                recon_bin.c_str());
  return 0;
}

int cmd_factors(const Options& o) {
  const RunConfig& c = o.config;
  const MetricModel& m = c.metric;
  SpatialGrid g = c.spatial_grid();
  int nt = c.fiber_count();

  CScalarField a = c.attenuation_field(g);
  json stamp{{"config_hash", c.hash()}};
  json report{{"command", "factors"},
              {"config", c.resolved()},
              {"config_hash", c.hash()},
              {"threads", o.threads},
              {"signs", json::array()}};

  auto t0 = std::chrono::steady_clock::now();
  SMRayTable rays = build_sm_ray_table(m, g, nt, c.trace);
  report["timings"] = {{"ray_table_seconds", seconds_since(t0)}};

  for (int sign : {+1, -1}) {
    auto t1 = std::chrono::steady_clock::now();
    FactorResult fr = integrating_factor(m, a, sign, nt, c.trace);
    double t_factor = seconds_since(t1);
    double resid = factor_residual(m, fr.w, a, &rays, 0.9, c.trace);
    double wrong = holomorphicity_report(fr.w, sign, 0.9);

    std::string path =
        out_path(o, sign > 0 ? "_factor_plus.bin" : "_factor_minus.bin");
    json meta = stamp;
    meta["sign"] = sign;
    io::write_bundle_binary(path, fr.w, meta);

    report["signs"].push_back(json{{"sign", sign},
                                   {"terms", fr.terms},
                                   {"increments", fr.increments},
                                   {"transport_residual", resid},
                                   {"wrong_frequency", wrong},
                                   {"seconds", t_factor},
                                   {"file", file_entry(path)}});
    std::printf("factors: sign=%+d terms=%d residual=%.3e wrong_freq=%.3e -> %s\n",
                sign, fr.terms, resid, wrong, path.c_str());
  }

  std::string report_path = out_path(o, "_factors_report.json");
  io::write_json_file(report_path, report);
  return 0;
}

int cmd_adjoint_check(const Options& o) {
  const RunConfig& c = o.config;
  const MetricModel& m = c.metric;
  SpatialGrid g = c.spatial_grid();
  BoundaryGrid bg = c.boundary_grid();
  int nt = c.fiber_count();
  const double threshold = 1e-3;

  SMRayTable rays = build_sm_ray_table(m, g, nt, c.trace);
  BundleField ones(g, nt, m);
  for (auto& z : ones.v) z = 1.0;

  json report{{"command", "adjoint-check"},
              {"config", c.resolved()},
              {"config_hash", c.hash()},
              {"threads", o.threads},
              {"threshold", threshold},
              {"pairs", json::array()}};

  int failures = 0;
  for (int trial = 0; trial < 10; ++trial) {
    uint64_t seed = c.seed + 1000 * trial;
    PairField F = testing::random_pair(g, seed);
    BoundaryField h = testing::random_inflow_data(bg, seed + 17);

    BoundaryField IF = forward_attenuated(m, nullptr, F, bg, c.trace);
    PairField back = adjoint_weighted(m, ones, h, g, &rays, c.trace);

    cplx lhs = inflow_inner_product(m, IF, h);
    cplx rhs = pair_inner_product(m, F, back);
    double scale = std::max(std::abs(lhs), std::abs(rhs));
    double defect = scale > 0 ? std::abs(lhs - rhs) / scale : 0.0;
    bool ok = defect <= threshold;
    failures += !ok;

    report["pairs"].push_back(json{{"seed", seed},
                                   {"lhs_re", lhs.real()},
                                   {"lhs_im", lhs.imag()},
                                   {"rhs_re", rhs.real()},
                                   {"rhs_im", rhs.imag()},
                                   {"defect", defect},
                                   {"pass", ok}});
    std::printf("adjoint pair %d: defect=%.3e %s\n", trial, defect,
                ok ? "pass" : "FAIL");
  }
  report["failures"] = failures;

  std::string report_path = out_path(o, "_adjoint_report.json");
  io::write_json_file(report_path, report);
  std::printf("adjoint-check: %d/10 pairs within %.0e -> %s\n", 10 - failures,
              threshold, report_path.c_str());
  return failures == 0 ? 0 : 1;
}

}  // namespace grt::cli
