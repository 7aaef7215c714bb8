#pragma once
// File formats and hashing shared by the command-line tool and the tests:
//  - binary field files: one line of JSON metadata, then raw little-endian
//    complex64 (float re, float im) samples in storage order;
//  - sinogram CSV: a JSON comment line, a column header, then one
//    (phi, psi, Re, Im) row per inflow node at full double precision;
//  - FNV-1a 64-bit hashing of canonicalized JSON configs, stamped on outputs.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "grt/grid.hpp"
#include "grt/metric.hpp"
#include "grt/sphere_bundle.hpp"

namespace grt::io {

using json = nlohmann::json;

uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t h);
// Hash of the compact serialization (sorted keys, no whitespace).
std::string config_hash(const json& config);

json metric_to_json(const MetricModel& m);
MetricModel metric_from_json(const json& j);

// Binary field files. Caller metadata is merged into the header line; shape,
// radius and (for bundles) the metric are filled in automatically and
// validated on read.
void write_scalar_binary(const std::string& path, const CScalarField& f,
                         json meta = json::object());
CScalarField read_scalar_binary(const std::string& path, json* meta = nullptr);

void write_boundary_binary(const std::string& path, const BoundaryField& f,
                           json meta = json::object());
BoundaryField read_boundary_binary(const std::string& path, json* meta = nullptr);

void write_bundle_binary(const std::string& path, const BundleField& f,
                         json meta = json::object());
BundleField read_bundle_binary(const std::string& path, json* meta = nullptr);

// Sinogram CSV over inflow nodes (phi, psi, Re, Im), "%.17g" columns; the
// boundary grid size and radius ride along in the JSON comment line so the
// full field (zeros on outflow) can be rebuilt on read.
void write_sinogram_csv(const std::string& path, const BoundaryField& f,
                        json meta = json::object());
BoundaryField read_sinogram_csv(const std::string& path, json* meta = nullptr);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

}  // namespace grt::io
