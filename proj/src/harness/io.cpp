#include "kinfluid/harness/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace kinfluid::harness {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "state files are written as native little-endian float64");

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  if (res.ec != std::errc()) throw IoError("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("cannot parse number '" + s + "'");
  return x;
}

void write_state(const std::string& stem, const StateArrays& arrays, const json& metadata) {
  json desc;
  desc["format"] = "kinfluid-state";
  desc["dtype"] = "float64";
  desc["byte_order"] = "little";
  desc["layout"] = "column-major";
  desc["metadata"] = metadata;
  json fields = json::array();
  std::ofstream bin = open_out(stem + ".bin", std::ios::out | std::ios::binary);
  std::uint64_t offset = 0;
  for (const auto& [name, a] : arrays) {
    fields.push_back({{"name", name}, {"rows", a.rows()}, {"cols", a.cols()}, {"offset", offset}});
    bin.write(reinterpret_cast<const char*>(a.data()),
              static_cast<std::streamsize>(a.size() * sizeof(double)));
    offset += static_cast<std::uint64_t>(a.size() * sizeof(double));
  }
  if (!bin) throw IoError("failed writing '" + stem + ".bin'");
  desc["fields"] = fields;
  desc["bytes"] = offset;
  write_json(desc, stem + ".json");
}

StateArrays read_state(const std::string& stem, json* metadata) {
  const json desc = read_json(stem + ".json");
  if (desc.value("format", "") != "kinfluid-state" || desc.value("dtype", "") != "float64")
    throw IoError("'" + stem + ".json' is not a float64 state descriptor");
  std::ifstream bin = open_in(stem + ".bin", std::ios::in | std::ios::binary);
  bin.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uint64_t>(bin.tellg());
  if (bytes != desc.at("bytes").get<std::uint64_t>())
    throw IoError("'" + stem + ".bin' size does not match its descriptor");
  StateArrays out;
  for (const auto& f : desc.at("fields")) {
    const Index rows = f.at("rows").get<Index>(), cols = f.at("cols").get<Index>();
    const auto offset = f.at("offset").get<std::uint64_t>();
    if (offset + static_cast<std::uint64_t>(rows * cols) * sizeof(double) > bytes)
      throw IoError("field '" + f.at("name").get<std::string>() + "' runs past the end of the data");
    PhaseFieldD a(rows, cols);
    bin.seekg(static_cast<std::streamoff>(offset));
    bin.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
    if (!bin) throw IoError("failed reading '" + stem + ".bin'");
    out.emplace(f.at("name").get<std::string>(), std::move(a));
  }
  if (metadata) *metadata = desc.value("metadata", json::object());
  return out;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& path) {
  std::ofstream out = open_out(path);
  out << convergence_header() << '\n';
  for (const auto& r : rows)
    out << format_double(r.eps) << ',' << format_double(r.sup_H) << ','
        << format_double(r.sup_L1_rho) << ',' << format_double(r.sup_L1_n) << ','
        << format_double(r.f_to_M_l1) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<ConvergenceRow> read_convergence_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != convergence_header())
    throw IoError("'" + path + "' does not start with the convergence header");
  std::vector<ConvergenceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 5) throw IoError("'" + path + "': expected 5 columns");
    rows.push_back({parse_double(c[0]), parse_double(c[1]), parse_double(c[2]),
                    parse_double(c[3]), parse_double(c[4])});
  }
  return rows;
}

namespace {
constexpr const char* kEntropyHeader =
    "t,F,D1,D2,E,H,P_f_M,rel_flux_l1,grad_v_sq,drag_part,rho_u_v_sq,mass";
}

void write_entropy_series_csv(const std::vector<EntropyReportD>& series, const std::string& path) {
  std::ofstream out = open_out(path);
  out << kEntropyHeader << '\n';
  for (const auto& r : series) {
    const double v[] = {r.t, r.F, r.D1, r.D2, r.E, r.H, r.P_f_M, r.rel_flux_l1,
                        r.grad_v_sq, r.drag_part, r.rho_u_v_sq, r.mass};
    for (std::size_t i = 0; i < std::size(v); ++i) out << (i ? "," : "") << format_double(v[i]);
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<EntropyReportD> read_entropy_series_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != kEntropyHeader)
    throw IoError("'" + path + "' does not start with the entropy series header");
  std::vector<EntropyReportD> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 12) throw IoError("'" + path + "': expected 12 columns");
    EntropyReportD r;
    double* dst[] = {&r.t, &r.F, &r.D1, &r.D2, &r.E, &r.H, &r.P_f_M, &r.rel_flux_l1,
                     &r.grad_v_sq, &r.drag_part, &r.rho_u_v_sq, &r.mass};
    for (std::size_t i = 0; i < 12; ++i) *dst[i] = parse_double(c[i]);
    out.push_back(r);
  }
  return out;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

json read_json(const std::string& path) {
  std::ifstream in = open_in(path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace kinfluid::harness
