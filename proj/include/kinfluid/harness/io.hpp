#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinfluid/core.hpp"
#include "kinfluid/entropy.hpp"

namespace kinfluid::harness {

// Named column-major double arrays; a Field is stored as rows x 1.
using StateArrays = std::map<std::string, PhaseFieldD>;

// Writes <stem>.bin (raw little-endian float64, arrays back to back in name
// order) and <stem>.json (shapes, offsets and the extra metadata).
void write_state(const std::string& stem, const StateArrays& arrays,
                 const nlohmann::json& metadata = nlohmann::json::object());
StateArrays read_state(const std::string& stem, nlohmann::json* metadata = nullptr);

// Shortest round-trip safe text: 17 significant digits, '.' decimal point.
std::string format_double(double x);
double parse_double(const std::string& s);

struct ConvergenceRow {
  double eps = 0;
  double sup_H = 0;
  double sup_L1_rho = 0;
  double sup_L1_n = 0;
  double f_to_M_l1 = 0;
};

inline const char* convergence_header() { return "eps,sup_H,sup_L1_rho,sup_L1_n,f_to_M_l1"; }

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& path);
std::vector<ConvergenceRow> read_convergence_csv(const std::string& path);

void write_entropy_series_csv(const std::vector<EntropyReportD>& series, const std::string& path);
std::vector<EntropyReportD> read_entropy_series_csv(const std::string& path);

void write_json(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

void ensure_directory(const std::string& dir);

}  // namespace kinfluid::harness
