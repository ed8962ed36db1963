#ifndef CAVTOOL_IO_HPP
#define CAVTOOL_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cavtool/cavity_model.hpp"
#include "cavtool/fitting.hpp"
#include "cavtool/layered_optics.hpp"
#include "cavtool/quantity.hpp"

namespace cavtool {

using json = nlohmann::json;

// File formats are part of the CLI contract: CSV with a header row, LF
// endings, UTF-8, full-precision doubles; JSON pretty-printed with sorted
// keys so reruns diff cleanly.

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Shortest representation that round-trips the double (%.17g).
std::string format_double(double value);

void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Header row is returned as column names; every data cell must parse as a
// double. Throws std::runtime_error naming the offending line otherwise.
CsvTable read_csv(const std::filesystem::path& path);

json load_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& value);

// Field access with config-grade error messages (std::runtime_error naming
// the key).
double json_number(const json& value, const std::string& key);
double json_number_or(const json& value, const std::string& key,
                      double fallback);
std::string json_string_or(const json& value, const std::string& key,
                           const std::string& fallback);

// Stack files: {incident_index, exit_index, layers: [{thickness_nm, n_real,
// n_imag}]}. n_imag is optional and defaults to 0.
json stack_to_json(const LayerStack& stack);
LayerStack stack_from_json(const json& value);

// Geometry files: {R_um, air_gap_um, t_d_nm, n_d, emitter_depth_nm,
// lambda_nm}; n_d, emitter_depth_nm and lambda_nm may be omitted.
json geometry_to_json(const CavityGeometry& geometry);
CavityGeometry geometry_from_json(const json& value);

// Quantities serialize as {value, sigma_plus, sigma_minus, unit}. Reading
// additionally accepts {value, sigma} for symmetric intervals and a bare
// number for exact values.
json quantity_to_json(const Quantity& q);
Quantity quantity_from_json(const json& value,
                            const std::string& default_unit = "");

json fit_result_to_json(const FitResult& result);

// The constants table plus its version tag; echoed into every report.
json constants_json();

// FNV-1a 64-bit digest of the file bytes, 16 hex digits. Provenance tag for
// fit reports.
std::string file_digest(const std::filesystem::path& path);

}  // namespace cavtool

#endif  // CAVTOOL_IO_HPP
