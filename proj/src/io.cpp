#include "cavtool/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "cavtool/constants.hpp"

namespace cavtool {

namespace {

std::string strip(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t' ||
                         text[begin] == '\r')) {
    ++begin;
  }
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' ||
                         text[end - 1] == '\r' || text[end - 1] == '\n')) {
    --end;
  }
  return text.substr(begin, end - begin);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(strip(line.substr(start)));
      break;
    }
    cells.push_back(strip(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

}  // namespace

double json_number(const json& value, const std::string& key) {
  if (!value.is_object() || !value.contains(key) ||
      !value[key].is_number()) {
    throw std::runtime_error("missing or non-numeric field '" + key + "'");
  }
  return value[key].get<double>();
}

double json_number_or(const json& value, const std::string& key,
                      double fallback) {
  if (!value.is_object() || !value.contains(key)) {
    return fallback;
  }
  if (!value[key].is_number()) {
    throw std::runtime_error("field '" + key + "' must be numeric");
  }
  return value[key].get<double>();
}

std::string json_string_or(const json& value, const std::string& key,
                           const std::string& fallback) {
  if (!value.is_object() || !value.contains(key)) {
    return fallback;
  }
  if (!value[key].is_string()) {
    throw std::runtime_error("field '" + key + "' must be a string");
  }
  return value[key].get<std::string>();
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) {
      file << ',';
    }
    file << table.columns[c];
  }
  file << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw std::runtime_error("csv row width differs from header");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) {
        file << ',';
      }
      file << format_double(row[c]);
    }
    file << '\n';
  }
  if (!file.good()) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  CsvTable table;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(file, line)) {
    ++line_number;
    if (strip(line).empty()) {
      continue;
    }
    const auto cells = split_csv_line(line);
    if (table.columns.empty()) {
      table.columns = cells;
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw std::runtime_error(path.string() + ":" +
                               std::to_string(line_number) +
                               ": row width differs from header");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw std::runtime_error(path.string() + ":" +
                                 std::to_string(line_number) +
                                 ": not a number: '" + cell + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) {
    throw std::runtime_error(path.string() + ": empty csv");
  }
  return table;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  json value;
  try {
    file >> value;
  } catch (const json::exception& error) {
    throw std::runtime_error(path.string() + ": " + error.what());
  }
  return value;
}

void write_json(const std::filesystem::path& path, const json& value) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  file << value.dump(2) << '\n';
  if (!file.good()) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

json stack_to_json(const LayerStack& stack) {
  json layers = json::array();
  for (const auto& layer : stack.layers) {
    layers.push_back({{"thickness_nm", layer.thickness_nm},
                      {"n_real", layer.index.real()},
                      {"n_imag", layer.index.imag()}});
  }
  return {{"incident_index", stack.incident_index.real()},
          {"exit_index", stack.exit_index.real()},
          {"layers", layers}};
}

LayerStack stack_from_json(const json& value) {
  LayerStack stack;
  stack.incident_index = {json_number_or(value, "incident_index", 1.0), 0.0};
  stack.exit_index = {json_number_or(value, "exit_index", 1.0), 0.0};
  if (!value.contains("layers") || !value["layers"].is_array()) {
    throw std::runtime_error("stack file needs a 'layers' array");
  }
  for (const auto& entry : value["layers"]) {
    Layer layer;
    layer.thickness_nm = json_number(entry, "thickness_nm");
    layer.index = {json_number(entry, "n_real"),
                   json_number_or(entry, "n_imag", 0.0)};
    stack.layers.push_back(layer);
  }
  return stack;
}

json geometry_to_json(const CavityGeometry& geometry) {
  return {{"R_um", geometry.mirror_radius_um},
          {"air_gap_um", geometry.air_gap_um},
          {"t_d_nm", geometry.membrane_thickness_nm},
          {"n_d", geometry.membrane_index},
          {"emitter_depth_nm", geometry.emitter_depth_nm},
          {"lambda_nm", geometry.wavelength_nm}};
}

CavityGeometry geometry_from_json(const json& value) {
  CavityGeometry geometry;
  geometry.mirror_radius_um = json_number(value, "R_um");
  geometry.air_gap_um = json_number(value, "air_gap_um");
  geometry.membrane_thickness_nm = json_number_or(value, "t_d_nm", 0.0);
  geometry.membrane_index = json_number_or(value, "n_d", kIndexDiamond);
  geometry.emitter_depth_nm = json_number_or(value, "emitter_depth_nm", 0.0);
  geometry.wavelength_nm = json_number_or(value, "lambda_nm", 603.0);
  return geometry;
}

json quantity_to_json(const Quantity& q) {
  return {{"value", q.value},
          {"sigma_plus", q.sigma_plus},
          {"sigma_minus", q.sigma_minus},
          {"unit", q.unit}};
}

Quantity quantity_from_json(const json& value,
                            const std::string& default_unit) {
  Quantity q;
  q.unit = default_unit;
  if (value.is_number()) {
    q.value = value.get<double>();
    return q;
  }
  if (!value.is_object()) {
    throw std::runtime_error("quantity must be a number or an object");
  }
  q.value = json_number(value, "value");
  if (value.contains("sigma")) {
    q.sigma_plus = json_number(value, "sigma");
    q.sigma_minus = q.sigma_plus;
  } else {
    q.sigma_plus = json_number_or(value, "sigma_plus", 0.0);
    q.sigma_minus = json_number_or(value, "sigma_minus", 0.0);
  }
  if (value.contains("unit")) {
    q.unit = value["unit"].get<std::string>();
  }
  return q;
}

json fit_result_to_json(const FitResult& result) {
  return {{"params", result.params},
          {"sigma", result.sigma},
          {"covariance", result.covariance},
          {"chi_squared", result.chi_squared},
          {"reduced_chi_squared", result.reduced_chi_squared},
          {"iterations", result.iterations},
          {"converged", result.converged},
          {"rank_deficient", result.rank_deficient},
          {"warnings", result.warnings}};
}

json constants_json() {
  json table;
  for (const auto& [name, value] : constants_table()) {
    table[name] = value;
  }
  return {{"version", kConstantsVersion}, {"values", table}};
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  std::uint64_t hash = 14695981039346656037ULL;
  char buffer[4096];
  while (file.read(buffer, sizeof(buffer)) || file.gcount() > 0) {
    const std::streamsize got = file.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 1099511628211ULL;
    }
    if (!file) {
      break;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

}  // namespace cavtool
