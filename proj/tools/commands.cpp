#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavtool/cavity_model.hpp"
#include "cavtool/constants.hpp"
#include "cavtool/coupling_analysis.hpp"
#include "cavtool/emitter_dynamics.hpp"
#include "cavtool/fit_models.hpp"
#include "cavtool/io.hpp"
#include "cavtool/layered_optics.hpp"
#include "cavtool/quantity.hpp"

namespace cavtool::cli {

namespace {

// Paths inside a config resolve relative to the config file, not the cwd.
std::filesystem::path resolve(const CommandContext& context,
                              const std::string& relative) {
  std::filesystem::path path(relative);
  if (path.is_absolute()) {
    return path;
  }
  return context.config_path.parent_path() / path;
}

struct GridSpec {
  double from = 0.0;
  double to = 0.0;
  int samples = 0;
};

GridSpec grid_from(const json& config, const std::string& key) {
  if (!config.contains(key)) {
    throw std::runtime_error("missing grid '" + key + "'");
  }
  const json& block = config[key];
  GridSpec spec;
  spec.from = json_number(block, "from");
  spec.to = json_number(block, "to");
  spec.samples = static_cast<int>(json_number(block, "samples"));
  if (spec.samples < 1) {
    throw std::runtime_error("grid '" + key + "' needs samples >= 1");
  }
  return spec;
}

double grid_at(const GridSpec& grid, int i) {
  if (grid.samples == 1) {
    return grid.from;
  }
  return grid.from + (grid.to - grid.from) * i / (grid.samples - 1.0);
}

MirrorTermination termination_from(const std::string& name) {
  if (name == "high") {
    return MirrorTermination::kHighIndex;
  }
  if (name == "low") {
    return MirrorTermination::kLowIndex;
  }
  throw std::runtime_error("termination must be 'high' or 'low'");
}

CavityGeometry geometry_from_config(const CommandContext& context,
                                    const json& config) {
  if (config.contains("geometry_file")) {
    const auto path =
        resolve(context, config["geometry_file"].get<std::string>());
    return geometry_from_json(load_json(path));
  }
  if (config.contains("geometry")) {
    return geometry_from_json(config["geometry"]);
  }
  throw std::runtime_error("config needs 'geometry' or 'geometry_file'");
}

// Both coatings of the cavity: flat mirror low-index terminated (field
// antinode at its top surface, boosted by the membrane), fiber mirror
// high-index terminated (node at the air interface).
CavityAssembly assembly_from_config(const json& config, double wavelength_nm,
                                    json* info) {
  const std::string mirrors = json_string_or(config, "mirrors", "designed");
  if (mirrors == "ideal") {
    if (info != nullptr) {
      *info = {{"mirrors", "ideal"}};
    }
    return ideal_mirrors();
  }
  if (mirrors != "designed") {
    throw std::runtime_error("mirrors must be 'ideal' or 'designed'");
  }
  const json block = config.contains("mirror_design")
                         ? config["mirror_design"]
                         : json::object();
  const double ppm = json_number_or(block, "target_transmittance_ppm", 70.0);
  const double n_high = json_number_or(block, "n_high", kIndexTantala);
  const double n_low = json_number_or(block, "n_low", kIndexSilica);
  const double n_sub = json_number_or(block, "substrate_index", kIndexSilica);

  const BraggDesign flat =
      design_bragg_mirror(ppm * 1e-6, wavelength_nm, n_high, n_low,
                          MirrorTermination::kLowIndex, n_sub);
  const BraggDesign fiber =
      design_bragg_mirror(ppm * 1e-6, wavelength_nm, n_high, n_low,
                          MirrorTermination::kHighIndex, n_sub);
  if (info != nullptr) {
    *info = {{"mirrors", "designed"},
             {"target_transmittance_ppm", ppm},
             {"flat_pairs", flat.pair_count},
             {"flat_transmittance", flat.transmittance},
             {"fiber_pairs", fiber.pair_count},
             {"fiber_transmittance", fiber.transmittance}};
  }
  CavityAssembly assembly;
  assembly.flat_mirror = flat.stack;
  assembly.fiber_mirror = fiber.stack;
  return assembly;
}

json response_json(const StackResponse& response) {
  return {{"reflectance", response.reflectance},
          {"transmittance", response.transmittance},
          {"phase_rad", response.phase_on_reflection}};
}

ModeIndex mode_from_config(const json& config, int default_m) {
  ModeIndex mode{default_m, 0};
  if (config.contains("mode")) {
    mode.longitudinal_m =
        static_cast<int>(json_number(config["mode"], "m"));
    mode.transverse_q =
        static_cast<int>(json_number_or(config["mode"], "q", 0.0));
  }
  return mode;
}

}  // namespace

int run_stack(const CommandContext& context) {
  const json config = load_json(context.config_path);
  std::filesystem::create_directories(context.out_dir);

  const double wavelength = json_number_or(config, "wavelength_nm", 603.0);
  const std::string mode = json_string_or(config, "mode", "evaluate");

  LayerStack stack;
  json design_info;
  if (mode == "design") {
    if (!config.contains("design")) {
      throw std::runtime_error("design mode needs a 'design' block");
    }
    const json& block = config["design"];
    const double ppm = json_number(block, "target_transmittance_ppm");
    const BraggDesign design = design_bragg_mirror(
        ppm * 1e-6, wavelength, json_number_or(block, "n_high", kIndexTantala),
        json_number_or(block, "n_low", kIndexSilica),
        termination_from(json_string_or(block, "termination", "high")),
        json_number_or(block, "substrate_index", kIndexSilica));
    stack = design.stack;
    design_info = {{"pair_count", design.pair_count},
                   {"transmittance", design.transmittance},
                   {"target_transmittance_ppm", ppm}};
  } else if (mode == "evaluate") {
    if (config.contains("stack_file")) {
      stack = stack_from_json(
          load_json(resolve(context, config["stack_file"].get<std::string>())));
    } else if (config.contains("stack")) {
      stack = stack_from_json(config["stack"]);
    } else {
      throw std::runtime_error("evaluate mode needs 'stack' or 'stack_file'");
    }
  } else {
    throw std::runtime_error("mode must be 'design' or 'evaluate'");
  }

  write_json(context.out_dir / "stack.json", stack_to_json(stack));

  CsvTable response;
  response.columns = {"wavelength_nm", "reflectance", "transmittance",
                      "phase_rad"};
  if (config.contains("scan")) {
    const GridSpec scan = grid_from(config, "scan");
    for (int i = 0; i < scan.samples; ++i) {
      const double nm = grid_at(scan, i);
      const StackResponse r = stack_response(stack, nm);
      response.rows.push_back(
          {nm, r.reflectance, r.transmittance, r.phase_on_reflection});
    }
  } else {
    const StackResponse r = stack_response(stack, wavelength);
    response.rows.push_back(
        {wavelength, r.reflectance, r.transmittance, r.phase_on_reflection});
  }
  write_csv(context.out_dir / "response.csv", response);

  const FieldProfile profile =
      field_profile(stack, wavelength,
                    json_number_or(config, "field_step_nm", 1.0),
                    json_number_or(config, "field_margin_nm", 0.0));
  CsvTable field;
  field.columns = {"z_nm", "intensity"};
  for (std::size_t i = 0; i < profile.position_nm.size(); ++i) {
    field.rows.push_back({profile.position_nm[i], profile.intensity[i]});
  }
  write_csv(context.out_dir / "field.csv", field);

  json probes = json::array();
  std::vector<double> probe_wavelengths = {wavelength};
  if (config.contains("probe_wavelengths_nm")) {
    for (const auto& v : config["probe_wavelengths_nm"]) {
      probe_wavelengths.push_back(v.get<double>());
    }
  }
  for (double nm : probe_wavelengths) {
    json probe = response_json(stack_response(stack, nm));
    probe["wavelength_nm"] = nm;
    probes.push_back(probe);
  }
  json summary = {{"layer_count", stack.layers.size()},
                  {"probes", probes},
                  {"constants", constants_json()}};
  if (!design_info.is_null()) {
    summary["design"] = design_info;
  }
  write_json(context.out_dir / "summary.json", summary);
  return 0;
}

int run_dispersion(const CommandContext& context) {
  const json config = load_json(context.config_path);
  std::filesystem::create_directories(context.out_dir);

  const CavityGeometry geometry = geometry_from_config(context, config);
  json mirror_info;
  const CavityAssembly assembly =
      assembly_from_config(config, geometry.wavelength_nm, &mirror_info);

  DispersionRequest request;
  const GridSpec gap = grid_from(config, "air_gap");
  const GridSpec wavelength = grid_from(config, "wavelength");
  request.air_gap_lo_um = gap.from;
  request.air_gap_hi_um = gap.to;
  request.air_gap_samples = gap.samples;
  request.wavelength_lo_nm = wavelength.from;
  request.wavelength_hi_nm = wavelength.to;
  request.wavelength_samples = wavelength.samples;
  request.phase_halfwidth_rad =
      json_number_or(config, "phase_halfwidth_rad", 0.05);
  if (config.contains("m")) {
    for (const auto& v : config["m"]) {
      request.longitudinal.push_back(v.get<int>());
    }
  } else {
    request.longitudinal = {15, 16};
  }
  if (config.contains("q")) {
    for (const auto& v : config["q"]) {
      request.transverse.push_back(v.get<int>());
    }
  } else {
    request.transverse = {0, 1};
  }

  const DispersionMap map = dispersion_scan(assembly, geometry, request);

  CsvTable grid;
  grid.columns = {"air_gap_um", "lambda_nm", "value"};
  for (std::size_t i = 0; i < map.air_gap_um.size(); ++i) {
    for (std::size_t j = 0; j < map.wavelength_nm.size(); ++j) {
      grid.rows.push_back({map.air_gap_um[i], map.wavelength_nm[j],
                           map.value[i * map.wavelength_nm.size() + j]});
    }
  }
  write_csv(context.out_dir / "map.csv", grid);

  CsvTable branches;
  branches.columns = {"m", "q", "lambda_nm", "air_gap_um"};
  for (const auto& branch : map.branches) {
    for (std::size_t k = 0; k < branch.wavelength_nm.size(); ++k) {
      branches.rows.push_back({static_cast<double>(branch.longitudinal_m),
                               static_cast<double>(branch.transverse_q),
                               branch.wavelength_nm[k],
                               branch.air_gap_um[k]});
    }
  }
  write_csv(context.out_dir / "branches.csv", branches);

  write_json(context.out_dir / "summary.json",
             {{"geometry", geometry_to_json(geometry)},
              {"mirror", mirror_info},
              {"branch_count", map.branches.size()},
              {"constants", constants_json()}});
  return 0;
}

int run_fit(const CommandContext& context) {
  const json config = load_json(context.config_path);
  std::filesystem::create_directories(context.out_dir);

  const std::string kind = json_string_or(config, "kind", "");
  if (!config.contains("data_file")) {
    throw std::runtime_error("fit config needs 'data_file'");
  }
  const auto data_path =
      resolve(context, config["data_file"].get<std::string>());
  const CsvTable data = read_csv(data_path);
  if (data.columns.size() < 2) {
    throw std::runtime_error("fit data needs at least two columns");
  }
  std::vector<double> x, y;
  x.reserve(data.rows.size());
  y.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    x.push_back(row[0]);
    y.push_back(row[1]);
  }

  FitResult engine;
  json model_info;
  std::function<double(double)> model_at;

  if (kind == "g2") {
    std::vector<double> initial;
    if (config.contains("initial")) {
      for (const auto& v : config["initial"]) {
        initial.push_back(v.get<double>());
      }
    }
    const G2Fit out =
        fit_g2(x, y, json_string_or(config, "label", ""), initial);
    engine = out.engine;
    model_info = {{"sigma", out.sigma},
                  {"bunching_a", out.params.bunching_a},
                  {"tau1_ns", out.params.tau1_ns},
                  {"tau2_ns", out.params.tau2_ns},
                  {"label", out.label}};
    model_at = [params = out.params, sigma = out.sigma](double tau) {
      return g2_measured(params, sigma, tau);
    };
  } else if (kind == "saturation") {
    const SaturationFit out = fit_saturation(
        x, y, config.value("fix_background", false),
        config.value("poisson_weights", false));
    engine = out.engine;
    model_info = {{"i_inf_per_s", out.params.i_inf_per_s},
                  {"p_sat_mw", out.params.p_sat_mw},
                  {"c_bg_per_s_mw", out.params.c_bg_per_s_mw}};
    model_at = [params = out.params](double power) {
      return saturation_rate_per_s(params, power);
    };
  } else if (kind == "peaks") {
    const int n_peaks =
        static_cast<int>(json_number_or(config, "n_peaks", 1.0));
    const PeaksFit out = fit_gaussian_peaks(x, y, n_peaks);
    engine = out.engine;
    json peaks = json::array();
    for (const auto& peak : out.peaks) {
      peaks.push_back({{"amplitude", peak.amplitude},
                       {"center", peak.center},
                       {"width", peak.width},
                       {"sigma_amplitude", peak.sigma_amplitude},
                       {"sigma_center", peak.sigma_center},
                       {"sigma_width", peak.sigma_width}});
    }
    model_info = {{"baseline", out.baseline}, {"peaks", peaks}};
    model_at = [params = engine.params](double position) {
      double value = params[0];
      for (std::size_t k = 1; k + 2 < params.size(); k += 3) {
        const double u = (position - params[k + 1]) / params[k + 2];
        value += params[k] * std::exp(-0.5 * u * u);
      }
      return value;
    };
  } else {
    throw std::runtime_error("kind must be 'g2', 'saturation' or 'peaks'");
  }

  CsvTable residuals;
  residuals.columns = {data.columns[0], data.columns[1], "model", "residual"};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = model_at(x[i]);
    residuals.rows.push_back({x[i], y[i], m, y[i] - m});
  }
  write_csv(context.out_dir / "residuals.csv", residuals);

  write_json(context.out_dir / "fit.json",
             {{"kind", kind},
              {"data_file", config["data_file"].get<std::string>()},
              {"data_digest", file_digest(data_path)},
              {"model", model_info},
              {"engine", fit_result_to_json(engine)},
              {"constants", constants_json()}});
  return engine.converged ? 0 : 3;
}

int run_report(const CommandContext& context) {
  const json config = load_json(context.config_path);
  std::filesystem::create_directories(context.out_dir);

  auto required_quantity = [&](const char* key, const char* unit) {
    if (!config.contains(key)) {
      throw std::runtime_error(std::string("report config missing '") + key +
                               "'");
    }
    return quantity_from_json(config[key], unit);
  };

  const Quantity free_meas = required_quantity("free_rate", "counts/s");
  const Quantity eta_free = required_quantity("free_efficiency", "");
  const Quantity cav_meas = required_quantity("cavity_rate", "counts/s");
  const Quantity eta_cav = required_quantity("cavity_efficiency", "");
  const Quantity zpl_fwhm = required_quantity("zpl_fwhm_thz", "THz");
  const Quantity kappa = required_quantity("cavity_linewidth_ghz", "GHz");
  const double xi = json_number_or(config, "xi", kZplBranchingRatio);
  if (!(xi > 0.0) || xi > 1.0) {
    throw std::runtime_error("xi must be in (0, 1]");
  }

  const Quantity i_free = corrected_rate(free_meas, eta_free);
  const Quantity i_cav = corrected_rate(cav_meas, eta_cav);

  // Free-space density counts only the fraction xi inside the line; the
  // cavity rate is already line-filtered.
  const Quantity free_line = propagate(
      [xi](const std::vector<double>& v) { return xi * v[0]; }, {i_free},
      "1/s");
  const Quantity zpl_fwhm_ghz = propagate(
      [](const std::vector<double>& v) { return v[0] * 1e3; }, {zpl_fwhm},
      "GHz");
  const Quantity free_density = peak_spectral_density(free_line, zpl_fwhm_ghz);
  const Quantity cavity_density = peak_spectral_density(i_cav, kappa);
  const Quantity density_ratio = propagate(
      [](const std::vector<double>& v) { return v[0] / v[1]; },
      {cavity_density, free_density}, "");

  const Quantity beta = beta_from_rates(i_cav, i_free);
  const Quantity purcell = purcell_from_beta(zpl_fwhm, kappa, xi, beta);
  const EnhancementProjection projection = project_enhancement(purcell, xi);

  json report = {{"inputs",
                  {{"free_rate", quantity_to_json(free_meas)},
                   {"free_efficiency", quantity_to_json(eta_free)},
                   {"cavity_rate", quantity_to_json(cav_meas)},
                   {"cavity_efficiency", quantity_to_json(eta_cav)},
                   {"zpl_fwhm_thz", quantity_to_json(zpl_fwhm)},
                   {"cavity_linewidth_ghz", quantity_to_json(kappa)},
                   {"xi", xi}}},
                 {"free_rate_corrected", quantity_to_json(i_free)},
                 {"cavity_rate_corrected", quantity_to_json(i_cav)},
                 {"free_peak_density", quantity_to_json(free_density)},
                 {"cavity_peak_density", quantity_to_json(cavity_density)},
                 {"density_ratio", quantity_to_json(density_ratio)},
                 {"beta", quantity_to_json(beta)},
                 {"purcell", quantity_to_json(purcell)},
                 {"lifetime_reduction",
                  quantity_to_json(projection.lifetime_reduction)},
                 {"zpl_fraction", quantity_to_json(projection.zpl_fraction)},
                 {"constants", constants_json()}};

  if (config.contains("predicted_bright_rate")) {
    const Quantity predicted =
        quantity_from_json(config["predicted_bright_rate"], "1/s");
    report["quantum_efficiency"] =
        quantity_to_json(quantum_efficiency(i_free, predicted));
  }

  if (config.value("monte_carlo", false)) {
    const int samples =
        static_cast<int>(json_number_or(config, "mc_samples", 10000.0));
    std::mt19937_64 engine(context.seed);
    // Full-chain resampling from the primitive inputs, in a fixed order so a
    // fixed seed reproduces the block byte for byte.
    const std::vector<Quantity> primitives = {cav_meas, eta_cav, free_meas,
                                              eta_free, zpl_fwhm, kappa};
    auto cav_of = [](const std::vector<double>& v) { return v[0] / v[1]; };
    auto free_of = [](const std::vector<double>& v) { return v[2] / v[3]; };
    auto beta_of = [=](const std::vector<double>& v) {
      return cav_of(v) / (cav_of(v) + free_of(v));
    };
    json mc = {
        {"samples", samples},
        {"free_rate_corrected",
         quantity_to_json(propagate_mc(free_of, primitives, engine, samples,
                                       "1/s"))},
        {"cavity_rate_corrected",
         quantity_to_json(
             propagate_mc(cav_of, primitives, engine, samples, "1/s"))},
        {"free_peak_density",
         quantity_to_json(propagate_mc(
             [=](const std::vector<double>& v) {
               return 2.0 * xi * free_of(v) / (std::numbers::pi * v[4] * 1e3);
             },
             primitives, engine, samples, "1/(s GHz)"))},
        {"cavity_peak_density",
         quantity_to_json(propagate_mc(
             [=](const std::vector<double>& v) {
               return 2.0 * cav_of(v) / (std::numbers::pi * v[5]);
             },
             primitives, engine, samples, "1/(s GHz)"))},
        {"density_ratio",
         quantity_to_json(propagate_mc(
             [=](const std::vector<double>& v) {
               return (2.0 * cav_of(v) / (std::numbers::pi * v[5])) /
                      (2.0 * xi * free_of(v) / (std::numbers::pi * v[4] * 1e3));
             },
             primitives, engine, samples, ""))},
        {"beta", quantity_to_json(
                     propagate_mc(beta_of, primitives, engine, samples, ""))},
        {"purcell",
         quantity_to_json(propagate_mc(
             [=](const std::vector<double>& v) {
               return v[4] * 1e3 / (xi * v[5]) * beta_of(v);
             },
             primitives, engine, samples, ""))}};
    report["monte_carlo"] = mc;
  }

  write_json(context.out_dir / "report.json", report);
  return 0;
}

int run_beta_scan(const CommandContext& context) {
  const json config = load_json(context.config_path);
  std::filesystem::create_directories(context.out_dir);

  const CavityGeometry geometry = geometry_from_config(context, config);
  json mirror_info;
  const CavityAssembly assembly =
      assembly_from_config(config, geometry.wavelength_nm, &mirror_info);
  const double finesse = json_number_or(config, "finesse", 11200.0);
  const BetaSimulator simulator(assembly, finesse);

  BetaScanRequest request;
  const GridSpec thickness = grid_from(config, "thickness");
  request.thickness_lo_nm = thickness.from;
  request.thickness_hi_nm = thickness.to;
  request.thickness_samples = thickness.samples;
  if (!config.contains("depth")) {
    throw std::runtime_error("beta-scan config needs a 'depth' block");
  }
  request.depth_center_nm = json_number(config["depth"], "center_nm");
  request.depth_sigma_nm = json_number(config["depth"], "sigma_nm");
  request.depth_samples =
      static_cast<int>(json_number(config["depth"], "samples"));
  request.mode = mode_from_config(config, 15);
  if (!config.contains("emitter")) {
    throw std::runtime_error("beta-scan config needs an 'emitter' block");
  }
  request.zpl_fwhm_thz = json_number(config["emitter"], "zpl_fwhm_thz");
  request.lifetime_ns = json_number(config["emitter"], "lifetime_ns");
  request.threads = static_cast<int>(json_number_or(config, "threads", 0.0));

  const BetaScanResult result = beta_scan(simulator, geometry, request);

  const std::size_t n_depth = result.depth_nm.size();
  CsvTable table;
  table.columns = {"t_d_nm", "depth_nm", "beta"};
  for (std::size_t i = 0; i < result.thickness_nm.size(); ++i) {
    for (std::size_t j = 0; j < n_depth; ++j) {
      table.rows.push_back({result.thickness_nm[i], result.depth_nm[j],
                            result.beta[i * n_depth + j]});
    }
  }
  write_csv(context.out_dir / "beta.csv", table);

  // Depth bands around the implantation center: column extrema restricted to
  // one and two sigma.
  std::size_t center_index = 0;
  for (std::size_t j = 1; j < n_depth; ++j) {
    if (std::abs(result.depth_nm[j] - request.depth_center_nm) <
        std::abs(result.depth_nm[center_index] - request.depth_center_nm)) {
      center_index = j;
    }
  }
  CsvTable bands;
  bands.columns = {"t_d_nm",         "beta_center",    "beta_min_1sigma",
                   "beta_max_1sigma", "beta_min_2sigma", "beta_max_2sigma"};
  const double tolerance = 1e-9;
  for (std::size_t i = 0; i < result.thickness_nm.size(); ++i) {
    double min1 = 1.0, max1 = 0.0, min2 = 1.0, max2 = 0.0;
    for (std::size_t j = 0; j < n_depth; ++j) {
      const double off =
          std::abs(result.depth_nm[j] - request.depth_center_nm);
      const double b = result.beta[i * n_depth + j];
      if (off <= 2.0 * request.depth_sigma_nm + tolerance) {
        min2 = std::min(min2, b);
        max2 = std::max(max2, b);
      }
      if (off <= request.depth_sigma_nm + tolerance) {
        min1 = std::min(min1, b);
        max1 = std::max(max1, b);
      }
    }
    bands.rows.push_back({result.thickness_nm[i],
                          result.beta[i * n_depth + center_index], min1, max1,
                          min2, max2});
  }
  write_csv(context.out_dir / "bands.csv", bands);

  write_json(context.out_dir / "summary.json",
             {{"geometry", geometry_to_json(geometry)},
              {"mirror", mirror_info},
              {"finesse", finesse},
              {"mode",
               {{"m", request.mode.longitudinal_m},
                {"q", request.mode.transverse_q}}},
              {"emitter",
               {{"zpl_fwhm_thz", request.zpl_fwhm_thz},
                {"lifetime_ns", request.lifetime_ns}}},
              {"constants", constants_json()}});
  return 0;
}

int run_synth(const CommandContext& context) {
  const json config = load_json(context.config_path);
  std::filesystem::create_directories(context.out_dir);

  const std::string kind = json_string_or(config, "kind", "");
  const double noise = json_number_or(config, "noise", 0.0);
  const GridSpec grid = grid_from(config, "grid");
  if (!config.contains("truth")) {
    throw std::runtime_error("synth config needs a 'truth' block");
  }
  const json& truth = config["truth"];

  std::mt19937_64 engine(context.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto noisy = [&](double value) {
    if (noise <= 0.0) {
      return value;
    }
    return value * (1.0 + noise * normal(engine));
  };

  CsvTable data;
  if (kind == "g2") {
    G2Params params;
    params.bunching_a = json_number(truth, "a");
    params.tau1_ns = json_number(truth, "tau1_ns");
    params.tau2_ns = json_number(truth, "tau2_ns");
    const double sigma = json_number_or(truth, "sigma", 1.0);
    data.columns = {"tau_ns", "g2"};
    for (int i = 0; i < grid.samples; ++i) {
      const double tau = grid_at(grid, i);
      data.rows.push_back({tau, noisy(g2_measured(params, sigma, tau))});
    }
  } else if (kind == "saturation") {
    SaturationParams params;
    params.i_inf_per_s = json_number(truth, "i_inf");
    params.p_sat_mw = json_number(truth, "p_sat_mw");
    params.c_bg_per_s_mw = json_number_or(truth, "c_bg", 0.0);
    data.columns = {"power_mW", "counts_per_s"};
    for (int i = 0; i < grid.samples; ++i) {
      const double power = grid_at(grid, i);
      data.rows.push_back(
          {power, noisy(saturation_rate_per_s(params, power))});
    }
  } else if (kind == "peaks") {
    const double baseline = json_number_or(truth, "baseline", 0.0);
    struct Peak {
      double amplitude, center, width;
    };
    std::vector<Peak> peaks;
    if (!truth.contains("peaks") || !truth["peaks"].is_array()) {
      throw std::runtime_error("peaks truth needs a 'peaks' array");
    }
    for (const auto& p : truth["peaks"]) {
      peaks.push_back({json_number(p, "amplitude"), json_number(p, "center"),
                       json_number(p, "width")});
    }
    data.columns = {"position", "counts"};
    for (int i = 0; i < grid.samples; ++i) {
      const double pos = grid_at(grid, i);
      double value = baseline;
      for (const auto& p : peaks) {
        const double u = (pos - p.center) / p.width;
        value += p.amplitude * std::exp(-0.5 * u * u);
      }
      data.rows.push_back({pos, noisy(value)});
    }
  } else {
    throw std::runtime_error("kind must be 'g2', 'saturation' or 'peaks'");
  }

  write_csv(context.out_dir / "data.csv", data);
  write_json(context.out_dir / "truth.json",
             {{"kind", kind},
              {"truth", truth},
              {"noise", noise},
              {"seed", context.seed},
              {"samples", grid.samples}});
  return 0;
}

}  // namespace cavtool::cli
