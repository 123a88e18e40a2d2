// Command-line front end: plant simulation, local identification, model
// fusion, validation and the case-study benchmark harness. All file outputs
// are deterministic given the configuration and seed.

#include "narx/fusion.hpp"
#include "narx/json_io.hpp"
#include "narx/lifting.hpp"
#include "narx/local_ident.hpp"
#include "narx/plants.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace narx;

namespace fs = std::filesystem;

std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void emit_error(const std::string& stage, const std::string& message) {
  io::json err{{"stage", stage}, {"error", message}};
  std::cerr << err.dump() << "\n";
}

std::uint32_t apply_seed_env(std::uint32_t seed) {
  if (const char* env = std::getenv("NARX_FUSION_SEED")) {
    return static_cast<std::uint32_t>(std::stoul(env));
  }
  return seed;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string plant;
  std::string out;
  int n = 500;
  double dt = 1.0;
  std::uint32_t seed = 1;
  std::optional<double> const_level;
  std::string step_spec;    // from:to@index
  std::string prbs_spec;    // amplitude:period
  double center = 0.0;
  std::optional<double> h0;
};

Vector build_input(const SimulateArgs& args) {
  const int given = (args.const_level ? 1 : 0) + (!args.step_spec.empty() ? 1 : 0) +
                    (!args.prbs_spec.empty() ? 1 : 0);
  if (given != 1) {
    throw std::invalid_argument("exactly one of --const, --step, --prbs is required");
  }
  if (args.const_level) {
    return Vector::Constant(args.n, *args.const_level);
  }
  if (!args.step_spec.empty()) {
    double from = 0.0, to = 0.0;
    long idx = 0;
    if (std::sscanf(args.step_spec.c_str(), "%lf:%lf@%ld", &from, &to, &idx) != 3) {
      throw std::invalid_argument("--step expects from:to@index, e.g. 2.236:3.162@100");
    }
    return plants::gen_step(args.n, from, to, idx);
  }
  double amplitude = 0.0;
  int period = 0;
  if (std::sscanf(args.prbs_spec.c_str(), "%lf:%d", &amplitude, &period) != 2) {
    throw std::invalid_argument("--prbs expects amplitude:period, e.g. 0.02:10");
  }
  return plants::gen_prbs(args.n, amplitude, args.center, period, args.seed);
}

int run_simulate(const SimulateArgs& args_in) {
  SimulateArgs args = args_in;
  args.seed = apply_seed_env(args.seed);
  const Vector u = build_input(args);

  TimeSeries ts = [&]() {
    if (args.plant == "toy") {
      plants::ToyNarxPlant plant;
      const OperatingPoint op = plants::solve_steady_state(plant, u(0));
      return plants::simulate_toy(plant, u, {op.y_s, op.y_s}, args.dt);
    }
    if (args.plant == "tank") {
      plants::ConicalTankPlant plant;
      const double h0 = args.h0 ? *args.h0 : (u(0) / plant.C_d) * (u(0) / plant.C_d);
      auto result = plants::simulate_tank(plant, u, h0, args.dt);
      if (result.clamped) {
        std::cout << "note: level clamped to [" << plant.h_min << ", " << plant.H
                  << "] during simulation\n";
      }
      return result.ts;
    }
    if (args.plant == "hw") {
      return plants::simulate_hw(plants::HammersteinWienerPlant{}, u, args.dt);
    }
    throw std::invalid_argument("unknown plant '" + args.plant + "' (valid: toy, tank, hw)");
  }();

  io::write_timeseries_csv(args.out, ts);
  const Index tail = std::max<Index>(1, ts.size() / 10);
  const double steady = ts.y().tail(tail).mean();
  std::cout << "wrote " << args.out << ": N = " << ts.size()
            << ", steady-state estimate = " << format_g12(steady) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// identify-local

struct IdentifyArgs {
  std::string plant;
  std::vector<double> ops;  // steady inputs (toy/hw) or steady levels (tank)
  std::string out = "local_models.json";
  local_ident::LocalExperiment exp;
};

plants::Plant make_plant(const std::string& name) {
  if (name == "toy") return plants::ToyNarxPlant{};
  if (name == "tank") return plants::ConicalTankPlant{};
  if (name == "hw") return plants::HammersteinWienerPlant{};
  throw std::invalid_argument("unknown plant '" + name + "' (valid: toy, tank, hw)");
}

std::vector<OperatingPoint> resolve_ops(const plants::Plant& plant, const std::string& name,
                                        const std::vector<double>& values) {
  std::vector<OperatingPoint> ops;
  for (double v : values) {
    // Tank operating points are conventionally given as levels h_s.
    const double u_s = (name == "tank")
                           ? std::get<plants::ConicalTankPlant>(plant).C_d * std::sqrt(v)
                           : v;
    ops.push_back(plants::solve_steady_state(plant, u_s));
  }
  return ops;
}

int run_identify(IdentifyArgs args) {
  args.exp.seed = apply_seed_env(args.exp.seed);
  const plants::Plant plant = make_plant(args.plant);
  const auto ops = resolve_ops(plant, args.plant, args.ops);
  const auto fits = local_ident::make_local_models(plant, ops, args.exp);

  io::json out = io::json::array();
  for (const auto& fit : fits) {
    out.push_back(io::serialize(fit.model));
    std::cout << "op (u_s = " << format_g12(fit.model.op().u_s)
              << ", y_s = " << format_g12(fit.model.op().y_s)
              << "): residual RMS = " << format_g12(fit.residual_rms) << " on " << fit.rows
              << " rows\n";
  }
  io::write_json(args.out, out);
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fuse

struct FuseArgs {
  int schema_version = 1;
  std::string case_name;
  std::vector<double> ops;           // anchors; default from case
  std::vector<double> validate_ops;  // default from case
  FusionConfig config;
  std::string out_dir = "out";
};

int run_fuse(FuseArgs args) {
  if (args.schema_version != 1) {
    throw std::invalid_argument("config: unsupported schema_version (expected 1)");
  }
  args.config.seed = apply_seed_env(args.config.seed);
  args.config.validate();
  const fusion::Case c = fusion::case_from_string(args.case_name);
  const plants::Plant plant = make_plant(args.case_name);
  if (args.ops.empty()) args.ops = fusion::anchor_points(c);
  if (args.validate_ops.empty()) args.validate_ops = fusion::benchmark_grid(c);

  const auto anchors = resolve_ops(plant, args.case_name, args.ops);
  local_ident::LocalExperiment exp;
  exp.n_samples = args.config.n_samples;
  exp.seed = args.config.seed;
  exp.n_a = args.config.n_a;
  exp.n_b = args.config.n_b;
  exp.delay = args.config.delay;
  exp.dt = fusion::benchmark_dt(c);

  const auto fits = local_ident::make_local_models(plant, anchors, exp);
  std::vector<ArxModel> models;
  for (const auto& f : fits) models.push_back(f.model);

  const fusion::FusionResult result = fusion::fuse(models, args.config);

  fs::create_directories(args.out_dir);
  const std::string model_path = args.out_dir + "/pnarx_model.json";
  const std::string report_path = args.out_dir + "/fusion_report.json";
  io::write_json(model_path, io::serialize(result.model));
  io::write_json(report_path, io::serialize(result.report));
  sparse::write_cv_csv(result.report.cv, args.out_dir + "/cv_curve.csv");

  // Prediction traces at each validation operating point. A diverging free
  // run is reported per point; it does not abort the run (the model and
  // report are already on disk).
  for (double op_value : args.validate_ops) {
    const double u_star = fusion::benchmark_input(c, op_value);
    const OperatingPoint op = plants::solve_steady_state(plant, u_star);
    const Vector u_val = fusion::benchmark_validation_input(c, u_star, args.config.n_validation);
    const TimeSeries truth = plants::simulate_near(plant, op, u_val, 300, fusion::benchmark_dt(c));
    const Index max_lag = std::max(result.model.n_y(), result.model.n_u());
    TimeSeries pred(Vector::Zero(1), Vector::Zero(1));
    try {
      pred = fusion::simulate_pnarx(result.model, truth.u(), truth.y().head(max_lag));
    } catch (const DivergenceError& e) {
      std::cout << "validation op " << format_g12(op_value) << ": free run diverged ("
                << e.what() << ")\n";
      continue;
    }
    const double mse = fusion::validate(result.model, truth);

    std::string trace_path = args.out_dir + "/trace_op_" + format_g12(op_value) + ".csv";
    std::ofstream trace(trace_path);
    if (!trace) throw Error("cannot open '" + trace_path + "' for writing");
    trace << "k,u,y_true,y_pred\n";
    for (Index k = 0; k < truth.size(); ++k) {
      trace << k << "," << format_g12(truth.u()(k)) << "," << format_g12(truth.y()(k)) << ","
            << format_g12(pred.y()(k)) << "\n";
    }
    std::cout << "validation op " << format_g12(op_value)
              << ": free-run MSE = " << format_g12(mse) << "\n";
  }

  std::cout << "selected " << result.report.n_s << " features (lambda = "
            << format_g12(result.report.lambda) << ")\n";
  std::cout << "wrote " << model_path << ", " << report_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// validate

int run_validate(const std::string& model_path, const std::string& data_path,
                 const std::string& mode, double dt) {
  const PNarxModel model = io::pnarx_from_json(io::read_json(model_path));
  const TimeSeries truth = io::read_timeseries_csv(data_path, dt);
  const fusion::ValidationMode m = [&]() {
    if (mode == "free_run") return fusion::ValidationMode::FreeRun;
    if (mode == "one_step") return fusion::ValidationMode::OneStep;
    throw std::invalid_argument("unknown mode '" + mode + "' (valid: free_run, one_step)");
  }();
  std::cout << format_g12(fusion::validate(model, truth, m)) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark

int run_benchmark(const std::string& case_name, const std::string& out_dir,
                  std::optional<std::uint32_t> seed) {
  const fusion::Case c = fusion::case_from_string(case_name);
  FusionConfig config = fusion::default_config(c);
  if (seed) config.seed = *seed;
  config.seed = apply_seed_env(config.seed);

  const fusion::BenchmarkReport report = fusion::benchmark(c, config);
  fs::create_directories(out_dir);
  const std::string csv_path = out_dir + "/" + case_name + "_benchmark.csv";
  fusion::write_benchmark_csv(report, csv_path);

  std::cout << "OP,MSE_MF,MSE_M1,MSE_M2,ratio1,ratio2\n";
  for (const auto& row : report.rows) {
    std::cout << format_g12(row.op) << "," << format_g12(row.mse_fusion) << ","
              << format_g12(row.mse_m1) << "," << format_g12(row.mse_m2) << ","
              << format_g12(row.ratio1) << "," << format_g12(row.ratio2) << "\n";
  }

  // Pass/fail summary against the case acceptance thresholds.
  auto find_row = [&](double op) -> const fusion::BenchmarkRow& {
    for (const auto& row : report.rows) {
      if (std::abs(row.op - op) < 1e-12) return row;
    }
    throw Error("benchmark: missing grid row");
  };
  auto line = [](bool ok, const std::string& what) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << what << "\n";
    return ok;
  };
  bool all = true;
  switch (c) {
    case fusion::Case::Toy: {
      const auto& mid = find_row(0.2);
      all &= line(mid.ratio1 >= 20.0 && mid.ratio2 >= 20.0,
                  "intermediate OP 0.2: both MSE ratios >= 20");
      bool beats = true;
      for (const auto& row : report.rows) {
        beats &= row.mse_fusion < row.mse_m1 && row.mse_fusion < row.mse_m2;
      }
      all &= line(beats, "fusion beats both local models at every grid OP");
      break;
    }
    case fusion::Case::Tank: {
      const auto& mid = find_row(7.5);
      all &= line(mid.ratio1 >= 5.0 && mid.ratio2 >= 5.0,
                  "intermediate OP 7.5 cm: both MSE ratios >= 5");
      all &= line(find_row(5.0).mse_fusion < 0.05 && find_row(10.0).mse_fusion < 0.05,
                  "fusion MSE below 0.05 at the anchor OPs");
      break;
    }
    case fusion::Case::Hw: {
      const auto& mid = find_row(0.5);
      all &= line(mid.mse_fusion < mid.mse_m1 && mid.mse_fusion < mid.mse_m2,
                  "intermediate OP 0.5: fusion MSE strictly below both local models");
      break;
    }
  }
  std::cout << (all ? "benchmark thresholds met" : "benchmark thresholds NOT met") << "\n";
  std::cout << "wrote " << csv_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global polynomial NARX identification by fusing local linear models"};
  app.require_subcommand(1);
  app.fallthrough();  // lets `fuse --config ...` reach the root config option
  app.set_config("--config", "", "TOML run configuration (subcommand options in sections)");
  app.allow_config_extras(CLI::config_extras_mode::error);  // schema violations are named
  int schema_version = 1;
  app.add_option("--schema_version", schema_version, "Config schema version");

  // simulate ----------------------------------------------------------------
  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a reference plant and write CSV");
  simulate->add_option("--plant", sim.plant, "Plant: toy, tank, hw")->required();
  simulate->add_option("--n", sim.n, "Number of samples")->check(CLI::PositiveNumber);
  simulate->add_option("--dt", sim.dt, "Sampling interval (s)");
  simulate->add_option("--seed", sim.seed, "PRBS seed");
  simulate->add_option("--const", sim.const_level, "Constant input level");
  simulate->add_option("--step", sim.step_spec, "Step input from:to@index");
  simulate->add_option("--prbs", sim.prbs_spec, "PRBS input amplitude:period");
  simulate->add_option("--center", sim.center, "PRBS center level");
  simulate->add_option("--h0", sim.h0, "Tank initial level (default: steady state of u[0])");
  simulate->add_option("--out", sim.out, "Output CSV path")->default_val("simulate.csv");

  // identify-local ------------------------------------------------------------
  IdentifyArgs ident;
  auto* identify = app.add_subcommand("identify-local", "Fit local ARX models around operating points");
  identify->add_option("--plant", ident.plant, "Plant: toy, tank, hw")->required();
  identify->add_option("--ops", ident.ops, "Operating points (u_s; levels h_s for tank)")
      ->required()
      ->delimiter(',');
  identify->add_option("--n", ident.exp.n_samples, "Samples per experiment");
  identify->add_option("--n-a", ident.exp.n_a, "Output lags");
  identify->add_option("--n-b", ident.exp.n_b, "Input lags");
  identify->add_option("--delay", ident.exp.delay, "Input delay (samples)");
  identify->add_option("--seed", ident.exp.seed, "Excitation seed");
  identify->add_option("--out", ident.out, "Output JSON path");

  // fuse ----------------------------------------------------------------------
  // Option names use underscores so TOML config keys map to them one-to-one.
  FuseArgs fuse_args;
  auto* fuse = app.add_subcommand("fuse", "Run the full fusion pipeline from a TOML config");
  fuse->add_option("--case", fuse_args.case_name, "Case: toy, tank, hw")->required();
  fuse->add_option("--ops", fuse_args.ops, "Anchor operating points")->delimiter(',');
  fuse->add_option("--validate_ops", fuse_args.validate_ops,
                   "Operating points for prediction traces")
      ->delimiter(',');
  fuse->add_option("--n_y", fuse_args.config.n_y, "Output lags of the global model");
  fuse->add_option("--n_u", fuse_args.config.n_u, "Input lags of the global model");
  fuse->add_option("--degree", fuse_args.config.degree, "Polynomial degree");
  fuse->add_option("--gamma", fuse_args.config.gamma, "Elastic-net mixing weight in (0,1)");
  fuse->add_option("--cv_folds", fuse_args.config.cv_folds, "Cross-validation folds");
  fuse->add_option("--grid_size", fuse_args.config.lambda_grid.count, "Lambda grid size");
  fuse->add_option("--grid_decades", fuse_args.config.lambda_grid.decades,
                   "Lambda grid range in decades");
  fuse->add_option("--epsilon_sel", fuse_args.config.epsilon_sel,
                   "Selection threshold on standardized coefficients");
  fuse->add_option("--seed", fuse_args.config.seed, "Excitation seed");
  fuse->add_option("--N", fuse_args.config.n_samples, "Training samples per operating point");
  fuse->add_option("--N_v", fuse_args.config.n_validation, "Validation samples");
  fuse->add_option("--n_a", fuse_args.config.n_a, "Local model output lags");
  fuse->add_option("--n_b", fuse_args.config.n_b, "Local model input lags");
  fuse->add_option("--delay", fuse_args.config.delay, "Local model delay");
  fuse->add_option("--out_dir", fuse_args.out_dir, "Output directory");

  // validate ------------------------------------------------------------------
  std::string val_model, val_data, val_mode = "free_run";
  double val_dt = 1.0;
  auto* validate = app.add_subcommand("validate", "Score a p-NARX model against a CSV series");
  validate->add_option("--model", val_model, "p-NARX model JSON")->required();
  validate->add_option("--data", val_data, "Ground-truth CSV (k,u,y)")->required();
  validate->add_option("--mode", val_mode, "free_run or one_step");
  validate->add_option("--dt", val_dt, "Sampling interval of the CSV data");

  // benchmark -------------------------------------------------------------------
  std::string bench_case, bench_out = ".";
  std::optional<std::uint32_t> bench_seed;
  auto* bench = app.add_subcommand("benchmark", "Reproduce a case-study comparison table");
  bench->add_option("case", bench_case, "Case: toy, tank, hw")->required();
  bench->add_option("--out-dir", bench_out, "Output directory");
  bench->add_option("--seed", bench_seed, "Override the default seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) emit_error("usage", e.what());
    return app.exit(e);
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (identify->parsed()) return run_identify(ident);
    if (fuse->parsed()) {
      fuse_args.schema_version = schema_version;
      return run_fuse(fuse_args);
    }
    if (validate->parsed()) return run_validate(val_model, val_data, val_mode, val_dt);
    if (bench->parsed()) return run_benchmark(bench_case, bench_out, bench_seed);
  } catch (const std::exception& e) {
    emit_error(stage, e.what());
    return 1;
  }
  return 0;
}
