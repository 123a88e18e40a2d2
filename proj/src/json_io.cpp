#include "narx/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace narx::io {

namespace {

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

json serialize(const OperatingPoint& op) {
  return json{{"u_s", op.u_s}, {"y_s", op.y_s}};
}

OperatingPoint operating_point_from_json(const json& j) {
  return OperatingPoint{j.at("u_s").get<double>(), j.at("y_s").get<double>()};
}

json serialize(const TimeSeries& ts) {
  return json{{"u", to_std(ts.u())}, {"y", to_std(ts.y())}, {"dt", ts.dt()}};
}

TimeSeries timeseries_from_json(const json& j) {
  return TimeSeries(to_eigen(j.at("u").get<std::vector<double>>()),
                    to_eigen(j.at("y").get<std::vector<double>>()), j.at("dt").get<double>());
}

json serialize(const ArxModel& model) {
  return json{{"a", to_std(model.a())},
              {"b", to_std(model.b())},
              {"delay", model.delay()},
              {"op", serialize(model.op())}};
}

ArxModel arx_from_json(const json& j) {
  return ArxModel(to_eigen(j.at("a").get<std::vector<double>>()),
                  to_eigen(j.at("b").get<std::vector<double>>()), j.at("delay").get<int>(),
                  operating_point_from_json(j.at("op")));
}

json serialize(const FeatureDescriptor& feature) {
  if (feature.is_constant()) return json{{"constant", true}};
  json terms = json::array();
  for (const auto& t : feature.terms()) {
    terms.push_back(json{{"variable", t.var == Var::Output ? "output" : "input"},
                         {"lag", t.lag},
                         {"exponent", t.exponent}});
  }
  return json{{"terms", std::move(terms)}};
}

FeatureDescriptor feature_from_json(const json& j) {
  if (j.contains("constant")) {
    if (!j.at("constant").get<bool>()) throw Error("feature: 'constant' must be true if present");
    return FeatureDescriptor::constant();
  }
  std::vector<FeatureTerm> terms;
  for (const auto& t : j.at("terms")) {
    const std::string var = t.at("variable").get<std::string>();
    if (var != "output" && var != "input") {
      throw Error("feature: variable must be 'output' or 'input'");
    }
    terms.push_back(FeatureTerm{var == "output" ? Var::Output : Var::Input,
                                t.at("lag").get<int>(), t.at("exponent").get<int>()});
  }
  return FeatureDescriptor::monomial(std::move(terms));
}

json serialize(const PNarxModel& model) {
  json features = json::array();
  for (const auto& f : model.features()) features.push_back(serialize(f));
  return json{{"features", std::move(features)},
              {"coefficients", to_std(model.coefficients())},
              {"lags", json{{"n_y", model.n_y()}, {"n_u", model.n_u()}}}};
}

PNarxModel pnarx_from_json(const json& j) {
  std::vector<FeatureDescriptor> features;
  for (const auto& f : j.at("features")) features.push_back(feature_from_json(f));
  return PNarxModel(std::move(features),
                    to_eigen(j.at("coefficients").get<std::vector<double>>()),
                    j.at("lags").at("n_y").get<int>(), j.at("lags").at("n_u").get<int>());
}

json serialize(const FusionConfig& config) {
  return json{{"n_y", config.n_y},
              {"n_u", config.n_u},
              {"degree", config.degree},
              {"gamma", config.gamma},
              {"lambda_grid",
               json{{"count", config.lambda_grid.count}, {"decades", config.lambda_grid.decades}}},
              {"cv_folds", config.cv_folds},
              {"epsilon_sel", config.epsilon_sel},
              {"seed", config.seed},
              {"N", config.n_samples},
              {"N_v", config.n_validation},
              {"n_a", config.n_a},
              {"n_b", config.n_b},
              {"delay", config.delay}};
}

FusionConfig config_from_json(const json& j) {
  FusionConfig config;
  config.n_y = j.at("n_y").get<int>();
  config.n_u = j.at("n_u").get<int>();
  config.degree = j.at("degree").get<int>();
  config.gamma = j.at("gamma").get<double>();
  if (j.contains("lambda_grid")) {
    const auto& g = j.at("lambda_grid");
    if (g.is_string()) {
      if (g.get<std::string>() != "auto") throw Error("config: lambda_grid must be 'auto' or an object");
      config.lambda_grid = LambdaGridSpec{};
    } else {
      config.lambda_grid.count = g.at("count").get<int>();
      config.lambda_grid.decades = g.at("decades").get<double>();
    }
  }
  config.cv_folds = j.at("cv_folds").get<int>();
  config.epsilon_sel = j.at("epsilon_sel").get<double>();
  config.seed = j.at("seed").get<std::uint32_t>();
  config.n_samples = j.at("N").get<int>();
  config.n_validation = j.at("N_v").get<int>();
  if (j.contains("n_a")) config.n_a = j.at("n_a").get<int>();
  if (j.contains("n_b")) config.n_b = j.at("n_b").get<int>();
  if (j.contains("delay")) config.delay = j.at("delay").get<int>();
  config.validate();
  return config;
}

json serialize(const sparse::CvReport& report) {
  std::vector<std::vector<double>> folds;
  for (Index f = 0; f < report.fold_mse.rows(); ++f) {
    folds.push_back(to_std(report.fold_mse.row(f).transpose()));
  }
  return json{{"lambda_grid", to_std(report.lambda_grid)},
              {"mean_mse", to_std(report.mean_mse)},
              {"std_mse", to_std(report.std_mse)},
              {"fold_mse", folds},
              {"chosen_lambda", report.chosen_lambda},
              {"fold_assignment", report.fold_assignment}};
}

sparse::CvReport cv_report_from_json(const json& j) {
  sparse::CvReport report;
  report.lambda_grid = to_eigen(j.at("lambda_grid").get<std::vector<double>>());
  report.mean_mse = to_eigen(j.at("mean_mse").get<std::vector<double>>());
  report.std_mse = to_eigen(j.at("std_mse").get<std::vector<double>>());
  const auto folds = j.at("fold_mse").get<std::vector<std::vector<double>>>();
  report.fold_mse.resize(static_cast<Index>(folds.size()), report.lambda_grid.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    report.fold_mse.row(static_cast<Index>(f)) = to_eigen(folds[f]).transpose();
  }
  report.chosen_lambda = j.at("chosen_lambda").get<double>();
  report.fold_assignment = j.at("fold_assignment").get<std::string>();
  return report;
}

json serialize(const fusion::FusionReport& report) {
  return json{{"n_s", report.n_s},
              {"lambda", report.lambda},
              {"gamma", report.gamma},
              {"cv_curve", serialize(report.cv)},
              {"selected_features", report.selected_features},
              {"beta_f", to_std(report.beta_f)},
              {"per_op_training_mse", report.per_op_training_mse}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

void write_timeseries_csv(const std::string& path, const TimeSeries& ts) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "k,u,y\n";
  for (Index k = 0; k < ts.size(); ++k) {
    out << k << "," << format_g12(ts.u()(k)) << "," << format_g12(ts.y()(k)) << "\n";
  }
}

TimeSeries read_timeseries_csv(const std::string& path, double dt) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,u,y", 0) != 0) {
    throw Error("time series CSV '" + path + "': missing 'k,u,y' header");
  }
  std::vector<double> u, y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    if (!std::getline(row, field, ',')) throw Error("time series CSV: malformed row");
    if (!std::getline(row, field, ',')) throw Error("time series CSV: malformed row");
    u.push_back(std::stod(field));
    if (!std::getline(row, field, ',')) throw Error("time series CSV: malformed row");
    y.push_back(std::stod(field));
  }
  return TimeSeries(to_eigen(u), to_eigen(y), dt);
}

}  // namespace narx::io
