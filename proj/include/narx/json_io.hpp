#pragma once

#include "narx/elastic_net.hpp"
#include "narx/fusion.hpp"
#include "narx/types.hpp"

#include <json.hpp>

#include <string>

namespace narx::io {

using json = nlohmann::ordered_json;

json serialize(const OperatingPoint& op);
json serialize(const TimeSeries& ts);
json serialize(const ArxModel& model);
json serialize(const FeatureDescriptor& feature);
json serialize(const PNarxModel& model);
json serialize(const FusionConfig& config);
json serialize(const sparse::CvReport& report);
json serialize(const fusion::FusionReport& report);

OperatingPoint operating_point_from_json(const json& j);
TimeSeries timeseries_from_json(const json& j);
ArxModel arx_from_json(const json& j);
FeatureDescriptor feature_from_json(const json& j);
PNarxModel pnarx_from_json(const json& j);
FusionConfig config_from_json(const json& j);
sparse::CvReport cv_report_from_json(const json& j);

void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

/// TimeSeries CSV: header `k,u,y`, one row per sample, 12 significant digits.
void write_timeseries_csv(const std::string& path, const TimeSeries& ts);
TimeSeries read_timeseries_csv(const std::string& path, double dt = 1.0);

}  // namespace narx::io
