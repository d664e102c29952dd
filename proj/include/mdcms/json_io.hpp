#pragma once
// JSON (de)serialization for distributions, models and rate reports.
#include <string>

#include "json.hpp"
#include "mdcms/model.hpp"
#include "mdcms/regions.hpp"

namespace mdcms {

using nlohmann::json;

// Round to 12 significant digits; applied to every floating-point value
// placed in a JSON report so re-runs diff clean.
double round12(double v);

json subset_to_json(const DescriptionSet& s);                    // [1,3]
std::string subset_key(const DescriptionSet& s);                 // "[1,3]"
DescriptionSet subset_from_json(const json& j, int total);
DescriptionSet subset_from_key(const std::string& key, int total);

json distribution_to_json(const JointDistribution& dist);
JointDistribution distribution_from_json(const json& j);

json model_to_json(const AuxModel& model);
AuxModel model_from_json(const json& j);
AuxModel load_model(const std::string& path);

json rates_report_to_json(const MinRatesResult& result);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

// FNV-1a 64-bit content digest, hex; used by run manifests.
std::string file_digest(const std::string& path);

}  // namespace mdcms
