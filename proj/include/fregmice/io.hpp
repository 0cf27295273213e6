#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fregmice/dataset.hpp"
#include "fregmice/imputation.hpp"
#include "fregmice/pool.hpp"
#include "fregmice/simlab.hpp"
#include "fregmice/terms.hpp"

namespace fregmice {

using Json = nlohmann::json;
namespace fs = std::filesystem;

/// 17 significant digits; round-trips every double.
std::string format_double(double v);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);
Json read_json(const fs::path& path);
void write_json(const fs::path& path, const Json& j);

/// Sidecar layout: {"grids": {var: [t...]}, "binary": [var...], "ranges": {var: [lo, hi]}}.
MixedDataset parse_dataset(const std::string& csv, const Json& sidecar);
MixedDataset read_dataset(const fs::path& csv, const fs::path& sidecar);
Json sidecar_json(const MixedDataset& data);
/// Functional blocks expand to `<var>__t<g>` columns; missing cells are `NA`.
std::string format_dataset(const MixedDataset& data);
void write_dataset(const MixedDataset& data, const fs::path& csv);

BasisConfig parse_basis(const Json& j);
Json basis_config_json(const BasisConfig& b);
FrmSpec parse_frm_spec(const Json& j);
SrmSpec parse_srm_spec(const Json& j);
/// Uses "type" ("frm" / "srm") when present, otherwise the response kind in `data`.
ConditionalModel parse_model(const Json& j, const MixedDataset* data = nullptr);
Json model_json(const ConditionalModel& model);
ImputationSpec parse_imputation_spec(const Json& j, const MixedDataset& data);
ScenarioConfig parse_scenario(const Json& j);
Json scenario_json(const ScenarioConfig& c);

Json term_json(const TermEstimate& t);
TermEstimate parse_term(const Json& j);

/// Fit export: model description, smoothing summary and per-term estimates.
struct FitRecord {
  std::string model;  // frm or srm
  std::string response;
  std::string family;
  double dispersion = 0.0;
  double edf = 0.0;
  long n = 0;
  std::vector<std::pair<std::string, double>> lambdas;
  std::vector<TermEstimate> terms;
};

FitRecord fit_record(const FrmFit& fit);
FitRecord fit_record(const SrmFit& fit);
Json fit_json(const FitRecord& fit);
FitRecord parse_fit(const Json& j);

Json pooled_json(const std::vector<PooledCoefficient>& pooled, const BandOptions& options);
/// Header `term,t,estimate,se,lo,hi`; scalar terms use t = NA.
std::string format_bands(const std::vector<PooledCoefficient>& pooled, const BandOptions& options);

}  // namespace fregmice
