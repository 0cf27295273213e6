#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fregmice/dataset.hpp"
#include "fregmice/frm.hpp"
#include "fregmice/penreg.hpp"
#include "fregmice/rng.hpp"
#include "fregmice/srm.hpp"

namespace fregmice {

/// Conditional model of one incomplete variable: an SRM for scalar targets,
/// an FRM for functional targets.
using ConditionalModel = std::variant<SrmSpec, FrmSpec>;

const std::string& model_response(const ConditionalModel& model);

/// Every other column as a predictor: scalar targets get an SRM (bernoulli
/// for binary columns), functional targets an FRM with the scalar columns as
/// coefficient-function terms and the other functional columns as surfaces.
ConditionalModel default_model(const MixedDataset& data, const std::string& target);

struct ImputationSpec {
  int M = 5;
  int V = 20;
  std::uint64_t seed = 1;
  std::map<std::string, ConditionalModel> models;  // missing entries use default_model
  std::optional<std::vector<std::string>> visit_order;
  double residual_pve = 0.99;
  SmoothingOptions smoothing;
  bool parallel = true;  // run streams concurrently

  void validate(const MixedDataset& data) const;
};

/// Summary of the imputed cells of one variable after one visit. Scalars have
/// length-1 vectors; functional variables pointwise curves.
struct TraceRecord {
  int stream = 0;
  int iteration = 0;
  std::string variable;
  Eigen::VectorXd t;  // grid of functional variables, empty for scalars
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

/// A visit that fell back to hot-deck draws.
struct ImputationEvent {
  int stream = 0;
  int iteration = 0;
  std::string variable;
  std::string reason;
};

struct ImputationRun {
  std::uint64_t seed = 0;
  int M = 0;
  int V = 0;
  std::vector<std::string> order;
  std::vector<MixedDataset> datasets;  // M completed datasets, no missing cells
  std::vector<TraceRecord> traces;     // stream-major, then iteration, then visit order
  std::vector<ImputationEvent> events;
};

/// Incomplete variables by ascending missing count, ties by column position.
std::vector<std::string> order_variables(const MixedDataset& data);

/// Hot-deck fill of every missing cell (whole curves for functional columns).
/// The result has every cell marked observed.
MixedDataset initialize_fill(const MixedDataset& data, Rng& rng);

struct VisitResult {
  bool fallback = false;
  std::string reason;
};

/// One chained-equations update of `target` in the filled dataset `current`.
/// Only rows with original_mask == 0 change.
VisitResult impute_variable_once(MixedDataset& current, const std::string& target, const ConditionalModel& model,
                                 const std::vector<unsigned char>& original_mask, Rng& rng,
                                 double residual_pve = 0.99, const SmoothingOptions& smoothing = {});

ImputationRun run_fregmice(const MixedDataset& data, const ImputationSpec& spec);

/// Runs fregMICE separately within each level of a fully observed scalar
/// column and reassembles the rows in their original order.
ImputationRun run_fregmice_grouped(const MixedDataset& data, const ImputationSpec& spec, const std::string& group);

struct TraceRow {
  int stream = 0;
  int iteration = 0;
  std::string variable;
  std::string statistic;  // mean, sd, pointwise-mean, pointwise-sd
  std::optional<double> t;
  double value = 0.0;
};

struct StreamSlope {
  int stream = 0;
  std::string variable;
  double slope = 0.0;
  bool flagged = false;
};

struct StreamDiagnostics {
  std::vector<TraceRow> rows;
  std::vector<StreamSlope> slopes;
};

StreamDiagnostics stream_diagnostics(const ImputationRun& run);

}  // namespace fregmice
