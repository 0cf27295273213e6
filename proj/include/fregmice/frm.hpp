#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fregmice/basis.hpp"
#include "fregmice/dataset.hpp"
#include "fregmice/penreg.hpp"
#include "fregmice/terms.hpp"

namespace fregmice {

inline const std::string kInterceptLabel = "(Intercept)";

/// Functional response model Y(t) = b0(t) + sum_j z_j b_j(t) + sum_k \int X_k(s) rho_k(s,t) ds + e(t).
struct FrmSpec {
  std::string response;
  std::vector<std::string> scalar_terms;
  std::vector<std::string> ff_terms;
  bool intercept = true;
  BasisConfig basis{20};    // coefficient functions over t
  BasisConfig ff_basis{8};  // both margins of each surface
  std::map<std::string, BasisConfig> term_basis;  // per-term override

  std::vector<std::string> predictors() const;
  void validate(const MixedDataset& data) const;
};

struct FrmTerm {
  std::string label;
  TermShape shape = TermShape::curve;
  BSplineBasis t_basis;
  std::optional<BSplineBasis> s_basis;  // surfaces
  GridPtr s_grid;                       // surfaces: predictor grid
};

struct FrmFit {
  FrmSpec spec;
  GridPtr grid;  // response grid
  std::vector<FrmTerm> terms;
  PenalizedFit fit;

  TermEstimate estimate(const std::string& label) const;
  std::vector<TermEstimate> estimates() const;
};

/// Fits on every row of `data`; all model variables must be observed.
FrmFit fit_frm(const MixedDataset& data, const FrmSpec& spec, const SmoothingOptions& options = {});

/// Fitted mean curves, one row per data row (n x G).
Eigen::MatrixXd predict_frm(const FrmFit& fit, const MixedDataset& data);

/// Y_i(t) - mu_i(t).
Eigen::MatrixXd residual_curves(const FrmFit& fit, const MixedDataset& data);

CoefficientCurve coefficient_function(const FrmFit& fit, const std::string& term,
                                      const Eigen::VectorXd& points);

}  // namespace fregmice
