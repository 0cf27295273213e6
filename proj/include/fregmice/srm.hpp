#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fregmice/basis.hpp"
#include "fregmice/dataset.hpp"
#include "fregmice/fpca.hpp"
#include "fregmice/penreg.hpp"
#include "fregmice/terms.hpp"

namespace fregmice {

/// Scalar response model g(mu) = theta_0 + z theta + sum_j \int X_j(t) beta_j(t) dt.
struct SrmSpec {
  std::string response;
  std::vector<std::string> scalar_terms;
  std::vector<std::string> functional_terms;
  Family family = Family::gaussian;
  bool intercept = true;
  BasisConfig basis{30};
  double pve = 0.99;
  std::map<std::string, BasisConfig> term_basis;

  std::vector<std::string> predictors() const;
  void validate(const MixedDataset& data) const;
};

struct SrmFunctionalTerm {
  std::string label;
  BSplineBasis basis;
  FpcaDecomposition fpca;
  Eigen::MatrixXd g;                // K x L, \int psi_u phi_v
  Eigen::RowVectorXd column_means;  // design centring (zero without intercept)
};

struct SrmFit {
  SrmSpec spec;
  std::vector<std::string> scalar_labels;  // intercept first when present
  std::vector<SrmFunctionalTerm> functional;
  std::vector<std::string> dropped;        // functional terms with K = 0
  PenalizedFit fit;

  TermEstimate estimate(const std::string& label) const;
  std::vector<TermEstimate> estimates() const;
};

SrmFit fit_srm(const MixedDataset& data, const SrmSpec& spec, const SmoothingOptions& options = {});

Eigen::VectorXd linear_predictor(const SrmFit& fit, const MixedDataset& data);
/// Mean on the response scale (identity or logistic).
Eigen::VectorXd predict_srm(const SrmFit& fit, const MixedDataset& data);

CoefficientCurve coefficient_function(const SrmFit& fit, const std::string& term, const Eigen::VectorXd& points);

}  // namespace fregmice
