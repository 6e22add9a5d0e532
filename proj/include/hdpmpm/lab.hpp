#pragma once

#include <utility>
#include <vector>

#include "hdpmpm/data.hpp"
#include "hdpmpm/rng.hpp"

namespace hdpmpm {

/// Forward-model specification for synthetic data: a fixed set of true
/// profiles and global weights; each group's weight vector is drawn around
/// `beta` with concentration `alpha0` through the usual stick construction.
struct GenSpec {
  int n = 0;
  int p = 0;
  VectorXi levels;
  std::vector<std::vector<VectorXd>> profiles;  // [k][j] simplex of length levels[j]
  VectorXd beta;
  double alpha0 = 10.0;
};

struct SyntheticTruth {
  std::vector<std::vector<VectorXd>> profiles;
  VectorXd beta;
  RowMatrixXi z;
  RowMatrixXd pi;
};

std::pair<Dataset, SyntheticTruth> generate_synthetic(const GenSpec& spec, RandomStream& stream);

/// Masks each listed variable's cells independently with probability `rate`.
Dataset apply_mcar(const Dataset& ds, const std::vector<int>& vars, double rate,
                   RandomStream& stream);

/// Missing-at-random mask driven by main-effect logistic models on fully
/// observed predictors, dummy coded with level 1 as the reference.
struct MarSpec {
  std::vector<int> targets;     // variables to mask (0-based)
  std::vector<int> predictors;  // fully observed variables (0-based)
  // coefficients[t][q] holds levels[predictors[q]] - 1 entries for levels 2..D.
  std::vector<std::vector<VectorXd>> coefficients;
  std::vector<double> intercepts;  // ignored when auto_intercepts
  bool auto_intercepts = true;
  double target_rate = 0.3;
};

struct MarReport {
  std::vector<double> intercepts;
  std::vector<double> realized_rates;
};

Dataset apply_mar(const Dataset& ds, const MarSpec& spec, RandomStream& stream,
                  MarReport* report = nullptr);

/// Intercept such that the dataset-average of logistic(intercept + effects)
/// hits `target_rate`; closed form when the effects are constant, bisection
/// on the monotone mean-rate function otherwise.
double calibrate_intercept(const Dataset& ds, const std::vector<VectorXd>& coefficients,
                           const std::vector<int>& predictors, double target_rate);

}  // namespace hdpmpm
