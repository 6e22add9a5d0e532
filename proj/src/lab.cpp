#include "hdpmpm/lab.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hdpmpm/errors.hpp"
#include "hdpmpm/sampler_detail.hpp"

namespace hdpmpm {

namespace {

void check_simplex(const VectorXd& values, const std::string& what) {
  if (values.size() < 1) throw std::invalid_argument(what + ": empty simplex");
  if (values.minCoeff() < 0.0 || std::abs(values.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument(what + ": entries must be non-negative and sum to 1");
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double r) { return std::log(r / (1.0 - r)); }

// Per-row linear predictor contributions (without the intercept).
VectorXd row_effects(const Dataset& ds, const std::vector<VectorXd>& coefficients,
                     const std::vector<int>& predictors) {
  if (coefficients.size() != predictors.size()) {
    throw std::invalid_argument("mar: one coefficient vector per predictor is required");
  }
  VectorXd effects = VectorXd::Zero(ds.n());
  for (std::size_t q = 0; q < predictors.size(); ++q) {
    const int j = predictors[q];
    if (j < 0 || j >= ds.p()) throw std::invalid_argument("mar: predictor index out of range");
    if (coefficients[q].size() != ds.levels[j] - 1) {
      throw std::invalid_argument("mar: predictor " + std::to_string(j + 1) + " needs " +
                                  std::to_string(ds.levels[j] - 1) + " coefficients");
    }
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (ds.mask(i, j) != 0) {
        throw DataError("mar: predictor " + std::to_string(j + 1) +
                        " has missing values; predictors must be fully observed");
      }
      const int level = ds.cells(i, j);
      if (level >= 2) effects[i] += coefficients[q][level - 2];
    }
  }
  return effects;
}

}  // namespace

std::pair<Dataset, SyntheticTruth> generate_synthetic(const GenSpec& spec, RandomStream& stream) {
  if (spec.n < 1 || spec.p < 1) throw std::invalid_argument("genspec: n and p must be positive");
  if (spec.levels.size() != spec.p) throw std::invalid_argument("genspec: levels size != p");
  const int k_true = static_cast<int>(spec.beta.size());
  if (k_true < 1) throw std::invalid_argument("genspec: at least one profile required");
  check_simplex(spec.beta, "genspec beta");
  if (static_cast<int>(spec.profiles.size()) != k_true) {
    throw std::invalid_argument("genspec: one profile per beta entry required");
  }
  for (const auto& profile : spec.profiles) {
    if (static_cast<int>(profile.size()) != spec.p) {
      throw std::invalid_argument("genspec: each profile needs one simplex per variable");
    }
    for (int j = 0; j < spec.p; ++j) {
      if (profile[j].size() != spec.levels[j]) {
        throw std::invalid_argument("genspec: profile simplex length != levels");
      }
      check_simplex(profile[j], "genspec profile");
    }
  }
  if (!(spec.alpha0 > 0.0)) throw std::invalid_argument("genspec: alpha0 must be positive");

  SyntheticTruth truth;
  truth.profiles = spec.profiles;
  truth.beta = spec.beta;
  truth.z.resize(spec.n, spec.p);
  truth.pi.resize(spec.n, k_true);

  RowMatrixXi cells(spec.n, spec.p);
  Eigen::RowVectorXd u_row(k_true);
  for (int i = 0; i < spec.n; ++i) {
    detail::draw_group_sticks(spec.beta, spec.alpha0, nullptr, stream, false, u_row,
                              truth.pi.row(i));
    for (int j = 0; j < spec.p; ++j) {
      const int cluster = categorical_draw(stream, truth.pi.row(i).transpose());
      truth.z(i, j) = cluster;
      cells(i, j) = categorical_draw(stream, spec.profiles[cluster][j]) + 1;
    }
  }
  return {make_dataset(cells, spec.levels), std::move(truth)};
}

Dataset apply_mcar(const Dataset& ds, const std::vector<int>& vars, double rate,
                   RandomStream& stream) {
  if (!(rate >= 0.0) || rate >= 1.0) throw std::invalid_argument("mcar: rate must be in [0,1)");
  Dataset masked = ds;
  for (int j : vars) {
    if (j < 0 || j >= ds.p()) throw std::invalid_argument("mcar: variable index out of range");
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (bernoulli_draw(stream, rate) == 1) {
        masked.cells(i, j) = kMissingCell;
        masked.mask(i, j) = 1;
      }
    }
  }
  return masked;
}

double calibrate_intercept(const Dataset& ds, const std::vector<VectorXd>& coefficients,
                           const std::vector<int>& predictors, double target_rate) {
  if (!(target_rate > 0.0) || !(target_rate < 1.0)) {
    throw std::invalid_argument("calibrate_intercept: target_rate must be in (0,1)");
  }
  const VectorXd effects = row_effects(ds, coefficients, predictors);
  const double lo_effect = effects.minCoeff();
  const double hi_effect = effects.maxCoeff();
  if (lo_effect == hi_effect) return logit(target_rate) - lo_effect;

  auto mean_rate = [&](double intercept) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < effects.size(); ++i) acc += sigmoid(intercept + effects[i]);
    return acc / static_cast<double>(effects.size());
  };
  // mean_rate is continuous and strictly increasing; these ends bracket it.
  double lo = logit(target_rate) - hi_effect;
  double hi = logit(target_rate) - lo_effect;
  for (int it = 0; it < 200 && hi - lo > 1e-11; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_rate(mid) < target_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Dataset apply_mar(const Dataset& ds, const MarSpec& spec, RandomStream& stream,
                  MarReport* report) {
  if (spec.targets.empty()) throw std::invalid_argument("mar: no target variables");
  if (spec.coefficients.size() != spec.targets.size()) {
    throw std::invalid_argument("mar: one coefficient set per target is required");
  }
  if (!spec.auto_intercepts && spec.intercepts.size() != spec.targets.size()) {
    throw std::invalid_argument("mar: one intercept per target is required");
  }
  for (int t : spec.targets) {
    for (int q : spec.predictors) {
      if (t == q) throw std::invalid_argument("mar: target and predictor sets must be disjoint");
    }
  }

  Dataset masked = ds;
  if (report != nullptr) {
    report->intercepts.clear();
    report->realized_rates.clear();
  }
  for (std::size_t ti = 0; ti < spec.targets.size(); ++ti) {
    const int j = spec.targets[ti];
    if (j < 0 || j >= ds.p()) throw std::invalid_argument("mar: target index out of range");
    const VectorXd effects = row_effects(ds, spec.coefficients[ti], spec.predictors);
    const double intercept =
        spec.auto_intercepts
            ? calibrate_intercept(ds, spec.coefficients[ti], spec.predictors, spec.target_rate)
            : spec.intercepts[ti];
    long masked_count = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (bernoulli_draw(stream, sigmoid(intercept + effects[i])) == 1) {
        masked.cells(i, j) = kMissingCell;
        masked.mask(i, j) = 1;
        ++masked_count;
      }
    }
    if (report != nullptr) {
      report->intercepts.push_back(intercept);
      report->realized_rates.push_back(static_cast<double>(masked_count) /
                                       static_cast<double>(ds.n()));
    }
  }
  return masked;
}

}  // namespace hdpmpm
