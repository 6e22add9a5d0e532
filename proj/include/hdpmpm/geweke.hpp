#pragma once

#include <string>
#include <vector>

#include "hdpmpm/sampler.hpp"

namespace hdpmpm {

/// Joint-distribution sampler check on a small model: compares moments under
/// (i) direct prior + generative simulation against (ii) a Gibbs chain that
/// also resamples the full data each sweep. Both target the same joint law,
/// so every tracked statistic should agree up to Monte Carlo noise.
struct JointTestConfig {
  int n = 5;
  int p = 3;
  int levels = 2;     // common level count D_j
  int k = 3;
  double a = 0.25, b = 0.25, c = 0.25, d = 0.25;
  long replicates = 10000;
  int batches = 50;   // batch-means SE for the autocorrelated chain side
  std::uint64_t seed = 20240101;
  bool corrupt_step4 = false;  // swap the Step-4 Beta parameters (mutation check)
};

struct JointStatResult {
  std::string name;
  double marginal_mean = 0.0;
  double marginal_se = 0.0;
  double successive_mean = 0.0;
  double successive_se = 0.0;
  double z = 0.0;
};

struct JointTestReport {
  std::vector<JointStatResult> stats;
  long replicates = 0;
  int stat_count = 0;
  int within_three = 0;
  double max_abs_z = 0.0;

  bool empty() const { return stat_count == 0; }
  double fraction_within_three() const {
    return stat_count == 0 ? 1.0 : static_cast<double>(within_three) / stat_count;
  }
  bool pass(double required_fraction = 0.95) const {
    return fraction_within_three() >= required_fraction;
  }
};

JointTestReport validate_sampler(const JointTestConfig& cfg);

/// One exact draw from the prior + generative process at the harness's
/// dimensions (also used to start the successive-conditional chain at
/// stationarity).
ModelState joint_prior_draw(const Dataset& ds, const Hyperparameters& hp, RandomStream& stream);

}  // namespace hdpmpm
