#pragma once

// Posterior-mean profile fixtures for the survey application: two dominant
// response profiles over 23 three-level items, a split pair of sub-profiles
// of the larger one, and their published merge. Used by the analysis tests
// and the acceptance suite.

#include <array>
#include <string>
#include <vector>

#include "hdpmpm/analysis.hpp"

namespace fixtures {

constexpr int kVarCount = 23;
constexpr int kLevels = 3;

inline const std::array<std::string, kVarCount>& variable_names() {
  static const std::array<std::string, kVarCount> names = {
      "V162123", "V162134", "V162140", "V162145", "V162148", "V162158", "V162170", "V162176",
      "V162179", "V162180", "V162192", "V162193", "V162207", "V162208", "V162209", "V162212",
      "V162214", "V162231", "V162246", "V162260", "V162269", "V162271", "V162290"};
  return names;
}

constexpr double kLiberalProportion = 0.2849;
constexpr double kConservativeProportion = 0.1577;
constexpr double kSub1Proportion = 0.1157;
constexpr double kSub2Proportion = 0.1090;
constexpr double kMergedProportion = 0.2247;

constexpr double kLiberal[kVarCount][kLevels] = {
    {0.05, 0.20, 0.76}, {0.15, 0.83, 0.02}, {0.99, 0.00, 0.01}, {0.27, 0.12, 0.61},
    {0.82, 0.03, 0.15}, {0.00, 0.37, 0.62}, {0.03, 0.13, 0.84}, {0.65, 0.09, 0.26},
    {0.80, 0.04, 0.16}, {0.83, 0.01, 0.16}, {0.97, 0.03, 0.00}, {0.88, 0.00, 0.12},
    {0.75, 0.07, 0.18}, {0.06, 0.07, 0.87}, {0.95, 0.03, 0.01}, {0.96, 0.02, 0.02},
    {0.00, 0.03, 0.97}, {0.85, 0.00, 0.15}, {0.96, 0.03, 0.01}, {0.47, 0.11, 0.41},
    {0.00, 0.00, 1.00}, {0.01, 0.49, 0.50}, {0.02, 0.89, 0.09}};

constexpr double kConservative[kVarCount][kLevels] = {
    {0.53, 0.38, 0.09}, {0.49, 0.49, 0.02}, {0.14, 0.52, 0.34}, {0.79, 0.02, 0.19},
    {0.01, 0.95, 0.04}, {0.34, 0.63, 0.02}, {0.91, 0.07, 0.02}, {0.35, 0.37, 0.28},
    {0.17, 0.64, 0.20}, {0.14, 0.48, 0.37}, {0.07, 0.71, 0.23}, {0.01, 0.80, 0.20},
    {0.06, 0.03, 0.91}, {0.98, 0.01, 0.01}, {0.19, 0.19, 0.61}, {0.10, 0.01, 0.89},
    {0.84, 0.13, 0.04}, {0.03, 0.63, 0.35}, {0.20, 0.27, 0.53}, {0.65, 0.12, 0.24},
    {0.40, 0.31, 0.28}, {0.28, 0.62, 0.10}, {0.19, 0.78, 0.03}};

// Published posterior-mean cohesion ratios and disagreement scores.
constexpr double kLiberalCr[kVarCount] = {0.94, 0.98, 1.00, 0.81, 0.96, 1.00, 0.97, 0.86,
                                          0.95, 0.99, 1.00, 1.00, 0.90, 0.94, 0.99, 0.99,
                                          1.00, 1.00, 0.99, 0.76, 1.00, 0.98, 0.97};
constexpr double kDisagreement[kVarCount] = {1.00, 0.51, 1.00, 1.00, 1.00, 1.00, 1.00, 0.63,
                                             1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00,
                                             1.00, 1.00, 1.00, 0.07, 0.97, 0.55, 0.00};

// Rows whose disagreement is strictly between 0 and 1 (near-tied argmaxes in
// some draws): V162134, V162176, V162260, V162269, V162271.
constexpr int kNearTiedRows[5] = {1, 7, 19, 20, 21};

constexpr double kSub1[kVarCount][kLevels] = {
    {0.11, 0.21, 0.69}, {0.30, 0.69, 0.00}, {0.97, 0.01, 0.02}, {0.24, 0.10, 0.66},
    {0.64, 0.09, 0.27}, {0.00, 0.39, 0.61}, {0.02, 0.11, 0.87}, {0.80, 0.01, 0.19},
    {0.69, 0.05, 0.26}, {0.67, 0.01, 0.31}, {0.89, 0.11, 0.00}, {0.78, 0.01, 0.21},
    {0.70, 0.07, 0.23}, {0.03, 0.05, 0.93}, {0.96, 0.02, 0.01}, {0.90, 0.01, 0.09},
    {0.02, 0.03, 0.95}, {0.71, 0.01, 0.28}, {0.89, 0.06, 0.05}, {0.28, 0.11, 0.61},
    {0.00, 0.00, 0.99}, {0.01, 0.44, 0.55}, {0.06, 0.93, 0.01}};

constexpr double kSub2[kVarCount][kLevels] = {
    {0.01, 0.17, 0.82}, {0.04, 0.92, 0.04}, {0.98, 0.01, 0.01}, {0.30, 0.13, 0.57},
    {0.93, 0.01, 0.05}, {0.00, 0.32, 0.68}, {0.04, 0.12, 0.84}, {0.50, 0.18, 0.31},
    {0.92, 0.03, 0.05}, {0.94, 0.01, 0.05}, {0.99, 0.01, 0.00}, {0.94, 0.01, 0.05},
    {0.80, 0.08, 0.12}, {0.06, 0.05, 0.89}, {0.93, 0.04, 0.02}, {0.97, 0.02, 0.01},
    {0.01, 0.03, 0.96}, {0.93, 0.01, 0.06}, {0.98, 0.01, 0.01}, {0.65, 0.10, 0.25},
    {0.01, 0.01, 0.99}, {0.01, 0.48, 0.50}, {0.01, 0.82, 0.17}};

constexpr double kMerged[kVarCount][kLevels] = {
    {0.06, 0.19, 0.75}, {0.17, 0.80, 0.02}, {0.98, 0.01, 0.02}, {0.27, 0.11, 0.62},
    {0.78, 0.05, 0.16}, {0.00, 0.36, 0.64}, {0.03, 0.12, 0.85}, {0.66, 0.10, 0.25},
    {0.80, 0.04, 0.16}, {0.80, 0.01, 0.19}, {0.94, 0.06, 0.00}, {0.86, 0.01, 0.13},
    {0.75, 0.07, 0.18}, {0.05, 0.05, 0.91}, {0.95, 0.03, 0.02}, {0.93, 0.02, 0.05},
    {0.01, 0.03, 0.95}, {0.82, 0.01, 0.17}, {0.93, 0.04, 0.03}, {0.46, 0.11, 0.43},
    {0.00, 0.00, 0.99}, {0.01, 0.46, 0.53}, {0.04, 0.88, 0.09}};

inline hdpmpm::VectorXd row_vector(const double (&row)[kLevels]) {
  hdpmpm::VectorXd out(kLevels);
  for (int d = 0; d < kLevels; ++d) out[d] = row[d];
  return out;
}

/// ProfileSummary holding the listed profiles as posterior means, padded with
/// one tiny leftover cluster so the weights form a simplex.
inline hdpmpm::ProfileSummary
make_summary(const std::vector<const double (*)[kLevels]>& profiles,
             const std::vector<double>& proportions) {
  hdpmpm::ProfileSummary summary;
  const int k = static_cast<int>(profiles.size()) + 1;
  summary.mean_beta = hdpmpm::VectorXd::Zero(k);
  double used = 0.0;
  for (std::size_t c = 0; c < proportions.size(); ++c) {
    summary.mean_beta[static_cast<int>(c)] = proportions[c];
    used += proportions[c];
  }
  summary.mean_beta[k - 1] = 1.0 - used;
  summary.sd_beta = hdpmpm::VectorXd::Zero(k);
  summary.mean_phi.resize(kVarCount);
  summary.sd_phi.resize(kVarCount);
  for (int j = 0; j < kVarCount; ++j) {
    summary.mean_phi[j] = Eigen::MatrixXd::Constant(k, kLevels, 1.0 / kLevels);
    summary.sd_phi[j] = Eigen::MatrixXd::Zero(k, kLevels);
    for (std::size_t c = 0; c < profiles.size(); ++c) {
      for (int d = 0; d < kLevels; ++d) {
        summary.mean_phi[j](static_cast<int>(c), d) = profiles[c][j][d];
      }
    }
  }
  summary.draw_count = 1;
  return summary;
}

}  // namespace fixtures
