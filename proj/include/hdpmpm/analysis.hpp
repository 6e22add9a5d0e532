#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hdpmpm/sampler.hpp"

namespace hdpmpm {

/// Elementwise posterior means and SDs across relabeled draws. SDs use the
/// population convention (divide by draw_count).
struct ProfileSummary {
  VectorXd mean_beta;
  VectorXd sd_beta;
  std::vector<Eigen::MatrixXd> mean_phi;  // per variable j: k x D_j
  std::vector<Eigen::MatrixXd> sd_phi;
  RowMatrixXd mean_pi;  // empty when the draws carry no pi
  long draw_count = 0;
  bool has_pi = false;
};

ProfileSummary summarize(const PosteriorDraws& draws);

/// Cluster indices with mean weight above the threshold, largest first.
std::vector<int> dominant_profiles(const ProfileSummary& summary, double threshold = 0.1);

/// (max - min) / max over one response simplex; 0 for a uniform profile, 1
/// when some level has zero mass.
double cohesion_ratio(const Eigen::Ref<const VectorXd>& phi_row);

/// The unbounded max/min variant; +infinity when the minimum is zero.
double cohesion_ratio_unbounded(const Eigen::Ref<const VectorXd>& phi_row);

struct Disagreement {
  int value = 0;  // 1 iff the modal levels differ
  bool tie = false;
};

/// Indicator that two profiles put their modal mass on different levels.
/// Ties resolve to the lowest level index and raise the tie flag.
Disagreement disagreement_score(const Eigen::Ref<const VectorXd>& phi_a,
                                const Eigen::Ref<const VectorXd>& phi_b);

/// Per-draw functionals averaged across draws (not functionals of the
/// averaged profiles).
struct FunctionalReport {
  std::vector<int> profiles;            // cluster indices the CR columns refer to
  std::pair<int, int> pair{0, 0};       // clusters the DR column compares
  Eigen::MatrixXd cr_mean;              // p x profiles.size()
  VectorXd dr_mean;                     // p
  VectorXd tie_rate;                    // p, fraction of draws with an argmax tie
};

FunctionalReport posterior_functionals(const PosteriorDraws& draws,
                                       const std::vector<int>& profiles,
                                       std::pair<int, int> pair);

struct MembershipReport {
  VectorXi dominant_count;          // per person: #{k : mean pi_ik > threshold}
  std::map<int, long> histogram;    // dominant count -> number of persons
  std::map<int, double> modal_share;  // cluster -> fraction of persons modal there
  double threshold = 0.1;
};

MembershipReport membership_summary(const ProfileSummary& summary, double person_threshold = 0.1);

struct MergedProfile {
  double proportion = 0.0;
  std::vector<VectorXd> phi;  // per variable
};

/// Weight-averaged combination of the listed profiles; the merged proportion
/// is exactly the sum of the inputs' mean weights.
MergedProfile merge_profiles(const ProfileSummary& summary, const std::vector<int>& indices);

struct TraceSelector {
  enum class Kind { kBeta, kGamma, kAlpha0, kOccupiedCount, kMarginalProb };
  Kind kind = Kind::kGamma;
  int k = 0;  // cluster for kBeta
  int j = 0;  // variable for kMarginalProb
  int d = 0;  // level (0-based) for kMarginalProb

  static TraceSelector beta(int k) { return {Kind::kBeta, k, 0, 0}; }
  static TraceSelector gamma() { return {Kind::kGamma, 0, 0, 0}; }
  static TraceSelector alpha0() { return {Kind::kAlpha0, 0, 0, 0}; }
  static TraceSelector occupied() { return {Kind::kOccupiedCount, 0, 0, 0}; }
  static TraceSelector marginal_prob(int j, int d) { return {Kind::kMarginalProb, 0, j, d}; }
};

/// One value per stored draw. marginal_prob(j,d) = sum_k beta_k phi^(j)_kd is
/// invariant under relabeling.
VectorXd trace(const PosteriorDraws& draws, const TraceSelector& selector);

struct MatchReport {
  std::vector<std::pair<int, int>> assignment;  // (estimated cluster, truth index)
  VectorXd max_abs_error;                       // per matched pair, over all (j,d)
  VectorXd mean_abs_error;
  VectorXd est_proportion;
  VectorXd true_proportion;
  bool partial = false;  // fewer dominant profiles than truths
};

/// Matches estimated dominant profiles to truth profiles by total-variation
/// distance (exhaustive for small counts, greedy otherwise).
MatchReport match_profiles(const ProfileSummary& summary,
                           const std::vector<std::vector<VectorXd>>& truth_profiles,
                           const VectorXd& truth_beta, double threshold = 0.1);

}  // namespace hdpmpm
