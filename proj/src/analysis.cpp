#include "hdpmpm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace hdpmpm {

namespace {

int argmax_lowest(const Eigen::Ref<const VectorXd>& values, bool& tie) {
  int best = 0;
  for (Eigen::Index d = 1; d < values.size(); ++d) {
    if (values[d] > values[best]) best = static_cast<int>(d);
  }
  tie = false;
  for (Eigen::Index d = 0; d < values.size(); ++d) {
    if (static_cast<int>(d) != best && values[d] == values[best]) tie = true;
  }
  return best;
}

}  // namespace

ProfileSummary summarize(const PosteriorDraws& draws) {
  if (draws.draws.empty()) throw std::invalid_argument("summarize: no draws");
  const ModelState& first = draws.draws.front();
  const int k = first.k();
  const Eigen::Index p = static_cast<Eigen::Index>(first.phi.size());
  const double count = static_cast<double>(draws.draws.size());

  ProfileSummary summary;
  summary.draw_count = static_cast<long>(draws.draws.size());
  summary.has_pi = draws.has_pi;

  summary.mean_beta = VectorXd::Zero(k);
  VectorXd beta_sq = VectorXd::Zero(k);
  std::vector<Eigen::MatrixXd> phi_sq(p);
  summary.mean_phi.resize(p);
  summary.sd_phi.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    summary.mean_phi[j] = Eigen::MatrixXd::Zero(first.phi[j].rows(), first.phi[j].cols());
    phi_sq[j] = summary.mean_phi[j];
  }
  if (draws.has_pi) summary.mean_pi = RowMatrixXd::Zero(first.pi.rows(), first.pi.cols());

  for (const ModelState& state : draws.draws) {
    summary.mean_beta += state.beta;
    beta_sq += state.beta.cwiseProduct(state.beta);
    for (Eigen::Index j = 0; j < p; ++j) {
      summary.mean_phi[j] += state.phi[j];
      phi_sq[j] += state.phi[j].cwiseProduct(state.phi[j]);
    }
    if (draws.has_pi) summary.mean_pi += state.pi;
  }
  summary.mean_beta /= count;
  beta_sq /= count;
  summary.sd_beta =
      (beta_sq - summary.mean_beta.cwiseProduct(summary.mean_beta)).cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index j = 0; j < p; ++j) {
    summary.mean_phi[j] /= count;
    phi_sq[j] /= count;
    summary.sd_phi[j] = (phi_sq[j] - summary.mean_phi[j].cwiseProduct(summary.mean_phi[j]))
                            .cwiseMax(0.0)
                            .cwiseSqrt();
  }
  if (draws.has_pi) summary.mean_pi /= count;
  return summary;
}

std::vector<int> dominant_profiles(const ProfileSummary& summary, double threshold) {
  std::vector<int> order(static_cast<std::size_t>(summary.mean_beta.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return summary.mean_beta[a] > summary.mean_beta[b];
  });
  std::vector<int> dominant;
  for (int c : order) {
    if (summary.mean_beta[c] > threshold) dominant.push_back(c);
  }
  return dominant;
}

double cohesion_ratio(const Eigen::Ref<const VectorXd>& phi_row) {
  const double max = phi_row.maxCoeff();
  const double min = phi_row.minCoeff();
  if (!(max > 0.0)) return 0.0;
  return (max - min) / max;
}

double cohesion_ratio_unbounded(const Eigen::Ref<const VectorXd>& phi_row) {
  const double max = phi_row.maxCoeff();
  const double min = phi_row.minCoeff();
  if (min <= 0.0) return std::numeric_limits<double>::infinity();
  return max / min;
}

Disagreement disagreement_score(const Eigen::Ref<const VectorXd>& phi_a,
                                const Eigen::Ref<const VectorXd>& phi_b) {
  if (phi_a.size() != phi_b.size()) {
    throw std::invalid_argument("disagreement_score: profiles have different level counts");
  }
  bool tie_a = false, tie_b = false;
  const int mode_a = argmax_lowest(phi_a, tie_a);
  const int mode_b = argmax_lowest(phi_b, tie_b);
  return {mode_a != mode_b ? 1 : 0, tie_a || tie_b};
}

FunctionalReport posterior_functionals(const PosteriorDraws& draws,
                                       const std::vector<int>& profiles,
                                       std::pair<int, int> pair) {
  if (draws.draws.empty()) throw std::invalid_argument("posterior_functionals: no draws");
  const int k = draws.draws.front().k();
  for (int c : profiles) {
    if (c < 0 || c >= k) throw std::invalid_argument("posterior_functionals: profile out of range");
  }
  if (pair.first < 0 || pair.first >= k || pair.second < 0 || pair.second >= k) {
    throw std::invalid_argument("posterior_functionals: pair out of range");
  }
  const Eigen::Index p = static_cast<Eigen::Index>(draws.draws.front().phi.size());
  FunctionalReport report;
  report.profiles = profiles;
  report.pair = pair;
  report.cr_mean = Eigen::MatrixXd::Zero(p, static_cast<Eigen::Index>(profiles.size()));
  report.dr_mean = VectorXd::Zero(p);
  report.tie_rate = VectorXd::Zero(p);

  for (const ModelState& state : draws.draws) {
    for (Eigen::Index j = 0; j < p; ++j) {
      for (std::size_t c = 0; c < profiles.size(); ++c) {
        report.cr_mean(j, static_cast<Eigen::Index>(c)) +=
            cohesion_ratio(state.phi[j].row(profiles[c]).transpose());
      }
      const Disagreement dr = disagreement_score(state.phi[j].row(pair.first).transpose(),
                                                 state.phi[j].row(pair.second).transpose());
      report.dr_mean[j] += dr.value;
      report.tie_rate[j] += dr.tie ? 1.0 : 0.0;
    }
  }
  const double count = static_cast<double>(draws.draws.size());
  report.cr_mean /= count;
  report.dr_mean /= count;
  report.tie_rate /= count;
  return report;
}

MembershipReport membership_summary(const ProfileSummary& summary, double person_threshold) {
  if (!summary.has_pi || summary.mean_pi.size() == 0) {
    throw std::invalid_argument(
        "membership_summary: draws carry no pi (store_pi was off); refit or rerun with pi");
  }
  MembershipReport report;
  report.threshold = person_threshold;
  const Eigen::Index n = summary.mean_pi.rows();
  const Eigen::Index k = summary.mean_pi.cols();
  report.dominant_count = VectorXi::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    int count = 0;
    int modal = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (summary.mean_pi(i, c) > person_threshold) ++count;
      if (summary.mean_pi(i, c) > summary.mean_pi(i, modal)) modal = static_cast<int>(c);
    }
    report.dominant_count[i] = count;
    report.histogram[count] += 1;
    report.modal_share[modal] += 1.0;
  }
  for (auto& entry : report.modal_share) entry.second /= static_cast<double>(n);
  return report;
}

MergedProfile merge_profiles(const ProfileSummary& summary, const std::vector<int>& indices) {
  if (indices.size() < 2) throw std::invalid_argument("merge_profiles: need at least 2 profiles");
  std::set<int> unique(indices.begin(), indices.end());
  if (unique.size() != indices.size()) {
    throw std::invalid_argument("merge_profiles: duplicate profile indices");
  }
  for (int c : indices) {
    if (c < 0 || c >= summary.mean_beta.size()) {
      throw std::invalid_argument("merge_profiles: profile index out of range");
    }
  }
  MergedProfile merged;
  for (int c : indices) merged.proportion += summary.mean_beta[c];
  const Eigen::Index p = static_cast<Eigen::Index>(summary.mean_phi.size());
  merged.phi.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    VectorXd acc = VectorXd::Zero(summary.mean_phi[j].cols());
    for (int c : indices) {
      acc += summary.mean_beta[c] * summary.mean_phi[j].row(c).transpose();
    }
    merged.phi[j] = acc / merged.proportion;
  }
  return merged;
}

VectorXd trace(const PosteriorDraws& draws, const TraceSelector& selector) {
  const Eigen::Index count = static_cast<Eigen::Index>(draws.draws.size());
  VectorXd series(count);
  switch (selector.kind) {
    case TraceSelector::Kind::kBeta: {
      if (count > 0 && (selector.k < 0 || selector.k >= draws.draws.front().k())) {
        throw std::invalid_argument("trace: beta index out of range");
      }
      for (Eigen::Index r = 0; r < count; ++r) series[r] = draws.draws[r].beta[selector.k];
      return series;
    }
    case TraceSelector::Kind::kGamma: {
      for (Eigen::Index r = 0; r < count; ++r) series[r] = draws.draws[r].gamma;
      return series;
    }
    case TraceSelector::Kind::kAlpha0: {
      for (Eigen::Index r = 0; r < count; ++r) series[r] = draws.draws[r].alpha0;
      return series;
    }
    case TraceSelector::Kind::kOccupiedCount: {
      // In-memory chains carry one entry per sweep; loaded draw files carry
      // one entry per stored draw.
      const std::size_t per_sweep = draws.occupied_counts.size();
      for (Eigen::Index r = 0; r < count; ++r) {
        if (per_sweep == draws.draws.size()) {
          series[r] = draws.occupied_counts[static_cast<std::size_t>(r)];
        } else {
          const long sweep = draws.kept_iterations[static_cast<std::size_t>(r)];
          if (sweep < 1 || static_cast<std::size_t>(sweep) > per_sweep) {
            throw std::invalid_argument("trace: occupied counts unavailable for stored draws");
          }
          series[r] = draws.occupied_counts[static_cast<std::size_t>(sweep - 1)];
        }
      }
      return series;
    }
    case TraceSelector::Kind::kMarginalProb: {
      for (Eigen::Index r = 0; r < count; ++r) {
        const ModelState& state = draws.draws[r];
        if (selector.j < 0 || selector.j >= static_cast<int>(state.phi.size()) ||
            selector.d < 0 || selector.d >= state.phi[selector.j].cols()) {
          throw std::invalid_argument("trace: marginal_prob indices out of range");
        }
        series[r] = state.beta.dot(state.phi[selector.j].col(selector.d));
      }
      return series;
    }
  }
  throw std::invalid_argument("trace: unknown selector");
}

namespace {

double profile_distance(const ProfileSummary& summary, int est,
                        const std::vector<VectorXd>& truth) {
  const Eigen::Index p = static_cast<Eigen::Index>(summary.mean_phi.size());
  double acc = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    acc += 0.5 * (summary.mean_phi[j].row(est).transpose() - truth[j]).cwiseAbs().sum();
  }
  return acc / static_cast<double>(p);
}

}  // namespace

MatchReport match_profiles(const ProfileSummary& summary,
                           const std::vector<std::vector<VectorXd>>& truth_profiles,
                           const VectorXd& truth_beta, double threshold) {
  if (truth_profiles.empty()) throw std::invalid_argument("match_profiles: empty truth");
  const std::vector<int> dominant = dominant_profiles(summary, threshold);
  const int n_truth = static_cast<int>(truth_profiles.size());
  const int n_est = static_cast<int>(dominant.size());
  const int n_match = std::min(n_truth, n_est);

  MatchReport report;
  report.partial = n_est < n_truth;
  if (n_match == 0) return report;

  Eigen::MatrixXd cost(n_est, n_truth);
  for (int e = 0; e < n_est; ++e) {
    for (int t = 0; t < n_truth; ++t) {
      cost(e, t) = profile_distance(summary, dominant[static_cast<std::size_t>(e)],
                                    truth_profiles[static_cast<std::size_t>(t)]);
    }
  }

  // Pick the injection of truths into estimates with minimum total distance;
  // exhaustive for small sets, greedy beyond that.
  std::vector<int> best_est_for_truth(static_cast<std::size_t>(n_truth), -1);
  if (std::max(n_est, n_truth) <= 8) {
    std::vector<int> est_ids(static_cast<std::size_t>(n_est));
    std::iota(est_ids.begin(), est_ids.end(), 0);
    std::vector<int> truth_ids(static_cast<std::size_t>(n_truth));
    std::iota(truth_ids.begin(), truth_ids.end(), 0);
    double best_total = std::numeric_limits<double>::infinity();
    if (n_est >= n_truth) {
      std::sort(est_ids.begin(), est_ids.end());
      do {
        double total = 0.0;
        for (int t = 0; t < n_truth; ++t) total += cost(est_ids[static_cast<std::size_t>(t)], t);
        if (total < best_total) {
          best_total = total;
          for (int t = 0; t < n_truth; ++t) {
            best_est_for_truth[static_cast<std::size_t>(t)] = est_ids[static_cast<std::size_t>(t)];
          }
        }
      } while (std::next_permutation(est_ids.begin(), est_ids.end()));
    } else {
      std::sort(truth_ids.begin(), truth_ids.end());
      do {
        double total = 0.0;
        for (int e = 0; e < n_est; ++e) total += cost(e, truth_ids[static_cast<std::size_t>(e)]);
        if (total < best_total) {
          best_total = total;
          std::fill(best_est_for_truth.begin(), best_est_for_truth.end(), -1);
          for (int e = 0; e < n_est; ++e) {
            best_est_for_truth[static_cast<std::size_t>(truth_ids[static_cast<std::size_t>(e)])] = e;
          }
        }
      } while (std::next_permutation(truth_ids.begin(), truth_ids.end()));
    }
  } else {
    std::vector<bool> est_used(static_cast<std::size_t>(n_est), false);
    for (int t = 0; t < n_truth; ++t) {
      int best = -1;
      for (int e = 0; e < n_est; ++e) {
        if (est_used[static_cast<std::size_t>(e)]) continue;
        if (best < 0 || cost(e, t) < cost(best, t)) best = e;
      }
      if (best >= 0) {
        est_used[static_cast<std::size_t>(best)] = true;
        best_est_for_truth[static_cast<std::size_t>(t)] = best;
      }
    }
  }

  std::vector<double> max_errors, mean_errors, est_props, true_props;
  const Eigen::Index p = static_cast<Eigen::Index>(summary.mean_phi.size());
  for (int t = 0; t < n_truth; ++t) {
    const int e = best_est_for_truth[static_cast<std::size_t>(t)];
    if (e < 0) continue;
    const int cluster = dominant[static_cast<std::size_t>(e)];
    report.assignment.emplace_back(cluster, t);
    double max_err = 0.0, sum_err = 0.0;
    long cells = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const VectorXd diff = (summary.mean_phi[j].row(cluster).transpose() -
                             truth_profiles[static_cast<std::size_t>(t)][j])
                                .cwiseAbs();
      max_err = std::max(max_err, diff.maxCoeff());
      sum_err += diff.sum();
      cells += diff.size();
    }
    max_errors.push_back(max_err);
    mean_errors.push_back(sum_err / static_cast<double>(cells));
    est_props.push_back(summary.mean_beta[cluster]);
    true_props.push_back(truth_beta[t]);
  }
  report.max_abs_error = Eigen::Map<VectorXd>(max_errors.data(), static_cast<Eigen::Index>(max_errors.size()));
  report.mean_abs_error = Eigen::Map<VectorXd>(mean_errors.data(), static_cast<Eigen::Index>(mean_errors.size()));
  report.est_proportion = Eigen::Map<VectorXd>(est_props.data(), static_cast<Eigen::Index>(est_props.size()));
  report.true_proportion = Eigen::Map<VectorXd>(true_props.data(), static_cast<Eigen::Index>(true_props.size()));
  return report;
}

}  // namespace hdpmpm
