#include "hdpmpm/geweke.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hdpmpm/sampler_detail.hpp"

namespace hdpmpm {

namespace {

Dataset all_missing_dataset(int n, int p, int levels) {
  Dataset ds;
  ds.cells = RowMatrixXi::Zero(n, p);
  ds.mask = MaskMatrix::Constant(n, p, 1);
  ds.levels = VectorXi::Constant(p, levels);
  for (int j = 0; j < p; ++j) ds.variable_names.push_back("v" + std::to_string(j + 1));
  return ds;
}

struct StatDef {
  std::string name;
  std::function<double(const ModelState&)> eval;
};

std::vector<StatDef> build_stats(int n, int p, int k) {
  std::vector<StatDef> defs;
  auto add = [&](std::string name, std::function<double(const ModelState&)> fn) {
    defs.push_back({std::move(name), std::move(fn)});
  };
  for (int c = 0; c < k; ++c) {
    add("beta[" + std::to_string(c) + "]", [c](const ModelState& s) { return s.beta[c]; });
    add("beta2[" + std::to_string(c) + "]",
        [c](const ModelState& s) { return s.beta[c] * s.beta[c]; });
  }
  add("gamma", [](const ModelState& s) { return s.gamma; });
  add("gamma2", [](const ModelState& s) { return s.gamma * s.gamma; });
  add("alpha0", [](const ModelState& s) { return s.alpha0; });
  add("alpha02", [](const ModelState& s) { return s.alpha0 * s.alpha0; });
  for (int j = 0; j < p; ++j) {
    for (int c = 0; c < k; ++c) {
      add("phi[" + std::to_string(j) + "][" + std::to_string(c) + "][0]",
          [j, c](const ModelState& s) { return s.phi[j](c, 0); });
      add("phi2[" + std::to_string(j) + "][" + std::to_string(c) + "][0]",
          [j, c](const ModelState& s) { return s.phi[j](c, 0) * s.phi[j](c, 0); });
      add("beta*phi[" + std::to_string(j) + "][" + std::to_string(c) + "]",
          [j, c](const ModelState& s) { return s.beta[c] * s.phi[j](c, 0); });
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      add("x1[" + std::to_string(i) + "][" + std::to_string(j) + "]",
          [i, j](const ModelState& s) { return s.x(i, j) == 1 ? 1.0 : 0.0; });
      add("z0[" + std::to_string(i) + "][" + std::to_string(j) + "]",
          [i, j](const ModelState& s) { return s.z(i, j) == 0 ? 1.0 : 0.0; });
    }
    for (int c = 0; c < k; ++c) {
      add("pi[" + std::to_string(i) + "][" + std::to_string(c) + "]",
          [i, c](const ModelState& s) { return s.pi(i, c); });
    }
  }
  return defs;
}

// Mean and standard error of the mean for iid replicates.
void iid_moments(const std::vector<double>& values, double& mean, double& se) {
  const double count = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  mean = sum / count;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  se = std::sqrt(ss / count / count);
}

// Batch-means standard error for one autocorrelated series.
void batch_moments(const std::vector<double>& values, int batches, double& mean, double& se) {
  const long count = static_cast<long>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  mean = sum / static_cast<double>(count);
  const int b = static_cast<int>(std::max<long>(2, std::min<long>(batches, count)));
  const long batch_size = count / b;
  std::vector<double> batch_means;
  batch_means.reserve(b);
  for (int q = 0; q < b; ++q) {
    double acc = 0.0;
    for (long r = q * batch_size; r < (q + 1) * batch_size; ++r) acc += values[r];
    batch_means.push_back(acc / static_cast<double>(batch_size));
  }
  double ss = 0.0;
  for (double bm : batch_means) ss += (bm - mean) * (bm - mean);
  const double batch_var = ss / static_cast<double>(b - 1);
  se = std::sqrt(batch_var / static_cast<double>(b));
}

}  // namespace

ModelState joint_prior_draw(const Dataset& ds, const Hyperparameters& hp, RandomStream& stream) {
  const Eigen::Index n = ds.n();
  const Eigen::Index p = ds.p();
  const int k = hp.k;
  ModelState state;
  state.gamma = gamma_draw(stream, hp.a, hp.b);
  state.alpha0 = gamma_draw(stream, hp.c, hp.d);
  state.v = VectorXd::Ones(k);
  state.log_one_minus_v = VectorXd::Zero(k);
  for (int h = 0; h + 1 < k; ++h) {
    const BetaLogDraw draw = beta_draw_with_logs(stream, 1.0, state.gamma);
    state.v[h] = draw.value;
    state.log_one_minus_v[h] = draw.log_one_minus;
  }
  state.beta = stick_break(state.v);
  state.phi.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    state.phi[j].resize(k, ds.levels[j]);
    const VectorXd flat = VectorXd::Ones(ds.levels[j]);
    for (int c = 0; c < k; ++c) state.phi[j].row(c) = dirichlet_draw(stream, flat).transpose();
  }
  state.u.resize(n, k);
  state.pi.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    detail::draw_group_sticks(state.beta, state.alpha0, nullptr, stream, false, state.u.row(i),
                              state.pi.row(i));
  }
  state.z.resize(n, p);
  state.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const int cluster = categorical_draw(stream, state.pi.row(i).transpose());
      state.z(i, j) = cluster;
      state.x(i, j) = categorical_draw(stream, state.phi[j].row(cluster).transpose()) + 1;
    }
  }
  state.t = VectorXd::Constant(n, 0.5);
  state.log_t = VectorXd::Constant(n, std::log(0.5));
  state.s = RowMatrixXi::Zero(n, k);
  return state;
}

JointTestReport validate_sampler(const JointTestConfig& cfg) {
  JointTestReport report;
  if (cfg.replicates <= 0) return report;

  const Dataset ds = all_missing_dataset(cfg.n, cfg.p, cfg.levels);
  Hyperparameters hp;
  hp.k = cfg.k;
  hp.a = cfg.a;
  hp.b = cfg.b;
  hp.c = cfg.c;
  hp.d = cfg.d;

  const std::vector<StatDef> defs = build_stats(cfg.n, cfg.p, cfg.k);
  const std::size_t n_stats = defs.size();
  std::vector<std::vector<double>> marginal(n_stats), successive(n_stats);
  for (auto& series : marginal) series.reserve(cfg.replicates);
  for (auto& series : successive) series.reserve(cfg.replicates);

  RandomStream mc_stream(cfg.seed, 1000001);
  for (long r = 0; r < cfg.replicates; ++r) {
    const ModelState state = joint_prior_draw(ds, hp, mc_stream);
    for (std::size_t s = 0; s < n_stats; ++s) marginal[s].push_back(defs[s].eval(state));
  }

  // Successive-conditional chain: a prior draw is an exact stationary start,
  // and every sweep resamples the full data through step 6.
  RandomStream sc_main(cfg.seed, 2000002);
  RowStreams sc_rows = make_row_streams(cfg.seed ^ 0x5CC5CC5CC5CC5CC5ULL, cfg.n);
  ModelState state = joint_prior_draw(ds, hp, sc_main);
  CountTables counts = compute_counts(ds, state);
  for (long r = 0; r < cfg.replicates; ++r) {
    step_assignments(ds, state, counts, sc_rows, 1);
    step_profiles(counts, ds.levels, state, sc_main);
    step_global_weights(counts, state, sc_main);
    step_group_weights(counts, state, sc_main, cfg.corrupt_step4);
    step_concentrations(state, hp, sc_main);
    step_impute(ds, state, sc_rows, 1);
    for (std::size_t s = 0; s < n_stats; ++s) successive[s].push_back(defs[s].eval(state));
  }

  report.replicates = cfg.replicates;
  report.stat_count = static_cast<int>(n_stats);
  for (std::size_t s = 0; s < n_stats; ++s) {
    JointStatResult result;
    result.name = defs[s].name;
    iid_moments(marginal[s], result.marginal_mean, result.marginal_se);
    batch_moments(successive[s], cfg.batches, result.successive_mean, result.successive_se);
    const double denom = std::sqrt(result.marginal_se * result.marginal_se +
                                   result.successive_se * result.successive_se);
    const double diff = result.marginal_mean - result.successive_mean;
    if (denom > 0.0) {
      result.z = diff / denom;
    } else {
      result.z = diff == 0.0 ? 0.0 : std::copysign(1e9, diff);
    }
    if (std::abs(result.z) < 3.0) ++report.within_three;
    report.max_abs_z = std::max(report.max_abs_z, std::abs(result.z));
    report.stats.push_back(std::move(result));
  }
  return report;
}

}  // namespace hdpmpm
