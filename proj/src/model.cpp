#include "hdpmpm/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hdpmpm/errors.hpp"
#include "hdpmpm/sampler_detail.hpp"

namespace hdpmpm {

VectorXd stick_break(const Eigen::Ref<const VectorXd>& v) {
  const Eigen::Index k = v.size();
  if (k < 1 || v[k - 1] != 1.0) {
    throw std::invalid_argument("stick_break: last stick variable must be exactly 1");
  }
  VectorXd out(k);
  double remaining = 1.0;
  for (Eigen::Index h = 0; h < k; ++h) {
    out[h] = v[h] * remaining;
    remaining *= 1.0 - v[h];
  }
  return out;
}

VectorXd stick_from_weights(const Eigen::Ref<const VectorXd>& weights) {
  const Eigen::Index k = weights.size();
  VectorXd v(k);
  double remaining = 1.0;
  for (Eigen::Index h = 0; h + 1 < k; ++h) {
    const double denom = remaining > kStickClamp ? remaining : kStickClamp;
    double value = weights[h] / denom;
    if (value > 1.0) value = 1.0;
    if (value < 0.0) value = 0.0;
    v[h] = value;
    remaining -= weights[h];
  }
  if (k > 0) v[k - 1] = 1.0;
  return v;
}

namespace detail {

void draw_group_sticks(const Eigen::Ref<const VectorXd>& beta, double alpha0, const int* m_row,
                       RandomStream& stream, bool swap_beta_params,
                       Eigen::Ref<Eigen::RowVectorXd> u_row, Eigen::Ref<Eigen::RowVectorXd> pi_row) {
  const Eigen::Index k = beta.size();
  long tail_m = 0;
  if (m_row != nullptr) {
    for (Eigen::Index h = 0; h < k; ++h) tail_m += m_row[h];
  }
  double cum_beta = 0.0;
  double remaining = 1.0;
  for (Eigen::Index h = 0; h < k; ++h) {
    if (m_row != nullptr) tail_m -= m_row[h];
    if (h + 1 == k) {
      u_row[h] = 1.0;
      pi_row[h] = remaining;
      break;
    }
    cum_beta += beta[h];
    double residual = 1.0 - cum_beta;
    if (residual <= 0.0) residual = kStickClamp;
    double first = alpha0 * beta[h] + (m_row != nullptr ? m_row[h] : 0);
    double second = alpha0 * residual + (m_row != nullptr ? static_cast<double>(tail_m) : 0.0);
    if (first <= 0.0) first = kStickClamp;
    if (second <= 0.0) second = kStickClamp;
    const double draw = swap_beta_params ? beta_draw(stream, second, first)
                                         : beta_draw(stream, first, second);
    u_row[h] = draw;
    pi_row[h] = draw * remaining;
    remaining *= 1.0 - draw;
  }
}

}  // namespace detail

ModelState init_state(const Dataset& ds, const Hyperparameters& hp, RandomStream& stream) {
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

  // Missing cells start from each variable's observed empirical marginal.
  state.x = ds.cells;
  for (Eigen::Index j = 0; j < p; ++j) {
    bool any_missing = false;
    for (Eigen::Index i = 0; i < n && !any_missing; ++i) any_missing = ds.mask(i, j) != 0;
    if (!any_missing) continue;
    VectorXd marginal = VectorXd::Zero(ds.levels[j]);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (ds.mask(i, j) == 0) marginal[ds.cells(i, j) - 1] += 1.0;
    }
    if (marginal.sum() <= 0.0) {
      throw DataError("init_state: variable " + std::to_string(j + 1) +
                      " has no observed values to seed imputations from");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (ds.mask(i, j) != 0) state.x(i, j) = categorical_draw(stream, marginal) + 1;
    }
  }

  state.z.resize(n, p);
  VectorXd weights(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const int d = state.x(i, j) - 1;
      weights = state.pi.row(i).transpose().cwiseProduct(state.phi[j].col(d));
      state.z(i, j) = categorical_draw(stream, weights);
    }
  }

  state.t = VectorXd::Constant(n, 0.5);
  state.log_t = VectorXd::Constant(n, std::log(0.5));
  state.s = RowMatrixXi::Zero(n, k);
  return state;
}

CountTables compute_counts(const Dataset& ds, const ModelState& state) {
  const Eigen::Index n = ds.n();
  const Eigen::Index p = ds.p();
  const int k = state.k();
  CountTables counts;
  counts.m = RowMatrixXi::Zero(n, k);
  counts.n.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) counts.n[j] = RowMatrixXi::Zero(k, ds.levels[j]);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const int cluster = state.z(i, j);
      counts.m(i, cluster) += 1;
      counts.n[j](cluster, state.x(i, j) - 1) += 1;
    }
  }
  return counts;
}

int occupied_clusters(const CountTables& counts) {
  const Eigen::VectorXi totals = counts.m.colwise().sum();
  int occupied = 0;
  for (Eigen::Index c = 0; c < totals.size(); ++c) occupied += totals[c] > 0 ? 1 : 0;
  return occupied;
}

}  // namespace hdpmpm
