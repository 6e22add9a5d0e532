#include "hdpmpm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hdpmpm/errors.hpp"
#include "hdpmpm/sampler_detail.hpp"

namespace hdpmpm {

namespace {

// Runs fn(begin, end) over [0, n) split into contiguous row chunks. The first
// exception thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_rows(Eigen::Index n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    fn(Eigen::Index{0}, n);
    return;
  }
  const int used = static_cast<int>(std::min<Eigen::Index>(workers, n));
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const Eigen::Index chunk = (n + used - 1) / used;
  for (int w = 0; w < used; ++w) {
    const Eigen::Index begin = w * chunk;
    const Eigen::Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void rebuild_counts(const ModelState& state, CountTables& counts) {
  const Eigen::Index n = state.z.rows();
  const Eigen::Index p = state.z.cols();
  counts.m.setZero();
  for (auto& table : counts.n) table.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const int cluster = state.z(i, j);
      counts.m(i, cluster) += 1;
      counts.n[j](cluster, state.x(i, j) - 1) += 1;
    }
  }
}

int resolve_workers(const ChainConfig& cfg) {
  if (!cfg.parallel_cells) return 1;
  if (cfg.workers > 0) return cfg.workers;
  if (const char* env = std::getenv("HDPMPM_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

struct SaturationSignal {
  long sweep;
  int occupied;
};

}  // namespace

RowStreams make_row_streams(std::uint64_t seed, Eigen::Index n) {
  RowStreams streams;
  streams.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) streams.emplace_back(seed, static_cast<std::uint64_t>(i) + 1);
  return streams;
}

void step_assignments(const Dataset& ds, ModelState& state, CountTables& counts,
                      RowStreams& streams, int workers) {
  const Eigen::Index n = ds.n();
  const Eigen::Index p = ds.p();
  const int k = state.k();
  parallel_rows(n, workers, [&](Eigen::Index begin, Eigen::Index end) {
    VectorXd weights(k);
    for (Eigen::Index i = begin; i < end; ++i) {
      RandomStream& rs = streams[static_cast<std::size_t>(i)];
      const auto pi_row = state.pi.row(i);
      for (Eigen::Index j = 0; j < p; ++j) {
        const int d = state.x(i, j) - 1;
        weights = pi_row.transpose().cwiseProduct(state.phi[j].col(d));
        const double total = weights.sum();
        if (!(total > 0.0) || !std::isfinite(total)) {
          throw NumericalError("step 1: zero normalizer for cell (i=" + std::to_string(i) +
                               ", j=" + std::to_string(j) + ")");
        }
        double target = rs.next_double() * total;
        int chosen = k - 1;
        for (int c = 0; c < k; ++c) {
          target -= weights[c];
          if (target < 0.0) {
            chosen = c;
            break;
          }
        }
        state.z(i, j) = chosen;
      }
    }
  });
  rebuild_counts(state, counts);
}

void step_profiles(const CountTables& counts, const VectorXi& levels, ModelState& state,
                   RandomStream& stream) {
  const Eigen::Index p = levels.size();
  const int k = state.k();
  for (Eigen::Index j = 0; j < p; ++j) {
    VectorXd alphas(levels[j]);
    for (int c = 0; c < k; ++c) {
      alphas = (counts.n[j].row(c).cast<double>().transpose().array() + 1.0).matrix();
      state.phi[j].row(c) = dirichlet_draw(stream, alphas).transpose();
    }
  }
}

void step_global_weights(const CountTables& counts, ModelState& state, RandomStream& stream) {
  const Eigen::Index n = counts.m.rows();
  const int k = state.k();

  state.log_t.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // The row sum is p whenever every cell carries an assignment; the clamp
    // only matters for degenerate unit fixtures with empty count tables.
    const double group_total =
        std::max(static_cast<double>(counts.m.row(i).sum()), kStickClamp);
    const BetaLogDraw draw = beta_draw_with_logs(stream, state.alpha0, group_total);
    state.t[i] = draw.value;
    state.log_t[i] = draw.log_value;
  }

  state.s.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) {
      const int m_ik = counts.m(i, c);
      if (m_ik == 0) continue;
      int total = 1;  // h = 1 succeeds with probability a0b/(a0b + 0) = 1
      const double a0b = state.alpha0 * state.beta[c];
      for (int h = 2; h <= m_ik; ++h) {
        total += bernoulli_draw(stream, a0b / (a0b + h - 1));
      }
      state.s(i, c) = total;
    }
  }

  const Eigen::VectorXi s_by_cluster = state.s.colwise().sum();
  long tail = 0;
  for (int c = 1; c < k; ++c) tail += s_by_cluster[c];
  state.log_one_minus_v.resize(k);
  state.log_one_minus_v[k - 1] = 0.0;
  for (int c = 0; c < k - 1; ++c) {
    const BetaLogDraw draw = beta_draw_with_logs(stream, 1.0 + s_by_cluster[c],
                                                 state.gamma + static_cast<double>(tail));
    state.v[c] = draw.value;
    state.log_one_minus_v[c] = draw.log_one_minus;
    tail -= s_by_cluster[c + 1];
  }
  state.v[k - 1] = 1.0;
  state.beta = stick_break(state.v);
}

void step_group_weights(const CountTables& counts, ModelState& state, RandomStream& stream,
                        bool swap_beta_params) {
  const Eigen::Index n = counts.m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    detail::draw_group_sticks(state.beta, state.alpha0, counts.m.row(i).data(), stream,
                              swap_beta_params, state.u.row(i), state.pi.row(i));
  }
}

void step_concentrations(ModelState& state, const Hyperparameters& hp, RandomStream& stream) {
  const int k = state.k();
  const bool have_v_logs = state.log_one_minus_v.size() == k;
  double log_sum = 0.0;
  for (int c = 0; c + 1 < k; ++c) {
    double term;
    if (have_v_logs) {
      term = state.log_one_minus_v[c];
    } else {
      const double v = std::clamp(state.v[c], kLogClamp, 1.0 - kLogClamp);
      term = std::log1p(-v);
    }
    if (!std::isfinite(term)) {
      throw NumericalError("step 5: non-finite log(1 - V) at cluster " + std::to_string(c));
    }
    log_sum += term;
  }
  state.gamma = gamma_draw(stream, hp.a + k - 1, hp.b - log_sum);

  const bool have_t_logs = state.log_t.size() == state.t.size();
  double log_t = 0.0;
  for (Eigen::Index i = 0; i < state.t.size(); ++i) {
    double term;
    if (have_t_logs) {
      term = state.log_t[i];
    } else {
      const double t = std::clamp(state.t[i], kLogClamp, 1.0 - kLogClamp);
      term = std::log(t);
    }
    if (!std::isfinite(term)) {
      throw NumericalError("step 5: non-finite log(t) at row " + std::to_string(i));
    }
    log_t += term;
  }
  const long s_total = state.s.sum();
  state.alpha0 = gamma_draw(stream, hp.c + static_cast<double>(s_total), hp.d - log_t);
}

void step_impute(const Dataset& ds, ModelState& state, RowStreams& streams, int workers) {
  const Eigen::Index n = ds.n();
  const Eigen::Index p = ds.p();
  parallel_rows(n, workers, [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index i = begin; i < end; ++i) {
      RandomStream& rs = streams[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < p; ++j) {
        if (ds.mask(i, j) == 0) continue;
        const auto kernel = state.phi[j].row(state.z(i, j));
        const Eigen::Index levels = kernel.size();
        double total = 0.0;
        for (Eigen::Index d = 0; d < levels; ++d) total += kernel[d];
        double target = rs.next_double() * total;
        int chosen = static_cast<int>(levels) - 1;
        for (Eigen::Index d = 0; d < levels; ++d) {
          target -= kernel[d];
          if (target < 0.0) {
            chosen = static_cast<int>(d);
            break;
          }
        }
        state.x(i, j) = chosen + 1;
      }
    }
  });
}

void relabel_state(ModelState& state) {
  const int k = state.k();
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return state.beta[a] > state.beta[b]; });
  bool identity = true;
  for (int c = 0; c < k; ++c) identity = identity && order[static_cast<std::size_t>(c)] == c;
  if (identity) return;

  std::vector<int> inverse(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) inverse[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

  // The log companions describe the pre-permutation sticks; the next
  // global-weights pass rebuilds them before anything reads them again.
  state.log_one_minus_v.resize(0);

  VectorXd beta(k);
  for (int r = 0; r < k; ++r) beta[r] = state.beta[order[static_cast<std::size_t>(r)]];
  state.beta = beta;
  state.v = stick_from_weights(state.beta);

  for (auto& table : state.phi) {
    Eigen::MatrixXd permuted(table.rows(), table.cols());
    for (int r = 0; r < k; ++r) permuted.row(r) = table.row(order[static_cast<std::size_t>(r)]);
    table = std::move(permuted);
  }

  const Eigen::Index n = state.pi.rows();
  RowMatrixXd pi(n, k);
  RowMatrixXi s(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int r = 0; r < k; ++r) {
      pi(i, r) = state.pi(i, order[static_cast<std::size_t>(r)]);
      s(i, r) = state.s(i, order[static_cast<std::size_t>(r)]);
    }
  }
  state.pi = std::move(pi);
  state.s = std::move(s);
  for (Eigen::Index i = 0; i < n; ++i) {
    state.u.row(i) = stick_from_weights(state.pi.row(i).transpose()).transpose();
  }

  for (Eigen::Index i = 0; i < state.z.rows(); ++i) {
    for (Eigen::Index j = 0; j < state.z.cols(); ++j) {
      state.z(i, j) = inverse[static_cast<std::size_t>(state.z(i, j))];
    }
  }
}

namespace {

// One full pass over the chain; throws SaturationSignal when the grow policy
// should restart with a larger truncation.
PosteriorDraws run_once(const Dataset& ds, const Hyperparameters& hp, const ChainConfig& cfg,
                        int workers, int restarts_so_far) {
  PosteriorDraws out;
  out.config_echo = cfg;
  out.hp_echo = hp;
  out.variable_names = ds.variable_names;
  out.restarts = restarts_so_far;

  RandomStream main_stream(cfg.seed, 0);
  RowStreams row_streams = make_row_streams(cfg.seed, ds.n());
  ModelState state = init_state(ds, hp, main_stream);
  CountTables counts = compute_counts(ds, state);

  const long kept_total = (cfg.iterations - cfg.burn_in) / cfg.thin;
  out.draws.reserve(static_cast<std::size_t>(std::max(kept_total, 0L)));
  out.occupied_counts.reserve(static_cast<std::size_t>(cfg.iterations));

  for (long sweep = 1; sweep <= cfg.iterations; ++sweep) {
    try {
      step_assignments(ds, state, counts, row_streams, workers);
      const int occupied = occupied_clusters(counts);
      out.occupied_counts.push_back(occupied);
      if (occupied == hp.k) {
        out.saturation_events.push_back(sweep);
        if (sweep > cfg.burn_in) {
          if (cfg.saturation == SaturationPolicy::kAbort) {
            throw SaturationError("chain saturated: occupied clusters reached k=" +
                                      std::to_string(hp.k) + " at sweep " + std::to_string(sweep),
                                  sweep, occupied, hp.k, restarts_so_far);
          }
          throw SaturationSignal{sweep, occupied};
        }
      }
      step_profiles(counts, ds.levels, state, main_stream);
      step_global_weights(counts, state, main_stream);
      step_group_weights(counts, state, main_stream);
      step_concentrations(state, hp, main_stream);
      if (cfg.relabel) relabel_state(state);
      step_impute(ds, state, row_streams, workers);
    } catch (const SaturationError&) {
      throw;
    } catch (const NumericalError& err) {
      throw NumericalError(std::string(err.what()) + " (sweep " + std::to_string(sweep) + ")");
    }
    if (sweep > cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0) {
      out.draws.push_back(state);
      out.kept_iterations.push_back(sweep);
    }
  }
  return out;
}

}  // namespace

PosteriorDraws run_chain(const Dataset& ds, const Hyperparameters& hp, const ChainConfig& cfg) {
  if (cfg.burn_in >= cfg.iterations) {
    throw std::invalid_argument("run_chain: burn_in must be smaller than iterations");
  }
  if (cfg.thin < 1) throw std::invalid_argument("run_chain: thin must be >= 1");
  if (hp.k < 2) throw std::invalid_argument("run_chain: k must be >= 2");

  const int workers = resolve_workers(cfg);
  Hyperparameters current = hp;
  int restarts = 0;
  for (;;) {
    try {
      return run_once(ds, current, cfg, workers, restarts);
    } catch (const SaturationSignal& signal) {
      if (restarts >= cfg.max_restarts) {
        throw SaturationError(
            "chain saturated at k=" + std::to_string(current.k) + " (sweep " +
                std::to_string(signal.sweep) + ") after exhausting " +
                std::to_string(cfg.max_restarts) + " restarts",
            signal.sweep, signal.occupied, current.k, restarts);
      }
      ++restarts;
      current.k += cfg.grow_step;
    }
  }
}

}  // namespace hdpmpm
