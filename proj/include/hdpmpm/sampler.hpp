#pragma once

#include <vector>

#include "hdpmpm/model.hpp"

namespace hdpmpm {

/// One random stream per observation group, used by the two cell-level steps
/// (assignment and imputation). Because each row always draws from its own
/// stream, serial and parallel execution produce bit-identical chains.
using RowStreams = std::vector<RandomStream>;

RowStreams make_row_streams(std::uint64_t seed, Eigen::Index n);

/// Step 1: redraw every cell's cluster assignment from
/// p(z_ij = k | -) ~ pi_ik * phi^(j)_{k,x_ij}, then refresh the count tables.
void step_assignments(const Dataset& ds, ModelState& state, CountTables& counts,
                      RowStreams& streams, int workers = 1);

/// Step 2: redraw each profile row from Dirichlet(1 + counts).
void step_profiles(const CountTables& counts, const VectorXi& levels, ModelState& state,
                   RandomStream& stream);

/// Step 3: auxiliary-variable update of the global weights. Redraws t, s, V
/// and beta, in that order. s_ik stays 0 when m_ik = 0 (empty product), and
/// the h = 1 Bernoulli succeeds with probability 1 exactly.
void step_global_weights(const CountTables& counts, ModelState& state, RandomStream& stream);

/// Step 4: redraw each group's stick variables
/// u_ik ~ Beta(alpha0*beta_k + m_ik, alpha0*(1 - sum_{h<=k} beta_h) + sum_{h>k} m_ih)
/// and rebuild pi rows. `swap_beta_params` deliberately corrupts the update
/// and exists only for the joint-distribution harness's mutation check.
void step_group_weights(const CountTables& counts, ModelState& state, RandomStream& stream,
                        bool swap_beta_params = false);

/// Step 5: redraw the concentrations gamma and alpha0 from their Gamma
/// conditionals; V and t are clamped away from {0,1} before the logs.
void step_concentrations(ModelState& state, const Hyperparameters& hp, RandomStream& stream);

/// Step 6: redraw every masked cell from its assigned cluster's kernel.
/// Observed cells are never touched; with no mask this is a no-op.
void step_impute(const Dataset& ds, ModelState& state, RowStreams& streams, int workers = 1);

/// Applies the single permutation that sorts beta into decreasing order
/// (stable in ties) to every cluster-indexed quantity: beta, phi, pi and u
/// rows, s columns, and all z values. V and u are rebuilt by stick inversion.
/// Per-cell likelihoods are bit-invariant; an already sorted state is
/// returned untouched.
void relabel_state(ModelState& state);

struct PosteriorDraws {
  std::vector<ModelState> draws;       // post burn-in, thinned
  std::vector<long> kept_iterations;   // 1-based sweep index per stored draw
  std::vector<int> occupied_counts;    // one entry per sweep of the final run
  ChainConfig config_echo;
  Hyperparameters hp_echo;             // hyperparameters actually used (k may have grown)
  std::vector<long> saturation_events; // sweeps where occupied == k
  std::vector<std::string> variable_names;
  int restarts = 0;
  bool has_pi = true;  // false when loaded from a draws file without pi
  bool has_z = true;
};

/// Runs init_state and `iterations` sweeps of steps 1-6 with relabeling
/// between steps 5 and 6. A post-burn-in sweep whose occupied-cluster count
/// reaches k either aborts with SaturationError or restarts the whole chain
/// with k + grow_step, at most max_restarts times.
PosteriorDraws run_chain(const Dataset& ds, const Hyperparameters& hp, const ChainConfig& cfg);

}  // namespace hdpmpm
