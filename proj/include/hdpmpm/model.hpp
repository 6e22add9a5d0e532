#pragma once

#include <cstdint>
#include <vector>

#include "hdpmpm/data.hpp"
#include "hdpmpm/rng.hpp"
#include "hdpmpm/types.hpp"

namespace hdpmpm {

/// Truncation level and Gamma hyperprior factors for the two concentrations.
struct Hyperparameters {
  int k = 30;
  double a = 0.25;
  double b = 0.25;
  double c = 0.25;
  double d = 0.25;
};

enum class SaturationPolicy { kAbort, kGrow };

struct ChainConfig {
  long iterations = 30000;
  long burn_in = 15000;
  int thin = 5;
  std::uint64_t seed = 20160101;
  bool relabel = true;
  SaturationPolicy saturation = SaturationPolicy::kGrow;
  int grow_step = 10;
  int max_restarts = 3;
  bool parallel_cells = false;
  int workers = 0;  // 0 = HDPMPM_WORKERS env var, else hardware concurrency
};

/// Full parameter state of one sweep. Cluster indices (z and the k axis of
/// every container) are 0-based; data values in `x` are 1-based level codes.
/// `x` is the working copy of the data with current imputations filled in, so
/// the imputed cells are exactly the masked positions of `x`.
struct ModelState {
  RowMatrixXi z;                    // n x p cluster assignment per cell
  std::vector<Eigen::MatrixXd> phi; // per variable j: k x D_j, rows are simplices
  VectorXd v;                       // k stick variables, v[k-1] == 1
  VectorXd beta;                    // k global weights (simplex)
  RowMatrixXd u;                    // n x k group stick variables, last column == 1
  RowMatrixXd pi;                   // n x k group weights (row simplices)
  double gamma = 1.0;
  double alpha0 = 1.0;
  VectorXd t;                       // n auxiliaries in (0,1)
  RowMatrixXi s;                    // n x k auxiliary counts, 0 <= s_ik <= m_ik
  RowMatrixXi x;                    // n x p working data incl. imputations

  // Exact log-domain companions of t and V. Under vague priors the stick and
  // auxiliary variables saturate at double precision near 0/1 while their
  // logs reach thousands; the concentration conditionals need the true logs.
  // Filled by the global-weights step, cleared by relabeling, empty on
  // hand-built or deserialized states (consumers then fall back to clamped
  // logs of the stored values).
  VectorXd log_t;                   // n, ln(t_i)
  VectorXd log_one_minus_v;         // k, ln(1 - V_c); last entry unused

  int k() const { return static_cast<int>(beta.size()); }
};

struct CountTables {
  RowMatrixXi m;              // n x k, m_ik = #{j : z_ij = k}
  std::vector<RowMatrixXi> n; // per variable j: k x D_j response counts
};

/// beta_k = v_k * prod_{h<k} (1 - v_h). The last component must be 1 so the
/// result is a simplex.
VectorXd stick_break(const Eigen::Ref<const VectorXd>& v);

/// Inverse of stick_break with denominators clamped away from zero;
/// result[last] == 1.
VectorXd stick_from_weights(const Eigen::Ref<const VectorXd>& weights);

/// Draws gamma/alpha0/v/beta/phi/u/pi from their priors, fills masked cells
/// from each variable's observed empirical marginal, and assigns z from the
/// cell-level conditionals given those parameters.
ModelState init_state(const Dataset& ds, const Hyperparameters& hp, RandomStream& stream);

CountTables compute_counts(const Dataset& ds, const ModelState& state);

/// Number of clusters with at least one assignment.
int occupied_clusters(const CountTables& counts);

}  // namespace hdpmpm
