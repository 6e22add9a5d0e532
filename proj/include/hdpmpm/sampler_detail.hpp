#pragma once

#include <Eigen/Dense>

#include "hdpmpm/rng.hpp"
#include "hdpmpm/types.hpp"

namespace hdpmpm {

// Floors for degenerate Beta parameters / residual sticks, and for stick or
// auxiliary variables that hit 0 or 1 exactly before entering a log.
constexpr double kStickClamp = 1e-10;
constexpr double kLogClamp = 1e-12;

namespace detail {

/// Draws one group's stick variables u and weights pi given the global
/// weights; `m_row` points at that group's per-cluster counts, or is null for
/// a prior draw. `swap_beta_params` flips the Beta parameters and exists only
/// for the joint-distribution harness's mutation check.
void draw_group_sticks(const Eigen::Ref<const VectorXd>& beta, double alpha0, const int* m_row,
                       RandomStream& stream, bool swap_beta_params,
                       Eigen::Ref<Eigen::RowVectorXd> u_row, Eigen::Ref<Eigen::RowVectorXd> pi_row);

}  // namespace detail
}  // namespace hdpmpm
