#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace hdpmpm {

/// Deterministic seedable random stream with substream support.
///
/// PCG64 (128-bit LCG state, XSL-RR output). The state is derived from the
/// seed alone and the increment from the stream id alone, so streams with the
/// same seed but distinct ids walk distinct permutations of the generator's
/// cycle and never replay one another's output. Same (seed, stream_id) gives
/// the same sequence on every run and platform.
///
/// A stream is single-owner: parallel callers take disjoint substreams.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1), 53-bit resolution.
  double next_double();

  /// Uniform on (0, 1); safe as a log/pow argument.
  double next_double_open();

  /// A stream with the same seed and a different id. Draw sequences of
  /// distinct ids are independent.
  RandomStream substream(std::uint64_t stream_id) const { return RandomStream(seed_, stream_id); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  friend double normal_draw(RandomStream&);

  unsigned __int128 state_;
  unsigned __int128 inc_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

/// Uniform on [0, 1).
double uniform(RandomStream& stream);

/// Standard normal via the polar method (support routine for gamma_draw).
double normal_draw(RandomStream& stream);

/// Gamma(shape, rate), shape-rate convention: mean shape/rate.
/// Marsaglia-Tsang for shape >= 1; shapes below 1 use the boosting identity
/// G(a) = G(a+1) * U^(1/a), evaluated in log space to dodge underflow, so
/// small shapes like 0.25 are exact-law draws rather than rejections.
double gamma_draw(RandomStream& stream, double shape, double rate);

/// Beta(alpha, beta) as a two-gamma ratio, clamped into the open unit interval.
double beta_draw(RandomStream& stream, double alpha, double beta);

/// Beta variate together with exact ln(value) and ln(1 - value), taken from
/// the underlying log-gamma pair. The value itself saturates at double
/// precision near 0 or 1; the logs do not, which matters wherever a
/// conditional consumes log-boundary terms.
struct BetaLogDraw {
  double value;
  double log_value;
  double log_one_minus;
};

BetaLogDraw beta_draw_with_logs(RandomStream& stream, double alpha, double beta);

/// Dirichlet(alphas); returns a simplex vector of the same length.
Eigen::VectorXd dirichlet_draw(RandomStream& stream, const Eigen::Ref<const Eigen::VectorXd>& alphas);

/// Index in [0, weights.size()) drawn proportionally to non-negative weights.
/// Weights are used in linear space; at least one must be positive.
int categorical_draw(RandomStream& stream, const Eigen::Ref<const Eigen::VectorXd>& weights);

/// 1 with probability p, p in [0, 1].
int bernoulli_draw(RandomStream& stream, double p);

}  // namespace hdpmpm
