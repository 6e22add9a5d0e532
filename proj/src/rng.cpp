#include "hdpmpm/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hdpmpm {

namespace {

constexpr double kTinyPositive = std::numeric_limits<double>::min();

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

unsigned __int128 make_u128(std::uint64_t hi, std::uint64_t lo) {
  return (static_cast<unsigned __int128>(hi) << 64) | lo;
}

constexpr std::uint64_t kPcgMultHi = 2549297995355413924ULL;
constexpr std::uint64_t kPcgMultLo = 4865540595714422341ULL;

std::uint64_t rotr64(std::uint64_t v, unsigned rot) {
  return (v >> rot) | (v << ((64u - rot) & 63u));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t s = seed;
  unsigned __int128 init_state = make_u128(splitmix64(s), splitmix64(s));
  std::uint64_t t = stream_id ^ 0xDA3E39CB94B95BDBULL;
  unsigned __int128 init_seq = make_u128(splitmix64(t), splitmix64(t));

  const unsigned __int128 mult = make_u128(kPcgMultHi, kPcgMultLo);
  state_ = 0;
  inc_ = (init_seq << 1) | 1;
  state_ = state_ * mult + inc_;
  state_ += init_state;
  state_ = state_ * mult + inc_;
}

std::uint64_t RandomStream::next_u64() {
  const unsigned __int128 mult = make_u128(kPcgMultHi, kPcgMultLo);
  state_ = state_ * mult + inc_;
  const std::uint64_t xored = static_cast<std::uint64_t>(state_ >> 64) ^ static_cast<std::uint64_t>(state_);
  const unsigned rot = static_cast<unsigned>(state_ >> 122);
  return rotr64(xored, rot);
}

double RandomStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_double_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double uniform(RandomStream& stream) { return stream.next_double(); }

double normal_draw(RandomStream& stream) {
  if (stream.has_spare_normal_) {
    stream.has_spare_normal_ = false;
    return stream.spare_normal_;
  }
  double a, b, q;
  do {
    a = 2.0 * stream.next_double() - 1.0;
    b = 2.0 * stream.next_double() - 1.0;
    q = a * a + b * b;
  } while (q >= 1.0 || q == 0.0);
  const double f = std::sqrt(-2.0 * std::log(q) / q);
  stream.spare_normal_ = b * f;
  stream.has_spare_normal_ = true;
  return a * f;
}

namespace {

// Marsaglia-Tsang squeeze for shape >= 1; unit rate.
double gamma_value_shape_ge1(RandomStream& stream, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal_draw(stream);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.next_double_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

// ln of a Gamma(shape, 1) variate. Working in log space keeps the boosting
// identity G(a) = G(a+1) * U^(1/a) exact for arbitrarily small shapes, where
// the linear-space product would underflow to 0 and wreck ratios built on it.
double log_gamma_variate(RandomStream& stream, double shape) {
  if (shape < 1.0) {
    const double boosted = log_gamma_variate(stream, shape + 1.0);
    return boosted + std::log(stream.next_double_open()) / shape;
  }
  return std::log(std::max(gamma_value_shape_ge1(stream, shape), kTinyPositive));
}

void check_positive_param(double value, const char* what, const char* name) {
  if (!(value > 0.0)) {
    throw std::invalid_argument(std::string(what) + ": " + name + " must be positive (got " +
                                std::to_string(value) + ")");
  }
}

}  // namespace

double gamma_draw(RandomStream& stream, double shape, double rate) {
  check_positive_param(shape, "gamma_draw", "shape");
  check_positive_param(rate, "gamma_draw", "rate");
  if (shape < 1.0) {
    const double value = std::exp(log_gamma_variate(stream, shape));
    return std::max(value, kTinyPositive) / rate;
  }
  return gamma_value_shape_ge1(stream, shape) / rate;
}

BetaLogDraw beta_draw_with_logs(RandomStream& stream, double alpha, double beta) {
  check_positive_param(alpha, "beta_draw", "alpha");
  check_positive_param(beta, "beta_draw", "beta");
  // x/(x+y) written as a sigmoid of ln x - ln y; immune to joint underflow
  // when both shapes are far below 1.
  const double lx = log_gamma_variate(stream, alpha);
  const double ly = log_gamma_variate(stream, beta);
  const double hi = std::max(lx, ly);
  const double lse = hi + std::log1p(std::exp(std::min(lx, ly) - hi));
  const double diff = lx - ly;
  double r;
  if (diff >= 0.0) {
    r = 1.0 / (1.0 + std::exp(-diff));
  } else {
    const double e = std::exp(diff);
    r = e / (1.0 + e);
  }
  if (r <= 0.0) r = kTinyPositive;
  const double one_below = std::nextafter(1.0, 0.0);
  if (r >= 1.0) r = one_below;
  return {r, lx - lse, ly - lse};
}

double beta_draw(RandomStream& stream, double alpha, double beta) {
  return beta_draw_with_logs(stream, alpha, beta).value;
}

Eigen::VectorXd dirichlet_draw(RandomStream& stream, const Eigen::Ref<const Eigen::VectorXd>& alphas) {
  const Eigen::Index dim = alphas.size();
  if (dim < 1) throw std::invalid_argument("dirichlet_draw: empty concentration vector");
  Eigen::VectorXd logs(dim);
  for (Eigen::Index d = 0; d < dim; ++d) {
    if (!(alphas[d] > 0.0)) {
      throw std::invalid_argument("dirichlet_draw: non-positive concentration at index " +
                                  std::to_string(d));
    }
    logs[d] = log_gamma_variate(stream, alphas[d]);
  }
  const double shift = logs.maxCoeff();
  Eigen::VectorXd out = (logs.array() - shift).exp();
  out /= out.sum();
  return out;
}

int categorical_draw(RandomStream& stream, const Eigen::Ref<const Eigen::VectorXd>& weights) {
  const Eigen::Index dim = weights.size();
  if (dim < 1) throw std::invalid_argument("categorical_draw: empty weight vector");
  double total = 0.0;
  for (Eigen::Index d = 0; d < dim; ++d) {
    if (!(weights[d] >= 0.0)) {
      throw std::invalid_argument("categorical_draw: negative or non-finite weight at index " +
                                  std::to_string(d));
    }
    total += weights[d];
  }
  if (!(total > 0.0)) throw std::invalid_argument("categorical_draw: all weights are zero");
  double target = stream.next_double() * total;
  for (Eigen::Index d = 0; d < dim; ++d) {
    target -= weights[d];
    if (target < 0.0) return static_cast<int>(d);
  }
  // Rounding can leave a sliver of target; attribute it to the last positive weight.
  for (Eigen::Index d = dim - 1; d >= 0; --d) {
    if (weights[d] > 0.0) return static_cast<int>(d);
  }
  return static_cast<int>(dim - 1);
}

int bernoulli_draw(RandomStream& stream, double p) {
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw std::invalid_argument("bernoulli_draw: p outside [0,1] (p=" + std::to_string(p) + ")");
  }
  return stream.next_double() < p ? 1 : 0;
}

}  // namespace hdpmpm
