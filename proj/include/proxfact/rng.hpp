#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>

namespace proxfact {

// Deterministic xoshiro256++ generator with substreams keyed on
// (seed, replicate, tag). Every Monte Carlo replicate derives its own
// stream, so the results do not depend on how replicates are scheduled.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : Rng(seed, 0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t replicate, std::uint64_t tag);

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  // Index in [0, n). Uses rejection sampling, so it is exactly uniform.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();  // standard normal via Box-Muller, second draw cached
  double exponential();  // rate 1
  Eigen::VectorXd normal_vector(int n);
  Eigen::MatrixXd normal_matrix(int rows, int cols);

 private:
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Purpose tags for substream derivation. Fixed values: changing them would
// change every simulated table.
namespace rng_tag {
inline constexpr std::uint64_t factors = 1;
inline constexpr std::uint64_t loadings = 2;
inline constexpr std::uint64_t errors = 3;
inline constexpr std::uint64_t hetero_scales = 4;
inline constexpr std::uint64_t bootstrap = 5;
inline constexpr std::uint64_t generic = 6;
}  // namespace rng_tag

}  // namespace proxfact
