#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

#include "bhv/errors.hpp"

namespace bhv {

// Stafford mix 13 finalizer; used to derive independent per-sample streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream for one sample index. Results depend only on
// (seed, index), never on evaluation order or thread schedule. Distribution
// helpers are hand-rolled so output is identical across standard libraries.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t index)
      : engine_(splitmix64(seed ^ splitmix64(index + 1))) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Eigen::VectorXd point_in_box(const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper) {
    Eigen::VectorXd p(lower.size());
    for (Eigen::Index i = 0; i < lower.size(); ++i)
      p[i] = uniform(lower[i], upper[i]);
    return p;
  }

  // Uniform direction via rejection from the unit ball.
  Eigen::VectorXd unit_vector(int n) {
    Eigen::VectorXd v(n);
    for (int tries = 0; tries < 1000; ++tries) {
      for (int i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
      const double norm2 = v.squaredNorm();
      if (norm2 > 1e-4 && norm2 <= 1.0) return v / std::sqrt(norm2);
    }
    throw RegionExhausted("unit_vector: rejection sampling failed");
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bhv
