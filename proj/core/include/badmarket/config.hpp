#pragma once

#include <cstdint>

namespace badmarket {

struct SolverConfig {
  double clearing_tol = 1e-9;
  double optimality_tol = 1e-8;
  /// Relaxation of the externality fixed-point update, in (0, 1].
  double damping = 0.5;
  int max_outer_iters = 200;
  int max_inner_iters = 500;
  int restarts = 64;
  std::uint64_t seed = 0x5eed;
  /// Worker threads for restarts; 0 reads BADMARKET_THREADS (default 1).
  int threads = 0;
  /// Route every demand evaluation through projected gradient ascent instead
  /// of the closed forms.
  bool force_fallback_demand = false;

  /// Throws DomainError when a field is out of range.
  void validate() const;
};

}  // namespace badmarket
