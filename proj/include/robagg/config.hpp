#pragma once

namespace robagg {

// Numeric tolerances shared by every module.
struct Tolerances {
  double structural = 1e-12;  // probability vectors, Bayes plausibility
  double cross_path = 1e-9;   // two independent computations of one quantity
  double tie_band = 1e-12;    // posterior treated as exactly 1/2
  double weight_clamp = 1e-12;
  double reduction = 1e-8;    // end-to-end canonicalization residual
};

inline constexpr Tolerances kTol{};

// Largest group size handled by the dense aggregator representation.
inline constexpr int kMaxExperts = 64;

}  // namespace robagg
