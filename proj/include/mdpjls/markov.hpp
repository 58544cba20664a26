#pragma once

#include <string>
#include <vector>

#include "mdpjls/mat.hpp"
#include "mdpjls/model.hpp"

namespace mdpjls {

struct NonUnichain : Error {
  using Error::Error;
};

enum class ChainClass { ErgodicUnichain, UnichainPeriodic, Multichain };

std::string to_string(ChainClass c);

/// Strongly connected components of the positive-support digraph; unichain
/// iff exactly one closed class, ergodic iff that class has period 1.
ChainClass classify_chain(const Dtmc& chain);

/// Stationary distribution plus the jump statistics derived from it.
struct StationaryAnalysis {
  std::vector<double> p_inf;
  std::vector<double> inbound;  // per state: sum_{s' != s} P(s', s) p_inf(s')
  double p_jump = 0.0;          // 1 - sum_s p_inf(s) P(s, s)
  ChainClass classification = ChainClass::ErgodicUnichain;
};

StationaryAnalysis stationary_distribution(const Dtmc& chain);

/// Group inverse of H = I - P with per-row max |h#_ij|.
struct GroupInverse {
  Mat h_sharp;
  std::vector<double> row_abs_max;
  bool used_fallback = false;  // fundamental-matrix identity instead of the partition
  int permuted_state = -1;     // state moved to the trailing position, -1 if none
};

GroupInverse group_inverse(const Dtmc& chain);

/// Perturbation bounds for a Delta-approximation of the estimated chain.
struct DeltaBound {
  double delta = 0.0;
  std::vector<double> stationary_dev;   // per state: N*Delta*max_j|h#_ij|
  double pjump_excess = 0.0;            // added to P_jump of the estimate
  std::vector<double> inbound_excess;   // per state, added to the inbound probability
};

DeltaBound delta_bounds(const Dtmc& chain_estimate, double delta);

}  // namespace mdpjls
