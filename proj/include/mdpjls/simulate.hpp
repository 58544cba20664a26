#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdpjls/lyapunov.hpp"
#include "mdpjls/markov.hpp"
#include "mdpjls/model.hpp"

namespace mdpjls {

/// Counter-based generator: every draw is a hash of (key, counter), so
/// per-run streams are independent of scheduling and each other.
class RunRng {
 public:
  RunRng(std::uint64_t seed, std::uint64_t stream);

  double next();  // uniform [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }
  double normal();  // Box-Muller

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct SimConfig {
  int steps = 1000;
  int runs = 1;
  std::uint64_t seed = 0;
  std::vector<double> x0;  // empty: all ones
  int record_stride = 1;
  int batches = 50;  // batch-means resolution for frequency checks

  void check() const;
};

struct RunResult {
  std::vector<double> log_norm;  // log ||x||_inf at the recorded steps
  std::vector<int> record_k;     // matching step indices
  double jump_freq = 0.0;        // m / k
  std::vector<double> occupancy; // k_s / k
  std::vector<double> inbound;   // m_s / k
  long jumps = 0;
  std::vector<long> mode_steps;  // k_s
  std::vector<long> mode_jumps;  // m_s
  double slope = 0.0;            // least-squares log-norm slope, second half
  bool slope_is_neg_inf = false; // state hit exactly zero
  bool diverged = false;         // ||x||_inf exceeded the overflow guard
  // per-batch tallies for batch-means variance
  std::vector<long> batch_jumps;
  std::vector<std::vector<long>> batch_mode_steps;   // [batch][mode]
  std::vector<std::vector<long>> batch_mode_jumps;   // [batch][mode]
  int batch_len = 0;
};

struct SimReport {
  SimConfig cfg;
  int num_modes = 0;
  std::vector<RunResult> runs;
  std::vector<int> pooled_k;              // recorded steps
  std::vector<double> pooled_second_moment;  // mean over runs of ||x(k)||_2^2
};

/// Monte Carlo rollout of the closed loop; runs are bitwise reproducible per
/// (seed, run index) and embarrassingly parallel.
SimReport simulate(const MdpJls& jls, const Policy& policy, const SimConfig& cfg);

/// Single-run replay (used by the pathwise certificate checks).
struct RunTrace {
  std::vector<int> modes;                // s_0 .. s_k
  std::vector<std::vector<double>> x;    // states at every step
};
RunTrace simulate_trace(const MdpJls& jls, const Policy& policy, const SimConfig& cfg,
                        int run_index);

struct FrequencyStat {
  std::string name;
  double observed = 0.0;
  double expected = 0.0;
  double stderr_est = 0.0;
  double z = 0.0;
};

struct FrequencySummary {
  std::vector<FrequencyStat> stats;
  double max_abs_z = 0.0;
};

/// z-scores of the empirical jump/occupancy/inbound frequencies against the
/// stationary analysis; across-run variance when runs > 1, batch means within
/// the single run otherwise.
FrequencySummary empirical_frequency_check(const SimReport& report,
                                           const StationaryAnalysis& analysis);

/// Writes one CSV per run: k, mode, log_norm.
void export_traces(const MdpJls& jls, const Policy& policy, const SimConfig& cfg,
                   const std::string& directory);

}  // namespace mdpjls
