#include "mdpjls/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace mdpjls {

namespace {

constexpr double kOverflowGuard = 1e150;

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

RunRng::RunRng(std::uint64_t seed, std::uint64_t stream) {
  key_ = splitmix(splitmix(seed) ^ splitmix(stream * 0xda942042e4dd58b5ull + 1));
}

double RunRng::next() {
  const std::uint64_t bits = splitmix(key_ ^ splitmix(counter_++));
  return double(bits >> 11) * 0x1.0p-53;
}

double RunRng::normal() {
  double u1 = next(), u2 = next();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

void SimConfig::check() const {
  if (steps < 1) throw Error("simulate: steps must be >= 1");
  if (runs < 1) throw Error("simulate: runs must be >= 1");
  if (record_stride < 1) throw Error("simulate: record stride must be >= 1");
}

namespace {

int draw_mode(const Mat& p, int s, double u) {
  double acc = 0.0;
  const int n = p.cols();
  for (int j = 0; j < n; ++j) {
    acc += p(s, j);
    if (u < acc) return j;
  }
  return n - 1;  // numerical slack at the top of the CDF
}

RunResult run_once(const MdpJls& jls, const Dtmc& chain, const SimConfig& cfg, int run_index,
                   std::vector<std::vector<double>>* states_out) {
  const int n = jls.system.state_dim;
  const int nmodes = jls.num_modes();
  RunRng rng(cfg.seed, std::uint64_t(run_index));

  RunResult rr;
  rr.mode_steps.assign(nmodes, 0);
  rr.mode_jumps.assign(nmodes, 0);
  const int nb = std::max(1, std::min(cfg.batches, cfg.steps));
  rr.batch_len = (cfg.steps + nb - 1) / nb;
  const int actual_batches = (cfg.steps + rr.batch_len - 1) / rr.batch_len;
  rr.batch_jumps.assign(actual_batches, 0);
  rr.batch_mode_steps.assign(actual_batches, std::vector<long>(nmodes, 0));
  rr.batch_mode_jumps.assign(actual_batches, std::vector<long>(nmodes, 0));

  std::vector<double> x = cfg.x0.empty() ? std::vector<double>(n, 1.0) : cfg.x0;
  int s = chain.initial_state;

  auto record = [&](int k) {
    const double nrm = vec_norm_inf(x);
    rr.record_k.push_back(k);
    rr.log_norm.push_back(nrm > 0.0 ? std::log(nrm) : -std::numeric_limits<double>::infinity());
    if (states_out) states_out->push_back(x);
  };
  record(0);

  std::vector<double> xn(n);
  for (int k = 0; k < cfg.steps; ++k) {
    const int batch = k / rr.batch_len;
    ++rr.mode_steps[s];
    ++rr.batch_mode_steps[batch][s];
    if (!rr.diverged) {
      const Mat& a = jls.system.dynamics[s];
      for (int r = 0; r < n; ++r) {
        double acc = 0.0;
        for (int c = 0; c < n; ++c) acc += a(r, c) * x[c];
        xn[r] = acc;
      }
      x = xn;
      if (vec_norm_inf(x) > kOverflowGuard) rr.diverged = true;
    }
    const int s_next = draw_mode(chain.p, s, rng.next());
    if (s_next != s) {
      ++rr.jumps;
      ++rr.mode_jumps[s_next];
      ++rr.batch_jumps[batch];
      ++rr.batch_mode_jumps[batch][s_next];
    }
    s = s_next;
    if ((k + 1) % cfg.record_stride == 0 || k + 1 == cfg.steps) record(k + 1);
  }

  rr.jump_freq = double(rr.jumps) / cfg.steps;
  rr.occupancy.resize(nmodes);
  rr.inbound.resize(nmodes);
  for (int m = 0; m < nmodes; ++m) {
    rr.occupancy[m] = double(rr.mode_steps[m]) / cfg.steps;
    rr.inbound[m] = double(rr.mode_jumps[m]) / cfg.steps;
  }

  // log-norm slope over the second half, skipping -inf samples
  std::vector<double> ks, ys;
  for (size_t i = rr.record_k.size() / 2; i < rr.record_k.size(); ++i) {
    if (std::isfinite(rr.log_norm[i])) {
      ks.push_back(double(rr.record_k[i]));
      ys.push_back(rr.log_norm[i]);
    }
  }
  if (ks.size() < 2) {
    rr.slope_is_neg_inf = true;
    rr.slope = -std::numeric_limits<double>::infinity();
  } else {
    double mk = 0.0, my = 0.0;
    for (size_t i = 0; i < ks.size(); ++i) {
      mk += ks[i];
      my += ys[i];
    }
    mk /= double(ks.size());
    my /= double(ks.size());
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < ks.size(); ++i) {
      num += (ks[i] - mk) * (ys[i] - my);
      den += (ks[i] - mk) * (ks[i] - mk);
    }
    rr.slope = den > 0.0 ? num / den : 0.0;
  }
  return rr;
}

}  // namespace

SimReport simulate(const MdpJls& jls, const Policy& policy, const SimConfig& cfg) {
  jls.validate();
  cfg.check();
  if (!cfg.x0.empty() && int(cfg.x0.size()) != jls.system.state_dim)
    throw DimensionMismatch("simulate: x0 dimension");
  Dtmc chain = induce_chain(jls.mdp, policy);

  SimReport rep;
  rep.cfg = cfg;
  rep.num_modes = jls.num_modes();
  rep.runs.resize(cfg.runs);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < cfg.runs; ++r) rep.runs[r] = run_once(jls, chain, cfg, r, nullptr);

  // pooled E||x(k)||^2 estimate over the recorded grid (serial, fixed order)
  rep.pooled_k = rep.runs[0].record_k;
  rep.pooled_second_moment.assign(rep.pooled_k.size(), 0.0);
  for (int r = 0; r < cfg.runs; ++r) {
    const RunResult& rr = rep.runs[r];
    for (size_t i = 0; i < rr.log_norm.size() && i < rep.pooled_second_moment.size(); ++i) {
      const double nrm = std::isfinite(rr.log_norm[i]) ? std::exp(rr.log_norm[i]) : 0.0;
      rep.pooled_second_moment[i] += nrm * nrm / cfg.runs;
    }
  }
  return rep;
}

RunTrace simulate_trace(const MdpJls& jls, const Policy& policy, const SimConfig& cfg,
                        int run_index) {
  jls.validate();
  cfg.check();
  Dtmc chain = induce_chain(jls.mdp, policy);
  const int n = jls.system.state_dim;
  RunRng rng(cfg.seed, std::uint64_t(run_index));
  RunTrace tr;
  std::vector<double> x = cfg.x0.empty() ? std::vector<double>(n, 1.0) : cfg.x0;
  int s = chain.initial_state;
  tr.modes.push_back(s);
  tr.x.push_back(x);
  std::vector<double> xn(n);
  for (int k = 0; k < cfg.steps; ++k) {
    const Mat& a = jls.system.dynamics[s];
    for (int r = 0; r < n; ++r) {
      double acc = 0.0;
      for (int c = 0; c < n; ++c) acc += a(r, c) * x[c];
      xn[r] = acc;
    }
    x = xn;
    s = draw_mode(chain.p, s, rng.next());
    tr.modes.push_back(s);
    tr.x.push_back(x);
  }
  return tr;
}

namespace {

double batch_se(const std::vector<double>& batch_means) {
  const size_t b = batch_means.size();
  if (b < 2) return std::numeric_limits<double>::infinity();
  double mean = 0.0;
  for (double v : batch_means) mean += v;
  mean /= double(b);
  double var = 0.0;
  for (double v : batch_means) var += (v - mean) * (v - mean);
  var /= double(b - 1);
  return std::sqrt(var / double(b));
}

double across_run_se(const std::vector<double>& values) {
  return batch_se(values);  // same estimator, runs as the batches
}

}  // namespace

FrequencySummary empirical_frequency_check(const SimReport& report,
                                           const StationaryAnalysis& analysis) {
  FrequencySummary out;
  const int nmodes = report.num_modes;
  const int runs = int(report.runs.size());

  auto push = [&](const std::string& name, double obs, double exp, double se) {
    FrequencyStat st;
    st.name = name;
    st.observed = obs;
    st.expected = exp;
    st.stderr_est = se;
    st.z = se > 0.0 ? (obs - exp) / se : (obs == exp ? 0.0 : std::numeric_limits<double>::infinity());
    out.max_abs_z = std::max(out.max_abs_z, std::fabs(st.z));
    out.stats.push_back(std::move(st));
  };

  auto se_for = [&](auto per_run_value, auto per_batch_value) -> double {
    if (runs > 1) {
      std::vector<double> vals(runs);
      for (int r = 0; r < runs; ++r) vals[r] = per_run_value(report.runs[r]);
      return across_run_se(vals);
    }
    const RunResult& rr = report.runs[0];
    std::vector<double> means(rr.batch_jumps.size());
    for (size_t b = 0; b < means.size(); ++b) means[b] = per_batch_value(rr, int(b));
    return batch_se(means);
  };

  auto mean_over_runs = [&](auto f) {
    double acc = 0.0;
    for (const auto& rr : report.runs) acc += f(rr);
    return acc / runs;
  };

  const double steps = double(report.cfg.steps);
  push("jump_freq", mean_over_runs([](const RunResult& r) { return r.jump_freq; }),
       analysis.p_jump, se_for([](const RunResult& r) { return r.jump_freq; },
                               [&](const RunResult& r, int b) {
                                 const double len =
                                     std::min<double>(r.batch_len, steps - double(b) * r.batch_len);
                                 return double(r.batch_jumps[b]) / len;
                               }));
  for (int m = 0; m < nmodes; ++m) {
    push("occupancy[" + std::to_string(m) + "]",
         mean_over_runs([&](const RunResult& r) { return r.occupancy[m]; }), analysis.p_inf[m],
         se_for([&](const RunResult& r) { return r.occupancy[m]; },
                [&](const RunResult& r, int b) {
                  const double len =
                      std::min<double>(r.batch_len, steps - double(b) * r.batch_len);
                  return double(r.batch_mode_steps[b][m]) / len;
                }));
    push("inbound[" + std::to_string(m) + "]",
         mean_over_runs([&](const RunResult& r) { return r.inbound[m]; }), analysis.inbound[m],
         se_for([&](const RunResult& r) { return r.inbound[m]; },
                [&](const RunResult& r, int b) {
                  const double len =
                      std::min<double>(r.batch_len, steps - double(b) * r.batch_len);
                  return double(r.batch_mode_jumps[b][m]) / len;
                }));
  }
  return out;
}

void export_traces(const MdpJls& jls, const Policy& policy, const SimConfig& cfg,
                   const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  Dtmc chain = induce_chain(jls.mdp, policy);
  for (int r = 0; r < cfg.runs; ++r) {
    std::vector<std::vector<double>> states;
    RunResult rr = run_once(jls, chain, cfg, r, &states);
    std::ofstream f(fs::path(directory) / ("run_" + std::to_string(r) + ".csv"));
    f << "k,mode,log_norm\n";
    // replay the mode path for the recorded steps
    RunTrace tr = simulate_trace(jls, policy, cfg, r);
    for (size_t i = 0; i < rr.record_k.size(); ++i) {
      const int k = rr.record_k[i];
      f << k << "," << tr.modes[k] << "," << rr.log_norm[i] << "\n";
    }
  }
}

}  // namespace mdpjls
