// Compares the OpenMP kernels against their serial references: dense matmul,
// Monte Carlo rollouts, and the policy-enumeration sweep.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>

#include "mdpjls/mat.hpp"
#include "mdpjls/model.hpp"
#include "mdpjls/msstab.hpp"
#include "mdpjls/parallel.hpp"
#include "mdpjls/simulate.hpp"
#include "mdpjls/study.hpp"

using namespace mdpjls;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    f();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

void bench_matmul(int n) {
  RunRng rng(17, 0);
  Mat a(n, n), b(n, n);
  for (auto& v : a.data()) v = rng.uniform(-1.0, 1.0);
  for (auto& v : b.data()) v = rng.uniform(-1.0, 1.0);
  volatile double sink = 0.0;
  const double ts = time_best_of(3, [&] { sink = mat_mul_serial(a, b)(0, 0); });
  const double tp = time_best_of(3, [&] { sink = mat_mul(a, b)(0, 0); });
  (void)sink;
  std::printf("matmul %4dx%-4d      serial %8.4fs   omp %8.4fs   speedup %.2fx\n", n, n, ts, tp,
              ts / tp);
}

void bench_simulate() {
  StudySpec spec;
  spec.seed = 5;
  MdpJls jls = make_study_instance(spec, 0);
  Policy uniform;
  uniform.probs = Mat(jls.num_modes(), jls.mdp.num_actions());
  for (int i = 0; i < jls.num_modes(); ++i)
    for (int s = 0; s < jls.mdp.num_actions(); ++s)
      uniform.probs(i, s) = 1.0 / jls.mdp.num_actions();
  SimConfig cfg;
  cfg.steps = 20000;
  cfg.runs = 64;
  cfg.seed = 5;
  cfg.record_stride = 100;

  const double tp = time_best_of(3, [&] { simulate(jls, uniform, cfg); });
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double ts = time_best_of(3, [&] { simulate(jls, uniform, cfg); });
  omp_set_num_threads(saved);
  std::printf("simulate 64x20000     serial %8.4fs   omp %8.4fs   speedup %.2fx\n", ts, tp,
              ts / tp);
}

void bench_policy_sweep() {
  StudySpec spec;
  spec.seed = 9;
  spec.num_modes = 6;
  spec.state_dim = 3;
  spec.num_actions = 3;
  spec.transportation_mdp = false;
  MdpJls jls = make_study_instance(spec, 1);

  const double tp = time_best_of(3, [&] { deterministic_study(jls); });
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double ts = time_best_of(3, [&] { deterministic_study(jls); });
  omp_set_num_threads(saved);
  std::printf("policy sweep 3^6      serial %8.4fs   omp %8.4fs   speedup %.2fx\n", ts, tp,
              ts / tp);
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_budget();
  std::printf("threads: %d\n", thread_budget());
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  bench_matmul(quick ? 192 : 512);
  if (!quick) bench_matmul(768);
  bench_simulate();
  bench_policy_sweep();
  return 0;
}
