#include "mdpjls/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace mdpjls {

int thread_budget() {
  if (const char* env = std::getenv("MDPJLS_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  return omp_get_num_procs();
}

void apply_thread_budget() { omp_set_num_threads(thread_budget()); }

}  // namespace mdpjls
