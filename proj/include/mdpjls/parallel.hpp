#pragma once

namespace mdpjls {

/// Worker budget: MDPJLS_THREADS when set, otherwise the logical core count.
int thread_budget();

/// Applies the budget to the OpenMP runtime. Called once by entry points.
void apply_thread_budget();

}  // namespace mdpjls
