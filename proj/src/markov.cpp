#include "mdpjls/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdpjls/eig.hpp"

namespace mdpjls {

namespace {

constexpr double kSupportEps = 0.0;  // positive support means strictly > 0

// Iterative Tarjan SCC over the positive-support digraph.
std::vector<int> scc_components(const Mat& p, int& num_comps) {
  const int n = p.rows();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0;
  num_comps = 0;

  struct Frame {
    int v;
    int next_child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next_child < n) {
        int w = f.next_child++;
        if (p(f.v, w) <= kSupportEps) continue;
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp[w] = num_comps;
            if (w == f.v) break;
          }
          ++num_comps;
        }
        int v = f.v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  return comp;
}

// gcd of cycle lengths within the class, via BFS levels: every edge (u,v)
// inside the class contributes depth[u] + 1 - depth[v].
int class_period(const Mat& p, const std::vector<int>& members) {
  const int n = p.rows();
  std::vector<int> depth(n, -1);
  std::vector<int> queue{members[0]};
  depth[members[0]] = 0;
  std::vector<bool> in_class(n, false);
  for (int m : members) in_class[m] = true;
  size_t head = 0;
  int g = 0;
  while (head < queue.size()) {
    int u = queue[head++];
    for (int v = 0; v < n; ++v) {
      if (p(u, v) <= kSupportEps || !in_class[v]) continue;
      if (depth[v] == -1) {
        depth[v] = depth[u] + 1;
        queue.push_back(v);
      } else {
        g = std::gcd(g, std::abs(depth[u] + 1 - depth[v]));
      }
    }
  }
  return g == 0 ? 1 : g;
}

}  // namespace

std::string to_string(ChainClass c) {
  switch (c) {
    case ChainClass::ErgodicUnichain:
      return "ergodic-unichain";
    case ChainClass::UnichainPeriodic:
      return "unichain-periodic";
    case ChainClass::Multichain:
      return "multichain";
  }
  return "?";
}

ChainClass classify_chain(const Dtmc& chain) {
  const Mat& p = chain.p;
  const int n = p.rows();
  int num_comps = 0;
  std::vector<int> comp = scc_components(p, num_comps);

  // A component is closed when no member has positive probability out of it.
  std::vector<bool> closed(num_comps, true);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (p(i, j) > kSupportEps && comp[j] != comp[i]) closed[comp[i]] = false;
  int num_closed = int(std::count(closed.begin(), closed.end(), true));
  if (num_closed != 1) return ChainClass::Multichain;

  int closed_id = int(std::find(closed.begin(), closed.end(), true) - closed.begin());
  std::vector<int> members;
  for (int i = 0; i < n; ++i)
    if (comp[i] == closed_id) members.push_back(i);
  return class_period(p, members) == 1 ? ChainClass::ErgodicUnichain
                                       : ChainClass::UnichainPeriodic;
}

StationaryAnalysis stationary_distribution(const Dtmc& chain) {
  StationaryAnalysis out;
  out.classification = classify_chain(chain);
  if (out.classification == ChainClass::Multichain)
    throw NonUnichain("stationary distribution is not unique for a multichain");

  const Mat& p = chain.p;
  const int n = p.rows();
  // Solve p'P = p' with the normalization row appended, by QR least squares.
  Mat sys(n + 1, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) sys(j, i) = p(i, j) - (i == j ? 1.0 : 0.0);
    sys(n, j) = 1.0;
  }
  std::vector<double> rhs(n + 1, 0.0);
  rhs[n] = 1.0;
  out.p_inf = lstsq(sys, rhs);
  for (double& v : out.p_inf)
    if (v < 0.0 && v > -1e-12) v = 0.0;

  out.inbound.assign(n, 0.0);
  for (int s = 0; s < n; ++s)
    for (int sp = 0; sp < n; ++sp)
      if (sp != s) out.inbound[s] += p(sp, s) * out.p_inf[sp];
  out.p_jump = std::accumulate(out.inbound.begin(), out.inbound.end(), 0.0);
  return out;
}

GroupInverse group_inverse(const Dtmc& chain) {
  if (classify_chain(chain) != ChainClass::ErgodicUnichain)
    throw NonUnichain("group inverse: ergodic unichain required");
  const Mat& p = chain.p;
  const int n = p.rows();
  GroupInverse out;
  out.row_abs_max.assign(n, 0.0);
  if (n == 1) {
    out.h_sharp = Mat(1, 1);
    return out;
  }

  auto assemble = [&](const std::vector<int>& order) -> bool {
    // H in the permuted order, trailing scalar at order[n-1].
    Mat h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        h(i, j) = (order[i] == order[j] ? 1.0 : 0.0) - p(order[i], order[j]);
    const int m = n - 1;
    Mat u(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) u(i, j) = h(i, j);
    Lu f = lu_factor(u, 1e-13);
    if (f.singular) return false;
    std::vector<double> d(m);
    for (int j = 0; j < m; ++j) d[j] = h(n - 1, j);

    // h' = d'U^-1  <=>  U' h = d
    Lu ft = lu_factor(u.transpose(), 1e-13);
    if (ft.singular) return false;
    std::vector<double> hrow = lu_solve(ft, d);
    std::vector<double> ones(m, 1.0);
    std::vector<double> uinv_ones = lu_solve(f, ones);
    double delta = -dot(hrow, uinv_ones);
    double beta = 1.0 - std::accumulate(hrow.begin(), hrow.end(), 0.0);
    if (std::fabs(beta) <= 1e-12 || std::fabs(delta) <= 1e-13) return false;

    Mat uinv = lu_solve(f, Mat::identity(m));
    // G = U^-1 - (delta/beta) I
    Mat g = uinv;
    for (int i = 0; i < m; ++i) g(i, i) -= delta / beta;

    std::vector<double> g_ones = mat_vec(g, ones);
    std::vector<double> hrow_g = vec_mat(hrow, g);
    std::vector<double> hrow_uinv = vec_mat(hrow, uinv);

    Mat hs(n, n);
    // top-left: U^-1 + (U^-1 1) (h' U^-1) / delta - (G 1) (h' G) / delta
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        hs(i, j) = uinv(i, j) + uinv_ones[i] * hrow_uinv[j] / delta - g_ones[i] * hrow_g[j] / delta;
    for (int i = 0; i < m; ++i) hs(i, n - 1) = -g_ones[i] / beta;
    for (int j = 0; j < m; ++j) hs(n - 1, j) = hrow_g[j] / beta;
    hs(n - 1, n - 1) = delta / (beta * beta);

    // Undo the symmetric permutation.
    out.h_sharp = Mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.h_sharp(order[i], order[j]) = hs(i, j);
    return true;
  };

  std::vector<int> natural(n);
  std::iota(natural.begin(), natural.end(), 0);
  bool ok = assemble(natural);
  if (!ok) {
    // Move some other state to the trailing scalar position.
    for (int last = n - 2; last >= 0 && !ok; --last) {
      std::vector<int> order;
      for (int i = 0; i < n; ++i)
        if (i != last) order.push_back(i);
      order.push_back(last);
      if (assemble(order)) {
        out.permuted_state = last;
        ok = true;
      }
    }
  }
  if (!ok) {
    // Fundamental-matrix identity: H# = (H + 1 p') ^ -1 - 1 p'.
    StationaryAnalysis st = stationary_distribution(chain);
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - p(i, j) + st.p_inf[j];
    Mat z = inverse(a);
    out.h_sharp = z;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.h_sharp(i, j) -= st.p_inf[j];
    out.used_fallback = true;
  }

  for (int i = 0; i < n; ++i) {
    double best = 0.0;
    for (int j = 0; j < n; ++j) best = std::max(best, std::fabs(out.h_sharp(i, j)));
    out.row_abs_max[i] = best;
  }
  return out;
}

DeltaBound delta_bounds(const Dtmc& chain_estimate, double delta) {
  if (delta < 0.0 || delta > 1.0) throw Error("delta bounds: Delta must lie in [0,1]");
  const Mat& p = chain_estimate.p;
  const int n = p.rows();
  GroupInverse gi = group_inverse(chain_estimate);
  StationaryAnalysis st = stationary_distribution(chain_estimate);

  DeltaBound out;
  out.delta = delta;
  out.stationary_dev.assign(n, 0.0);
  out.inbound_excess.assign(n, 0.0);
  for (int i = 0; i < n; ++i) out.stationary_dev[i] = n * delta * gi.row_abs_max[i];

  for (int i = 0; i < n; ++i) {
    out.pjump_excess += st.p_inf[i] * delta + p(i, i) * out.stationary_dev[i] +
                        n * delta * delta * gi.row_abs_max[i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      out.inbound_excess[i] += p(j, i) * out.stationary_dev[i] + p(j, i) * delta +
                               n * delta * delta * gi.row_abs_max[i];
    }
  }
  return out;
}

}  // namespace mdpjls
