#include "mdpjls/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "mdpjls/lyapunov.hpp"
#include "mdpjls/msstab.hpp"
#include "mdpjls/numerics.hpp"
#include "mdpjls/simulate.hpp"
#include "mdpjls/synth.hpp"

namespace mdpjls {

using nlohmann::json;

StudySpec parse_study_spec(const std::string& document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const std::exception& e) {
    throw SchemaError(std::string("study spec: not valid JSON: ") + e.what());
  }
  StudySpec s;
  s.seed = j.value("seed", s.seed);
  s.instances = j.value("instances", s.instances);
  s.num_modes = j.value("modes", s.num_modes);
  s.state_dim = j.value("state_dim", s.state_dim);
  s.num_actions = j.value("actions", s.num_actions);
  s.rho_min = j.value("rho_min", s.rho_min);
  s.rho_max = j.value("rho_max", s.rho_max);
  s.transportation_mdp = j.value("transportation_mdp", s.num_modes == 4 && s.num_actions == 2);
  if (j.contains("methods")) s.methods = j["methods"].get<std::vector<std::string>>();
  s.cd_max_iter = j.value("cd_max_iter", s.cd_max_iter);
  s.epsilon = j.value("epsilon", s.epsilon);
  s.bisect_tol = j.value("bisect_tol", s.bisect_tol);
  if (s.instances < 1 || s.num_modes < 1 || s.state_dim < 1 || s.num_actions < 1)
    throw SchemaError("study spec: counts must be positive");
  if (!(s.rho_min > 0.0) || !(s.rho_max < 1.0) || s.rho_min >= s.rho_max)
    throw SchemaError("study spec: need 0 < rho_min < rho_max < 1");
  return s;
}

std::string serialize_study_spec(const StudySpec& s) {
  json j;
  j["seed"] = s.seed;
  j["instances"] = s.instances;
  j["modes"] = s.num_modes;
  j["state_dim"] = s.state_dim;
  j["actions"] = s.num_actions;
  j["rho_min"] = s.rho_min;
  j["rho_max"] = s.rho_max;
  j["transportation_mdp"] = s.transportation_mdp;
  j["methods"] = s.methods;
  j["cd_max_iter"] = s.cd_max_iter;
  j["epsilon"] = s.epsilon;
  j["bisect_tol"] = s.bisect_tol;
  return j.dump(2);
}

namespace {

// Transfer tensors of the four-buffer network example.
const Mat kTransport1{{0.1, 0.7, 0.1, 0.1},
                      {0.1, 0.8, 0.05, 0.05},
                      {0.2, 0.6, 0.1, 0.1},
                      {0.1, 0.05, 0.05, 0.8}};
const Mat kTransport2{{0.8, 0.05, 0.05, 0.1},
                      {0.3, 0.15, 0.4, 0.15},
                      {0.1, 0.1, 0.7, 0.1},
                      {0.1, 0.7, 0.1, 0.1}};

Mat random_stochastic_row_matrix(RunRng& rng, int n, double diag_weight) {
  Mat t(n, n);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      t(i, j) = rng.next() + 1e-3;
      sum += t(i, j);
    }
    for (int j = 0; j < n; ++j) t(i, j) = (1.0 - diag_weight) * t(i, j) / sum;
    t(i, i) += diag_weight;
  }
  return t;
}

}  // namespace

MdpJls make_study_instance(const StudySpec& spec, int index) {
  RunRng rng(spec.seed, 0x5757ull * std::uint64_t(index) + std::uint64_t(index) + 7);
  MdpJls jls;
  jls.system.state_dim = spec.state_dim;
  for (int m = 0; m < spec.num_modes; ++m) {
    Mat a(spec.state_dim, spec.state_dim);
    for (auto& v : a.data()) v = rng.normal();
    double rho = spectral_radius(a);
    if (rho < 1e-9) {
      a = Mat::identity(spec.state_dim);
      rho = 1.0;
    }
    const double target = rng.uniform(spec.rho_min, spec.rho_max);
    a *= target / rho;
    jls.system.dynamics.push_back(std::move(a));
    jls.system.mode_names.push_back("m" + std::to_string(m + 1));
    jls.discretization.push_back(std::nullopt);
  }

  jls.mdp.state_names = jls.system.mode_names;
  jls.mdp.initial_state = 0;
  const bool fixed = spec.transportation_mdp && spec.num_modes == 4 && spec.num_actions == 2;
  for (int s = 0; s < spec.num_actions; ++s) {
    jls.mdp.action_names.push_back("a" + std::to_string(s + 1));
    if (fixed) {
      jls.mdp.transition.push_back(s == 0 ? kTransport1 : kTransport2);
    } else {
      // the first action leans on self-loops so p1 feasibility is in reach
      const double diag = s == 0 ? 0.75 : 0.0;
      jls.mdp.transition.push_back(random_stochastic_row_matrix(rng, spec.num_modes, diag));
    }
  }
  jls.mdp.available.assign(spec.num_modes, std::vector<bool>(spec.num_actions, true));
  jls.costs.assign(spec.num_modes, 0.0);
  jls.validate();
  return jls;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct InstanceRow {
  std::vector<char> success;
  std::vector<double> seconds;
};

}  // namespace

StudyResult run_study(const StudySpec& spec) {
  StudyResult out;
  out.spec = spec;
  const int nm = int(spec.methods.size());
  std::vector<InstanceRow> rows(spec.instances);

  const bool wants_p1 =
      std::any_of(spec.methods.begin(), spec.methods.end(),
                  [](const std::string& m) { return m == "p1-dep" || m == "p1-ind"; });

#pragma omp parallel for schedule(dynamic)
  for (int inst = 0; inst < spec.instances; ++inst) {
    MdpJls jls = make_study_instance(spec, inst);
    InstanceRow row;
    row.success.assign(nm, 0);
    row.seconds.assign(nm, 0.0);

    LyapunovCertificate cert;
    bool have_cert = false;
    if (wants_p1) {
      try {
        cert = certify(jls.system, spec.bisect_tol);
        have_cert = true;
      } catch (const std::exception&) {
        have_cert = false;  // an unstable mode: p1 methods cannot run
      }
    }

    for (int m = 0; m < nm; ++m) {
      const std::string& method = spec.methods[m];
      auto t0 = std::chrono::steady_clock::now();
      try {
        if (method == "ms-cd") {
          CdOptions opts;
          opts.max_iter = spec.cd_max_iter;
          opts.seed = spec.seed + std::uint64_t(inst);
          MsSynthesis r = synthesize_ms_cd(jls, opts);
          row.success[m] = r.ok();
        } else if (method == "ms-sdp") {
          MsSynthesis r = synthesize_ms_sdp(jls);
          row.success[m] = r.ok();
        } else if (method == "p1-dep") {
          if (have_cert) {
            P1Outcome r = synthesize_p1_dependent(jls, cert, spec.epsilon);
            row.success[m] = r.feasible;
          }
        } else if (method == "p1-ind") {
          if (have_cert) {
            P1Outcome r = synthesize_p1_independent(jls, cert.alpha_uniform, cert.mu_uniform,
                                                    spec.epsilon);
            row.success[m] = r.feasible;
          }
        } else {
          throw Error("study: unknown method '" + method + "'");
        }
      } catch (const Error&) {
        row.success[m] = 0;
      }
      row.seconds[m] = seconds_since(t0);
    }
    rows[inst] = std::move(row);
  }

  for (int m = 0; m < nm; ++m) {
    MethodOutcome mo;
    mo.method = spec.methods[m];
    for (int inst = 0; inst < spec.instances; ++inst) {
      mo.success.push_back(rows[inst].success[m]);
      mo.seconds.push_back(rows[inst].seconds[m]);
      if (rows[inst].success[m]) ++mo.successes;
    }
    mo.mean_seconds = 0.0;
    for (double s : mo.seconds) mo.mean_seconds += s;
    mo.mean_seconds /= double(spec.instances);
    std::vector<double> sorted = mo.seconds;
    std::sort(sorted.begin(), sorted.end());
    mo.median_seconds = sorted[sorted.size() / 2];
    out.methods.push_back(std::move(mo));
  }
  return out;
}

std::string study_table(const StudyResult& result) {
  std::ostringstream ss;
  ss << "instances: " << result.spec.instances << "  modes: " << result.spec.num_modes
     << "  state_dim: " << result.spec.state_dim << "  seed: " << result.spec.seed << "\n";
  ss << "method      successes   mean time      median time\n";
  for (const auto& m : result.methods) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-10s  %4d/%-4d   %10.4fs   %10.4fs\n", m.method.c_str(),
                  m.successes, result.spec.instances, m.mean_seconds, m.median_seconds);
    ss << buf;
  }
  return ss.str();
}

std::string study_json(const StudyResult& result) {
  json j;
  j["spec"] = json::parse(serialize_study_spec(result.spec));
  json methods = json::array();
  for (const auto& m : result.methods) {
    json mj;
    mj["method"] = m.method;
    mj["successes"] = m.successes;
    mj["success"] = m.success;
    mj["seconds"] = m.seconds;
    mj["mean_seconds"] = m.mean_seconds;
    mj["median_seconds"] = m.median_seconds;
    methods.push_back(mj);
  }
  j["methods"] = methods;
  return j.dump(2);
}

}  // namespace mdpjls
