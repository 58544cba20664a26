#include "mdpjls/model.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

namespace mdpjls {

namespace {

constexpr double kRowSumTol = 1e-9;

using nlohmann::json;

Mat parse_matrix(const json& j, int rows, int cols, const std::string& path) {
  if (!j.is_array() || int(j.size()) != rows)
    throw SchemaError(path + ": expected " + std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || int(row.size()) != cols)
      throw SchemaError(path + "[" + std::to_string(i) + "]: expected " + std::to_string(cols) +
                        " entries");
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        throw SchemaError(path + "[" + std::to_string(i) + "][" + std::to_string(c) +
                          "]: expected a number");
      m(i, c) = row[c].get<double>();
    }
  }
  if (!m.all_finite()) throw SchemaError(path + ": non-finite entry");
  return m;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

void SwitchedSystem::validate() const {
  if (dynamics.empty()) throw ValidationError("system: at least one mode required");
  for (size_t s = 0; s < dynamics.size(); ++s) {
    const Mat& a = dynamics[s];
    if (a.rows() != state_dim || a.cols() != state_dim)
      throw ValidationError("mode '" + mode_names[s] + "': dynamics must be " +
                            std::to_string(state_dim) + "x" + std::to_string(state_dim));
    if (!a.all_finite()) throw ValidationError("mode '" + mode_names[s] + "': non-finite entry");
  }
}

int Mdp::num_available(int state) const {
  int c = 0;
  for (int sigma = 0; sigma < num_actions(); ++sigma)
    if (available[state][sigma]) ++c;
  return c;
}

void Mdp::validate() const {
  const int n = num_states();
  for (int sigma = 0; sigma < num_actions(); ++sigma) {
    const Mat& t = transition[sigma];
    if (t.rows() != n || t.cols() != n)
      throw ValidationError("action '" + action_names[sigma] + "': transition matrix must be " +
                            std::to_string(n) + "x" + std::to_string(n));
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        double v = t(i, j);
        if (v < -1e-15 || v > 1.0 + 1e-12)
          throw ValidationError("action '" + action_names[sigma] + "', state '" + state_names[i] +
                                "': probability out of [0,1]");
        sum += v;
      }
      if (available[i][sigma]) {
        if (std::fabs(sum - 1.0) > kRowSumTol)
          throw ValidationError("action '" + action_names[sigma] + "', state '" + state_names[i] +
                                "': row sums to " + std::to_string(sum));
      } else if (sum != 0.0) {
        throw ValidationError("action '" + action_names[sigma] + "', state '" + state_names[i] +
                              "': unavailable action must have an all-zero row");
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (num_available(i) == 0)
      throw ValidationError("state '" + state_names[i] + "': no available action");
  if (initial_state < 0 || initial_state >= n)
    throw ValidationError("initial state index out of range");
}

void Policy::validate_for(const Mdp& mdp, double tol) const {
  if (probs.rows() != mdp.num_states() || probs.cols() != mdp.num_actions())
    throw PolicyMismatch("policy: expected " + std::to_string(mdp.num_states()) + "x" +
                         std::to_string(mdp.num_actions()) + " probabilities");
  for (int i = 0; i < probs.rows(); ++i) {
    double sum = 0.0;
    for (int sigma = 0; sigma < probs.cols(); ++sigma) {
      double v = probs(i, sigma);
      if (v < -tol) throw PolicyMismatch("policy: negative probability at state " + std::to_string(i));
      if (!mdp.available[i][sigma] && v > tol)
        throw PolicyMismatch("policy: probability on unavailable action '" +
                             mdp.action_names[sigma] + "' at state '" + mdp.state_names[i] + "'");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > tol)
      throw PolicyMismatch("policy: row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

void Dtmc::validate(double tol) const {
  if (!p.square()) throw ValidationError("chain: square matrix required");
  for (int i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < p.cols(); ++j) {
      if (p(i, j) < -tol || p(i, j) > 1.0 + tol)
        throw ValidationError("chain: entry out of [0,1]");
      sum += p(i, j);
    }
    if (std::fabs(sum - 1.0) > tol)
      throw ValidationError("chain: row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

void MdpJls::validate() const {
  system.validate();
  mdp.validate();
  if (system.num_modes() != mdp.num_states())
    throw ValidationError("model: modes and MDP states must align 1:1");
  if (int(costs.size()) != mdp.num_states())
    throw ValidationError("model: costs must have one entry per state");
}

MdpJls parse_model(const std::string& document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const std::exception& e) {
    throw SchemaError(std::string("document: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("document: expected a JSON object");

  MdpJls m;
  if (!j.contains("state_dim") || !j["state_dim"].is_number_integer())
    throw SchemaError("state_dim: missing or not an integer");
  m.system.state_dim = j["state_dim"].get<int>();
  if (m.system.state_dim < 1) throw SchemaError("state_dim: must be >= 1");

  if (!j.contains("modes") || !j["modes"].is_array() || j["modes"].empty())
    throw SchemaError("modes: missing or empty");
  const int n = m.system.state_dim;
  for (size_t s = 0; s < j["modes"].size(); ++s) {
    const json& mode = j["modes"][s];
    const std::string path = "modes[" + std::to_string(s) + "]";
    if (!mode.is_object() || !mode.contains("name") || !mode["name"].is_string())
      throw SchemaError(path + ".name: missing or not a string");
    m.system.mode_names.push_back(mode["name"].get<std::string>());
    if (mode.contains("A")) {
      m.system.dynamics.push_back(parse_matrix(mode["A"], n, n, path + ".A"));
      m.discretization.push_back(std::nullopt);
    } else if (mode.contains("A_cont")) {
      Mat ac = parse_matrix(mode["A_cont"], n, n, path + ".A_cont");
      if (!mode.contains("dt") || !mode["dt"].is_number())
        throw SchemaError(path + ".dt: missing or not a number");
      double dt = mode["dt"].get<double>();
      if (!(dt > 0.0)) throw SchemaError(path + ".dt: must be positive");
      Discretization method = Discretization::Euler;
      if (mode.contains("discretization")) {
        std::string d = mode["discretization"].get<std::string>();
        if (d == "euler")
          method = Discretization::Euler;
        else if (d == "exact")
          method = Discretization::Exact;
        else
          throw SchemaError(path + ".discretization: expected \"euler\" or \"exact\"");
      }
      m.system.dynamics.push_back(discretize(ac, dt, method));
      m.discretization.push_back(method);
    } else {
      throw SchemaError(path + ": expected either A or A_cont");
    }
  }

  if (!j.contains("actions") || !j["actions"].is_array() || j["actions"].empty())
    throw SchemaError("actions: missing or empty");
  for (const auto& a : j["actions"]) {
    if (!a.is_string()) throw SchemaError("actions: expected strings");
    m.mdp.action_names.push_back(a.get<std::string>());
  }
  m.mdp.state_names = m.system.mode_names;

  if (!j.contains("transitions") || !j["transitions"].is_object())
    throw SchemaError("transitions: missing or not an object");
  const int nmodes = m.system.num_modes();
  for (const auto& name : m.mdp.action_names) {
    if (!j["transitions"].contains(name))
      throw SchemaError("transitions." + name + ": missing matrix for action");
    m.mdp.transition.push_back(
        parse_matrix(j["transitions"][name], nmodes, nmodes, "transitions." + name));
  }
  m.mdp.available.assign(nmodes, std::vector<bool>(m.mdp.num_actions(), false));
  for (int i = 0; i < nmodes; ++i)
    for (int sigma = 0; sigma < m.mdp.num_actions(); ++sigma) {
      double sum = 0.0;
      for (int k = 0; k < nmodes; ++k) sum += std::fabs(m.mdp.transition[sigma](i, k));
      m.mdp.available[i][sigma] = sum != 0.0;
    }

  if (!j.contains("initial_mode") || !j["initial_mode"].is_string())
    throw SchemaError("initial_mode: missing or not a string");
  const std::string init = j["initial_mode"].get<std::string>();
  auto it = std::find(m.system.mode_names.begin(), m.system.mode_names.end(), init);
  if (it == m.system.mode_names.end())
    throw SchemaError("initial_mode: unknown mode '" + init + "'");
  m.mdp.initial_state = int(it - m.system.mode_names.begin());

  if (j.contains("costs")) {
    if (!j["costs"].is_array() || int(j["costs"].size()) != nmodes)
      throw SchemaError("costs: expected a list with one entry per mode");
    for (const auto& c : j["costs"]) {
      if (!c.is_number()) throw SchemaError("costs: expected numbers");
      m.costs.push_back(c.get<double>());
    }
  } else {
    m.costs.assign(nmodes, 0.0);
  }

  m.validate();
  return m;
}

std::string serialize_model(const MdpJls& m) {
  json j;
  j["state_dim"] = m.system.state_dim;
  json modes = json::array();
  for (int s = 0; s < m.num_modes(); ++s) {
    json mode;
    mode["name"] = m.system.mode_names[s];
    mode["A"] = matrix_to_json(m.system.dynamics[s]);
    modes.push_back(mode);
  }
  j["modes"] = modes;
  j["actions"] = m.mdp.action_names;
  json trans;
  for (int sigma = 0; sigma < m.mdp.num_actions(); ++sigma)
    trans[m.mdp.action_names[sigma]] = matrix_to_json(m.mdp.transition[sigma]);
  j["transitions"] = trans;
  j["initial_mode"] = m.system.mode_names[m.mdp.initial_state];
  j["costs"] = m.costs;
  return j.dump(2);
}

Dtmc induce_chain(const Mdp& mdp, const Policy& policy) {
  policy.validate_for(mdp);
  const int n = mdp.num_states();
  Dtmc chain;
  chain.p = Mat(n, n);
  chain.initial_state = mdp.initial_state;
  for (int i = 0; i < n; ++i)
    for (int sigma = 0; sigma < mdp.num_actions(); ++sigma) {
      const double w = policy.probs(i, sigma);
      if (w == 0.0) continue;
      for (int k = 0; k < n; ++k) chain.p(i, k) += w * mdp.t(i, sigma, k);
    }
  chain.validate();
  return chain;
}

std::uint64_t count_deterministic_policies(const Mdp& mdp) {
  std::uint64_t count = 1;
  for (int i = 0; i < mdp.num_states(); ++i) {
    count *= std::uint64_t(mdp.num_available(i));
    if (count > (1ull << 20)) return count;
  }
  return count;
}

std::vector<Policy> enumerate_deterministic_policies(const Mdp& mdp) {
  if (count_deterministic_policies(mdp) > (1ull << 20))
    throw TooManyPolicies("deterministic enumeration: more than 2^20 policies");
  const int n = mdp.num_states();
  std::vector<std::vector<int>> avail(n);
  for (int i = 0; i < n; ++i)
    for (int sigma = 0; sigma < mdp.num_actions(); ++sigma)
      if (mdp.available[i][sigma]) avail[i].push_back(sigma);

  std::vector<Policy> out;
  std::vector<int> choice(n, 0);
  while (true) {
    Policy p;
    p.probs = Mat(n, mdp.num_actions());
    for (int i = 0; i < n; ++i) p.probs(i, avail[i][choice[i]]) = 1.0;
    out.push_back(std::move(p));
    int pos = n - 1;
    while (pos >= 0) {
      if (++choice[pos] < int(avail[pos].size())) break;
      choice[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace mdpjls
