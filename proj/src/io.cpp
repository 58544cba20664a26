#include "mdpjls/io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mdpjls {

using nlohmann::json;

namespace {

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw SchemaError(what + ": expected a matrix (array of arrays)");
  const int rows = int(j.size());
  const int cols = int(j[0].size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (int(j[i].size()) != cols) throw SchemaError(what + ": ragged matrix");
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write file: " + path);
  f << text;
}

Policy parse_policy(const std::string& document, const Mdp& mdp) {
  json j;
  try {
    j = json::parse(document);
  } catch (const std::exception& e) {
    throw SchemaError(std::string("policy document: not valid JSON: ") + e.what());
  }
  if (!j.contains("policy")) throw SchemaError("policy document: missing \"policy\"");
  Policy p;
  p.probs = matrix_from(j["policy"], "policy");
  p.validate_for(mdp, 1e-7);
  return p;
}

std::string serialize_policy(const Policy& policy) {
  json j;
  j["policy"] = matrix_json(policy.probs);
  return j.dump(2);
}

std::string serialize_synthesis(const SynthesisResult& res) {
  json j;
  j["policy"] = matrix_json(res.policy.probs);
  j["induced_P"] = matrix_json(res.chain.p);
  j["stationary"] = res.analysis.p_inf;
  j["inbound"] = res.analysis.inbound;
  j["p_jump"] = res.analysis.p_jump;
  j["classification"] = to_string(res.analysis.classification);
  j["margin"] = res.margin;
  j["objective"] = res.objective;
  j["method"] = res.method;
  json coeff;
  coeff["alpha"] = res.alpha_uniform;
  coeff["mu"] = res.mu_uniform;
  if (!res.alpha_mode.empty()) coeff["alpha_mode"] = res.alpha_mode;
  if (!res.mu_mode.empty()) coeff["mu_mode"] = res.mu_mode;
  j["coefficients"] = coeff;
  if (res.robust) {
    json r;
    r["delta"] = res.robust->delta;
    r["lhs"] = res.robust->robust_lhs;
    r["nominal_lhs"] = res.robust->nominal_lhs;
    r["rhs"] = res.robust->rhs;
    r["satisfied"] = res.robust->satisfied;
    j["robust"] = r;
  }
  j["warnings"] = res.warnings;
  return j.dump(2);
}

SynthesisResult parse_synthesis(const std::string& document) {
  json j = json::parse(document);
  SynthesisResult res;
  res.policy.probs = matrix_from(j.at("policy"), "policy");
  res.chain.p = matrix_from(j.at("induced_P"), "induced_P");
  res.analysis.p_inf = j.at("stationary").get<std::vector<double>>();
  if (j.contains("inbound")) res.analysis.inbound = j["inbound"].get<std::vector<double>>();
  res.analysis.p_jump = j.at("p_jump").get<double>();
  res.margin = j.at("margin").get<double>();
  res.objective = j.value("objective", 0.0);
  res.method = j.value("method", "");
  if (j.contains("coefficients")) {
    res.alpha_uniform = j["coefficients"].value("alpha", 0.0);
    res.mu_uniform = j["coefficients"].value("mu", 0.0);
    if (j["coefficients"].contains("alpha_mode"))
      res.alpha_mode = j["coefficients"]["alpha_mode"].get<std::vector<double>>();
    if (j["coefficients"].contains("mu_mode"))
      res.mu_mode = j["coefficients"]["mu_mode"].get<std::vector<double>>();
  }
  if (j.contains("warnings")) res.warnings = j["warnings"].get<std::vector<std::string>>();
  return res;
}

std::string serialize_ms_synthesis(const MsSynthesis& res, const std::string& method) {
  json j;
  j["method"] = method;
  switch (res.status) {
    case MsStatus::Success:
      j["status"] = "success";
      break;
    case MsStatus::Infeasible:
      j["status"] = "infeasible";
      break;
    case MsStatus::NotCertified:
      j["status"] = "not-certified";
      break;
    case MsStatus::Failed:
      j["status"] = "failed";
      break;
  }
  if (res.status == MsStatus::Success) {
    j["policy"] = matrix_json(res.policy.probs);
    j["induced_P"] = matrix_json(res.chain.p);
    j["rho"] = res.verdict.rho;
    j["gamma"] = res.gamma;
    json v = json::array();
    for (const auto& vi : res.v) v.push_back(matrix_json(vi));
    j["lyapunov_V"] = v;
  }
  j["iterations"] = res.iterations;
  if (!res.note.empty()) j["note"] = res.note;
  return j.dump(2);
}

std::string serialize_certificate(const LyapunovCertificate& cert) {
  json j;
  json ms = json::array();
  for (const auto& m : cert.m) ms.push_back(matrix_json(m));
  j["M"] = ms;
  j["alpha"] = cert.alpha;
  j["mu_pair"] = matrix_json(cert.mu_pair);
  j["alpha_uniform"] = cert.alpha_uniform;
  j["mu_uniform"] = cert.mu_uniform;
  j["mu_mode"] = cert.mu_mode;
  return j.dump(2);
}

LyapunovCertificate parse_certificate(const std::string& document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const std::exception& e) {
    throw SchemaError(std::string("certificate document: not valid JSON: ") + e.what());
  }
  LyapunovCertificate cert;
  if (!j.contains("alpha")) throw SchemaError("certificate document: missing \"alpha\"");
  cert.alpha = j["alpha"].get<std::vector<double>>();
  if (j.contains("M"))
    for (const auto& m : j["M"]) cert.m.push_back(matrix_from(m, "M"));
  if (j.contains("mu_pair")) cert.mu_pair = matrix_from(j["mu_pair"], "mu_pair");
  cert.alpha_uniform = j.value("alpha_uniform", 0.0);
  cert.mu_uniform = j.value("mu_uniform", 0.0);
  if (j.contains("mu_mode")) cert.mu_mode = j["mu_mode"].get<std::vector<double>>();
  return cert;
}

std::string serialize_sim_report(const SimReport& rep) {
  json j;
  j["steps"] = rep.cfg.steps;
  j["runs"] = rep.cfg.runs;
  j["seed"] = rep.cfg.seed;
  json runs = json::array();
  for (const auto& rr : rep.runs) {
    json r;
    r["jump_freq"] = rr.jump_freq;
    r["occupancy"] = rr.occupancy;
    r["inbound"] = rr.inbound;
    r["slope"] = rr.slope_is_neg_inf ? json("-inf") : json(rr.slope);
    r["diverged"] = rr.diverged;
    runs.push_back(r);
  }
  j["per_run"] = runs;
  j["pooled_k"] = rep.pooled_k;
  j["pooled_second_moment_trace"] = rep.pooled_second_moment;
  return j.dump(2);
}

std::string serialize_analysis(const StationaryAnalysis& st, const MsVerdict& verdict) {
  json j;
  j["stationary"] = st.p_inf;
  j["inbound"] = st.inbound;
  j["p_jump"] = st.p_jump;
  j["classification"] = to_string(st.classification);
  j["rho_augmented"] = verdict.rho;
  j["mean_square_stable"] = verdict.stable;
  return j.dump(2);
}

}  // namespace mdpjls
