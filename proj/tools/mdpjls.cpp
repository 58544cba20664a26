// Command-line front end: validate, analyze, coefficients, synthesize,
// verify-robust, simulate, study. Exit codes: 0 success, 2 infeasible or
// not certified, 3 input error, 4 numerical failure.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "mdpjls/io.hpp"
#include "mdpjls/lyapunov.hpp"
#include "mdpjls/markov.hpp"
#include "mdpjls/model.hpp"
#include "mdpjls/msstab.hpp"
#include "mdpjls/parallel.hpp"
#include "mdpjls/simulate.hpp"
#include "mdpjls/study.hpp"
#include "mdpjls/synth.hpp"

namespace {

using namespace mdpjls;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kInfeasible = 2;
constexpr int kInputError = 3;
constexpr int kNumericalError = 4;

struct Ctx {
  bool json_out = false;
  int verbosity = 0;
};

void emit(const Ctx& ctx, const std::string& json_doc, const std::string& human) {
  if (ctx.json_out)
    std::cout << json_doc << std::endl;
  else
    std::cout << human << std::endl;
}

MdpJls load_model(const std::string& path) { return parse_model(read_file(path)); }

LyapunovCertificate load_or_compute_cert(const MdpJls& jls, const std::string& cert_path,
                                         double bisect_tol) {
  if (!cert_path.empty()) {
    LyapunovCertificate cert = parse_certificate(read_file(cert_path));
    if (cert.num_modes() != 0 && cert.num_modes() != jls.num_modes())
      throw ValidationError("certificate does not match the model's mode count");
    if (int(cert.alpha.size()) != jls.num_modes())
      throw ValidationError("certificate alpha vector does not match the mode count");
    return cert;
  }
  return certify(jls.system, bisect_tol);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Stabilizing policy synthesis for switched systems with MDP-driven mode switches"};
  app.require_subcommand(1);
  Ctx ctx;
  app.add_flag("--json", ctx.json_out, "machine-readable JSON on stdout");
  app.add_flag("-v,--verbose", ctx.verbosity, "more diagnostics on stderr");

  // validate
  auto* validate = app.add_subcommand("validate", "parse and validate a model document");
  std::string model_path;
  validate->add_option("model", model_path, "model JSON")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "stationary and mean-square analysis of a policy");
  std::string an_model, an_policy;
  analyze->add_option("model", an_model)->required();
  analyze->add_option("--policy", an_policy, "policy JSON")->required();

  // coefficients
  auto* coeff = app.add_subcommand("coefficients", "per-mode Lyapunov decay and jump factors");
  std::string co_model, co_out;
  double co_bisect = kDefaultBisectTol;
  std::string co_disc;
  coeff->add_option("model", co_model)->required();
  coeff->add_option("--bisect-tol", co_bisect, "bisection grid width");
  coeff->add_option("--discretization", co_disc,
                    "override: euler | exact (continuous-dynamics models only)");
  coeff->add_option("--out", co_out, "write the certificate JSON here");

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "compute a stabilizing policy");
  std::string sy_model, sy_method, sy_cert, sy_out;
  double sy_alpha = 0.0, sy_mu = 0.0, sy_eps = kDefaultEpsilon, sy_delta = 0.0;
  double sy_bisect = kDefaultBisectTol;
  int sy_max_iter = 500;
  std::uint64_t sy_seed = 0;
  synth->add_option("model", sy_model)->required();
  synth->add_option("--method", sy_method, "ms-sdp | ms-cd | p1-ind | p1-dep | p1-robust")
      ->required();
  synth->add_option("--alpha", sy_alpha, "uniform decay rate (p1-ind)");
  synth->add_option("--mu", sy_mu, "uniform jump factor (p1-ind)");
  synth->add_option("--cert", sy_cert, "certificate JSON (else computed)");
  synth->add_option("--delta", sy_delta, "transition uncertainty (p1-robust)");
  synth->add_option("--epsilon", sy_eps, "stationary floor in the LPs");
  synth->add_option("--seed", sy_seed, "CD perturbation seed");
  synth->add_option("--max-iter", sy_max_iter, "CD iteration budget");
  synth->add_option("--bisect-tol", sy_bisect, "certificate bisection width");
  synth->add_option("--out", sy_out, "write the result document here");

  // verify-robust
  auto* vr = app.add_subcommand("verify-robust", "check a policy under transition uncertainty");
  std::string vr_model, vr_policy, vr_cert;
  double vr_delta = 0.0, vr_alpha = 0.0, vr_mu = 0.0, vr_bisect = kDefaultBisectTol;
  vr->add_option("model", vr_model)->required();
  vr->add_option("--policy", vr_policy)->required();
  vr->add_option("--delta", vr_delta)->required();
  vr->add_option("--cert", vr_cert, "certificate JSON: mode-dependent check");
  vr->add_option("--alpha", vr_alpha, "uniform alpha: mode-independent check");
  vr->add_option("--mu", vr_mu, "uniform mu: mode-independent check");
  vr->add_option("--bisect-tol", vr_bisect);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo rollout of the closed loop");
  std::string si_model, si_policy, si_traces;
  int si_steps = 1000, si_runs = 1, si_stride = 1;
  std::uint64_t si_seed = 0;
  sim->add_option("model", si_model)->required();
  sim->add_option("--policy", si_policy)->required();
  sim->add_option("--steps", si_steps);
  sim->add_option("--runs", si_runs);
  sim->add_option("--seed", si_seed);
  sim->add_option("--stride", si_stride);
  sim->add_option("--traces", si_traces, "write one CSV per run into this directory");

  // study
  auto* study = app.add_subcommand("study", "randomized method comparison");
  std::string st_spec;
  study->add_option("spec", st_spec, "study spec JSON")->required();

  CLI11_PARSE(app, argc, argv);
  apply_thread_budget();

  if (*validate) {
    MdpJls jls = load_model(model_path);
    json j;
    j["valid"] = true;
    j["modes"] = jls.num_modes();
    j["state_dim"] = jls.system.state_dim;
    j["actions"] = jls.mdp.num_actions();
    emit(ctx, j.dump(2),
         "valid: " + std::to_string(jls.num_modes()) + " modes, state dimension " +
             std::to_string(jls.system.state_dim) + ", " +
             std::to_string(jls.mdp.num_actions()) + " actions");
    return kOk;
  }

  if (*analyze) {
    MdpJls jls = load_model(an_model);
    Policy policy = parse_policy(read_file(an_policy), jls.mdp);
    Dtmc chain = induce_chain(jls.mdp, policy);
    MsVerdict verdict = check_ms(jls.system, chain);
    StationaryAnalysis st = stationary_distribution(chain);
    std::ostringstream human;
    human << "classification: " << to_string(st.classification) << "\n";
    human << "stationary:";
    for (double v : st.p_inf) human << " " << v;
    human << "\nP_jump: " << st.p_jump << "\nrho(augmented): " << verdict.rho
          << "\nmean-square stable: " << (verdict.stable ? "yes" : "no");
    emit(ctx, serialize_analysis(st, verdict), human.str());
    return kOk;
  }

  if (*coeff) {
    MdpJls jls = load_model(co_model);
    if (!co_disc.empty()) {
      // re-discretize from the original document with the requested method
      json doc = json::parse(read_file(co_model));
      for (auto& mode : doc["modes"])
        if (mode.contains("A_cont")) mode["discretization"] = co_disc;
      jls = parse_model(doc.dump());
    }
    LyapunovCertificate cert = certify(jls.system, co_bisect);
    std::string doc = serialize_certificate(cert);
    if (!co_out.empty()) write_file(co_out, doc);
    std::ostringstream human;
    human << "alpha:";
    for (double a : cert.alpha) human << " " << a;
    human << "\nmu_mode:";
    for (double m : cert.mu_mode) human << " " << m;
    human << "\nalpha_uniform: " << cert.alpha_uniform << "\nmu_uniform: " << cert.mu_uniform;
    emit(ctx, doc, human.str());
    return kOk;
  }

  if (*synth) {
    MdpJls jls = load_model(sy_model);
    if (sy_method == "ms-sdp" || sy_method == "ms-cd") {
      MsSynthesis res;
      if (sy_method == "ms-sdp") {
        res = synthesize_ms_sdp(jls);
      } else {
        CdOptions opts;
        opts.max_iter = sy_max_iter;
        opts.seed = sy_seed;
        res = synthesize_ms_cd(jls, opts);
      }
      std::string doc = serialize_ms_synthesis(res, sy_method);
      if (!sy_out.empty()) write_file(sy_out, doc);
      if (res.ok()) {
        emit(ctx, doc,
             "stabilizing policy found: rho(augmented) = " + std::to_string(res.verdict.rho));
        return kOk;
      }
      emit(ctx, doc, "no certified policy: " + res.note);
      return res.status == MsStatus::Failed ? kNumericalError : kInfeasible;
    }
    if (sy_method == "p1-ind" || sy_method == "p1-dep" || sy_method == "p1-robust") {
      P1Outcome out;
      if (sy_method == "p1-ind" && sy_cert.empty() && sy_alpha > 0.0 && sy_mu > 1.0) {
        out = synthesize_p1_independent(jls, sy_alpha, sy_mu, sy_eps);
      } else {
        LyapunovCertificate cert = load_or_compute_cert(jls, sy_cert, sy_bisect);
        if (sy_method == "p1-ind")
          out = synthesize_p1_independent(jls, cert.alpha_uniform, cert.mu_uniform, sy_eps);
        else if (sy_method == "p1-dep")
          out = synthesize_p1_dependent(jls, cert, sy_eps);
        else
          out = synthesize_p1_robust(jls, sy_delta, cert, sy_eps,
                                     sy_alpha > 0.0 && sy_mu > 1.0 ? RobustMode::Independent
                                                                   : RobustMode::Dependent);
      }
      if (!out.feasible) {
        json j;
        j["status"] = "infeasible";
        j["note"] = out.note;
        emit(ctx, j.dump(2), "infeasible: " + out.note);
        return kInfeasible;
      }
      std::string doc = serialize_synthesis(out.result);
      if (!sy_out.empty()) write_file(sy_out, doc);
      emit(ctx, doc,
           "policy found: P_jump = " + std::to_string(out.result.analysis.p_jump) +
               ", margin = " + std::to_string(out.result.margin));
      return kOk;
    }
    throw ValidationError("unknown method '" + sy_method + "'");
  }

  if (*vr) {
    MdpJls jls = load_model(vr_model);
    Policy policy = parse_policy(read_file(vr_policy), jls.mdp);
    RobustVerdict v;
    if (!vr_cert.empty()) {
      LyapunovCertificate cert = load_or_compute_cert(jls, vr_cert, vr_bisect);
      v = verify_robust_dependent(policy, jls, vr_delta, cert);
    } else if (vr_alpha > 0.0 && vr_mu > 1.0) {
      v = verify_robust_independent(policy, jls, vr_delta, vr_alpha, vr_mu);
    } else {
      LyapunovCertificate cert = certify(jls.system, vr_bisect);
      v = verify_robust_dependent(policy, jls, vr_delta, cert);
    }
    json j;
    j["delta"] = v.delta;
    j["nominal_lhs"] = v.nominal_lhs;
    j["robust_lhs"] = v.robust_lhs;
    j["rhs"] = v.rhs;
    j["satisfied"] = v.satisfied;
    std::ostringstream human;
    human << "nominal " << v.nominal_lhs << "  robust " << v.robust_lhs << "  bound " << v.rhs
          << "  -> " << (v.satisfied ? "satisfied" : "not satisfied");
    emit(ctx, j.dump(2), human.str());
    return v.satisfied ? kOk : kInfeasible;
  }

  if (*sim) {
    MdpJls jls = load_model(si_model);
    Policy policy = parse_policy(read_file(si_policy), jls.mdp);
    SimConfig cfg;
    cfg.steps = si_steps;
    cfg.runs = si_runs;
    cfg.seed = si_seed;
    cfg.record_stride = si_stride;
    SimReport rep = simulate(jls, policy, cfg);
    if (!si_traces.empty()) export_traces(jls, policy, cfg, si_traces);
    double neg = 0.0;
    for (const auto& rr : rep.runs)
      if (rr.slope < 0.0 || rr.slope_is_neg_inf) neg += 1.0;
    std::ostringstream human;
    human << rep.runs.size() << " runs x " << cfg.steps << " steps; negative log-norm slope in "
          << int(neg) << " runs";
    emit(ctx, serialize_sim_report(rep), human.str());
    return kOk;
  }

  if (*study) {
    StudySpec spec = parse_study_spec(read_file(st_spec));
    StudyResult result = run_study(spec);
    emit(ctx, study_json(result), study_table(result));
    return kOk;
  }

  return kInputError;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const SchemaError& e) {
    std::cerr << "input error: " << e.what() << std::endl;
    return kInputError;
  } catch (const ValidationError& e) {
    std::cerr << "input error: " << e.what() << std::endl;
    return kInputError;
  } catch (const PolicyMismatch& e) {
    std::cerr << "input error: " << e.what() << std::endl;
    return kInputError;
  } catch (const TooManyPolicies& e) {
    std::cerr << "input error: " << e.what() << std::endl;
    return kInputError;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << std::endl;
    return kInputError;
  } catch (const mdpjls::Error& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kNumericalError;
  }
}
