#pragma once

#include <string>

#include "mdpjls/markov.hpp"
#include "mdpjls/model.hpp"
#include "mdpjls/msstab.hpp"
#include "mdpjls/simulate.hpp"
#include "mdpjls/synth.hpp"

namespace mdpjls {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// Policy document: {"policy": N x |Sigma| row-major}. Synthesis-result
/// documents are accepted too (their "policy" key is read).
Policy parse_policy(const std::string& document, const Mdp& mdp);
std::string serialize_policy(const Policy& policy);

std::string serialize_synthesis(const SynthesisResult& res);
SynthesisResult parse_synthesis(const std::string& document);

std::string serialize_ms_synthesis(const MsSynthesis& res, const std::string& method);

std::string serialize_certificate(const LyapunovCertificate& cert);
LyapunovCertificate parse_certificate(const std::string& document);

std::string serialize_sim_report(const SimReport& rep);

std::string serialize_analysis(const StationaryAnalysis& st, const MsVerdict& verdict);

}  // namespace mdpjls
