#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "algorithm.hpp"
#include "eluder.hpp"
#include "hypothesis.hpp"
#include "link.hpp"
#include "mdp.hpp"
#include "posterior.hpp"
#include "variational.hpp"

namespace prefts {

using nlohmann::json;

// Decimal formatting used in CSVs: 17 significant digits, enough for a
// bit-exact double round-trip. (nlohmann/json already does this for JSON.)
std::string format_double(double x);

json mdp_to_json(const EpisodicMdp& mdp);
EpisodicMdp mdp_from_json(const json& j);

json link_to_json(const LinkFunction& link);
LinkFunction link_from_json(const json& j);

json trajectory_to_json(const Trajectory& tau);
Trajectory trajectory_from_json(const json& j);

json hypothesis_to_json(const QHypothesis& f);
QHypothesis hypothesis_from_json(const json& j, const MdpShape& shape);

json class_to_json(const HypothesisClass& cls);
HypothesisClass class_from_json(const json& j);

json certificate_to_json(const EluderCertificate& cert);
json be_dimension_to_json(const BeDimensionResult& result);

json diagnostics_to_json(const DiagnosticsReport& report);

// Line-oriented run log: a header line (config and V*), then one line per
// round. Wall times are not persisted.
void write_runlog(const std::filesystem::path& path, const RunLog& log);
RunLog read_runlog(const std::filesystem::path& path, const MdpShape& shape);

// Append-only comparison log, one {t, tau0, tau1, o} object per line.
void write_dataset(const std::filesystem::path& path, const RunLog& log);
PreferenceDataset read_dataset(const std::filesystem::path& path);

// "t,regret,per_step_regret,smoothed"
void write_regret_csv(const std::filesystem::path& path, const std::vector<double>& per_round,
                      int smoothing_window);

// "iter,elbo,smoothed_elbo,value_of_mean_greedy"
void write_elbo_csv(const std::filesystem::path& path, const ElboTrace& trace);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace prefts
