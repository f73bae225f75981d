#pragma once

#include "config.hpp"

#include <kcut/optimizer.hpp>

#include <json.hpp>

#include <iosfwd>

namespace kcut::app {

// Each command returns the process exit code: 0 success, 1 failed
// assertion or experiment check. Config problems throw UsageError.
int cmd_cluster(const RunConfig& cfg, std::ostream& log);
int cmd_segment(const RunConfig& cfg, std::ostream& log);
int cmd_embed(const RunConfig& cfg, std::ostream& log);
int cmd_experiment(const std::string& name, std::uint64_t seed, const std::string& out, std::ostream& log);
// Prints metrics JSON for a predicted labeling against a reference.
int cmd_evaluate(const std::string& labels, const std::string& truth, std::ostream& log);

// shared with the service
JointEnergySpec cluster_spec(const RunConfig& cfg, const Dataset& data);
nlohmann::json energy_json(const EnergyBreakdown& e);
nlohmann::json trace_json(const RunTrace& t);
CutOptions cut_options(const RunConfig& cfg);

}  // namespace kcut::app
