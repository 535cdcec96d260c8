#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparselog/model.hpp"
#include "sparselog/posterior.hpp"
#include "sparselog/riccati.hpp"
#include "sparselog/risk.hpp"
#include "sparselog/trainers.hpp"
#include "sparselog/verify.hpp"

namespace sparselog {

using json = nlohmann::ordered_json;

/// Shortest round-trip text for a double: 17 significant digits.
std::string format_double(double x);

void ensure_directory(const std::filesystem::path& dir);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

/// Header x0,...,x{d-1},y[,soft].
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// {d, s, n, seed, support, values}.
json dataset_metadata(const TargetVector& target, const Dataset& data);
TargetVector target_from_metadata(const json& meta);

/// Header t,train_loss,val_loss,norm_S,norm_Sc[,w_0..w_{d-1}]; val_loss is empty when not recorded.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          bool with_coordinates);

/// Header t,i,role,lower,upper,flow_value.
void write_envelope_csv(const std::filesystem::path& path, const SandwichReport& report);

/// Header idx,accept,logpost,znorm,excess.
void write_chain_csv(const std::filesystem::path& path, const PosteriorChain& chain,
                     const std::vector<double>& excess);

json to_json(const Vec& v);
json to_json(const RiskReport& report);
json to_json(const BoundReport& report);
json to_json(const OracleReport& report);
json to_json(const std::vector<OracleReport>& reports);
json to_json(const PosteriorEstimate& estimate);
json to_json(const EnvelopeModel& model);

}  // namespace sparselog
