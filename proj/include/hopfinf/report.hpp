#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hopfinf/bifurcation.hpp"
#include "hopfinf/flow.hpp"
#include "hopfinf/flux_index.hpp"
#include "hopfinf/spectral.hpp"

namespace hopfinf {

using Json = nlohmann::ordered_json;

Json to_json(const SpectralReport& r);
Json to_json(const FluxProfile& p);
Json to_json(const IndexEstimate& e);
Json to_json(const TransversalityCertificate& c);
Json to_json(const TrajectoryOutcome& o);
Json to_json(const InfinityStability& s);
Json to_json(const SpeedIntegralCheck& s);
Json to_json(const LocateResult& r);
Json to_json(const HypothesisAudit& a);
Json to_json(const MuSample& s);
Json to_json(const BifurcationReport& r);
Json to_json(const ScalingComparison& s);

/// Two-space indented JSON with a trailing newline.
std::string dump(const Json& j);

std::string flux_csv(const FluxProfile& p);
std::string trajectory_csv(const Trajectory& t);
std::string sweep_csv(const BifurcationReport& r);

std::string summary(const SpectralReport& r);
std::string summary(const IndexEstimate& e);
std::string summary(const InfinityStability& s);
std::string summary(const TrajectoryOutcome& o);
std::string summary(const LocateResult& r);
std::string summary(const std::vector<HypothesisAudit>& rows);
std::string summary(const BifurcationReport& r);
std::string summary(const ScalingComparison& s);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace hopfinf
