#pragma once

// Text serialization of trajectories, reports and violation lists.

#include <iosfwd>
#include <string>
#include <vector>

#include "adamlab/analysis.hpp"
#include "adamlab/optimizer.hpp"

namespace adamlab {

/// %.17g; round-trips through strtod. NaN and infinities print as nan / inf / -inf.
std::string format_double(double x);

/// One JSON object per kept step record: t, k, i (null for with-replacement),
/// batch, eta, objective, full_grad_norm, step_norm, x_norm and, when
/// include_x is set and the record has a snapshot, x. NaN is written as null.
void write_trajectory_jsonl(std::ostream& out, const TrajectoryLog& log, bool include_x);

std::string concentration_json(const ConcentrationReport& report);
std::string violations_json(const std::vector<Violation>& violations);

/// Writes bytes to path, creating parent directories. Throws std::runtime_error
/// naming the path on failure.
void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace adamlab
