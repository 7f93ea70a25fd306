#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcpilot/baselines.hpp"
#include "mcpilot/delayest.hpp"
#include "mcpilot/harness.hpp"
#include "mcpilot/mcopt.hpp"
#include "mcpilot/world.hpp"

namespace mcpilot {

/// CSV cell text with 9 significant digits.
std::string fmt9(double x);

/// Throw sets: per throw, `#` metadata lines (index, v, target, command
/// time, seed), then `t,px,py,pz,vx,vy,vz` rows and a final row whose first
/// cell is `landing`. The true gripper delay is deliberately not written.
void write_throws_csv(std::ostream& out, const std::vector<ThrowRecord>& records,
                      std::uint64_t seed);
std::vector<ThrowRecord> read_throws_csv(std::istream& in, double hit_radius);

void write_results_csv(std::ostream& out, const EvalReport& report);
void write_opt_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);
void write_bo_trace_csv(std::ostream& out, const std::vector<BOSample>& trace);
void write_regression_csv(std::ostream& out, const RegressionSet& data);
RegressionSet read_regression_csv(std::istream& in);

void write_delay(std::ostream& out, const DelayModel& delay, bool estimated);
DelayModel read_delay(std::istream& in, bool* estimated = nullptr);

/// Helpers that open the file and throw std::runtime_error on failure.
void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace mcpilot
