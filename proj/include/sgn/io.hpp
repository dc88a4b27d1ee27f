#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "sgn/solver.hpp"

namespace sgn {

inline constexpr const char* kVersion = "0.1.0";

// Shortest round-trip decimal representation; identical strings for
// identical bit patterns, which is what the determinism contracts compare.
std::string fmt_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& content);

// One JSON object per iteration record, newline separated.
std::string trace_to_jsonl(const SolveTrace& trace);

// index,value rows for a vector.
std::string vector_to_csv(const Eigen::VectorXd& v);

nlohmann::json trace_summary_json(const SolveTrace& trace);

}  // namespace sgn
