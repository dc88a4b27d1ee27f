#include "sgn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sgn {

std::string fmt_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string trace_to_jsonl(const SolveTrace& trace) {
  std::string out;
  for (const auto& it : trace.iters) {
    nlohmann::json row;
    row["k"] = it.k;
    row["objective"] = it.objective;
    row["residual_norm"] = it.residual_norm;
    if (std::isfinite(it.rel_error)) row["rel_error"] = it.rel_error;
    row["jitter"] = it.jitter_used;
    if (!it.support.empty()) row["support"] = it.support;
    out += row.dump();
    out += '\n';
  }
  return out;
}

std::string vector_to_csv(const Eigen::VectorXd& v) {
  std::string out = "index,value\n";
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    out += std::to_string(j);
    out += ',';
    out += fmt_double(v[j]);
    out += '\n';
  }
  return out;
}

nlohmann::json trace_summary_json(const SolveTrace& trace) {
  nlohmann::json j;
  j["status"] = to_string(trace.status);
  j["iterations"] = trace.iterations;
  j["phi"] = trace.phi;
  j["mu_effective"] = trace.mu_effective;
  if (!trace.iters.empty()) {
    j["objective"] = trace.iters.back().objective;
    j["residual_norm"] = trace.iters.back().residual_norm;
    if (std::isfinite(trace.iters.back().rel_error)) j["rel_error"] = trace.iters.back().rel_error;
  }
  if (!trace.message.empty()) j["message"] = trace.message;
  return j;
}

}  // namespace sgn
