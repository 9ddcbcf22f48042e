#include <fstream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "awpi/scenario_io.hpp"

namespace awpi {
namespace {

constexpr const char* kColumns[] = {"t", "h_used", "u", "x", "y", "w", "z_i", "z_u", "z_l", "n_iterations", "converged"};

std::string num(double v) { return fmt::format("{:.12g}", v); }

void write_csv(const EventLog& log, std::ostream& out) {
  for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
  for (const auto& r : log.records) {
    const auto& s = r.state_after;
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{}\n", num(r.t), num(r.h_used), num(s.u), num(s.x), num(s.y),
               num(s.w), s.limiter.z_i(), s.limiter.z_u(), s.limiter.z_l(), r.n_iterations,
               r.converged() ? 1 : 0);
  }
}

void write_jsonl(const EventLog& log, std::ostream& out) {
  for (const auto& r : log.records) {
    const auto& s = r.state_after;
    fmt::print(out,
               "{{\"t\":{},\"h_used\":{},\"u\":{},\"x\":{},\"y\":{},\"w\":{},\"z_i\":{},\"z_u\":{},\"z_l\":{},"
               "\"n_iterations\":{},\"converged\":{}}}\n",
               num(r.t), num(r.h_used), num(s.u), num(s.x), num(s.y), num(s.w), s.limiter.z_i(), s.limiter.z_u(),
               s.limiter.z_l(), r.n_iterations, r.converged() ? "true" : "false");
  }
}

}  // namespace

OutputFormat output_format_from_string(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json-lines" || s == "jsonl") return OutputFormat::json_lines;
  throw std::invalid_argument("unknown format '" + std::string(s) + "' (expected csv or json-lines)");
}

void write_timeseries(const EventLog& log, std::ostream& out, OutputFormat format) {
  if (log.records.empty()) throw std::invalid_argument("write_timeseries: log is empty");
  if (format == OutputFormat::csv) {
    write_csv(log, out);
  } else {
    write_jsonl(log, out);
  }
}

void write_timeseries(const EventLog& log, const std::filesystem::path& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_timeseries(log, out, format);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace awpi
