#include "dsgpa/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

namespace dsgpa {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << kTraceHeader << '\n';
  for (const TraceRecord& r : trace) {
    os << r.k << ',' << format_real(r.consensus_err) << ',' << format_real(r.grad_norm_2) << ','
       << format_real(r.grad_norm_pg) << ',' << format_real(r.fbar) << ',';
    if (r.lyapunov) {
      const auto& w = *r.lyapunov;
      os << format_real(w.w1) << ',' << format_real(w.w2) << ',' << format_real(w.w3) << ',' << format_real(w.w4) << ','
         << format_real(w.total) << ',';
    } else {
      os << ",,,,,";
    }
    if (r.wall_ns) os << *r.wall_ns;
    os << '\n';
  }
}

void save_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write trace '{}'", path));
  write_trace_csv(out, trace);
  if (!out) throw IoError(fmt::format("failed writing trace '{}'", path));
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_real(const std::string& s, int lineno) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw std::invalid_argument(fmt::format("trace line {}: bad number '{}'", lineno, s));
  return v;
}

}  // namespace

std::vector<TraceRecord> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTraceHeader) throw std::invalid_argument("trace file has an unexpected header");
  std::vector<TraceRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != 11) throw std::invalid_argument(fmt::format("trace line {}: expected 11 fields", lineno));
    TraceRecord r;
    r.k = std::stoll(f[0]);
    r.consensus_err = to_real(f[1], lineno);
    r.grad_norm_2 = to_real(f[2], lineno);
    r.grad_norm_pg = to_real(f[3], lineno);
    r.fbar = to_real(f[4], lineno);
    if (!f[5].empty())
      r.lyapunov = LyapunovTerms{to_real(f[5], lineno), to_real(f[6], lineno), to_real(f[7], lineno),
                                 to_real(f[8], lineno), to_real(f[9], lineno)};
    if (!f[10].empty()) r.wall_ns = std::stoll(f[10]);
    out.push_back(r);
  }
  return out;
}

std::vector<TraceRecord> load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open trace '{}'", path));
  return read_trace_csv(in);
}

}  // namespace dsgpa
