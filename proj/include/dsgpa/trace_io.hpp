#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dsgpa/diagnostics.hpp"

namespace dsgpa {

inline constexpr const char* kTraceHeader = "k,consensus_err,grad_norm_2,grad_norm_pg,fbar,W1,W2,W3,W4,W,wall_ns";

// 17 significant digits; round-trips every finite double.
std::string format_real(double v);

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace);
void save_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);

std::vector<TraceRecord> read_trace_csv(std::istream& is);
std::vector<TraceRecord> load_trace_csv(const std::string& path);

}  // namespace dsgpa
