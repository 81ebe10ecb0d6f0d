#include "velest/trace_csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "velest/errors.hpp"

namespace velest {

namespace {

void put(std::ostream& out, double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  out.write(buffer, result.ptr - buffer);
}

void put(std::ostream& out, const std::optional<double>& value) {
  if (value) put(out, *value);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, std::size_t line) {
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw ValidationError("trace csv: bad number '" + text + "' at line " + std::to_string(line));
  }
  return value;
}

std::optional<double> parse_optional(const std::string& text, std::size_t line) {
  if (text.empty()) return std::nullopt;
  return parse_double(text, line);
}

}  // namespace

void write_trace_csv(std::ostream& out, const ScenarioTrace& trace) {
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    if (i) out << ',';
    out << kTraceColumns[i];
  }
  out << '\n';
  for (const auto& f : trace.frames) {
    put(out, f.t_s);
    out << ',';
    put(out, f.gap_true_mm);
    out << ',';
    put(out, f.v_rel_true_mm_s);
    out << ',';
    put(out, f.v_target_true_mm_s);
    out << ',';
    put(out, f.d_obs_mm);
    out << ',' << f.histo_count << ',';
    put(out, f.width_l_px);
    out << ',';
    put(out, f.width_r_px);
    out << ',';
    put(out, f.r_m_l);
    out << ',';
    put(out, f.r_m_r);
    out << ',';
    put(out, f.v_raw_mm_s);
    out << ',';
    put(out, f.vn_mm_s);
    out << ',';
    put(out, f.vs_mm_s);
    out << ',';
    put(out, f.v_fused_mm_s);
    out << ',';
    put(out, f.v_kalman_mm_s);
    out << ',' << (f.no_estimate ? 1 : 0) << '\n';
  }
}

ScenarioTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace csv: empty input");
  const auto header = split(line);
  if (header.size() != kTraceColumns.size()) {
    throw ValidationError("trace csv: unexpected header");
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kTraceColumns[i]) {
      throw ValidationError("trace csv: column " + std::to_string(i) + " should be '" +
                            std::string(kTraceColumns[i]) + "'");
    }
  }

  ScenarioTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != kTraceColumns.size()) {
      throw ValidationError("trace csv: wrong field count at line " + std::to_string(line_no));
    }
    FrameRecord f;
    f.t_s = parse_double(fields[0], line_no);
    f.gap_true_mm = parse_double(fields[1], line_no);
    f.v_rel_true_mm_s = parse_double(fields[2], line_no);
    f.v_target_true_mm_s = parse_double(fields[3], line_no);
    f.d_obs_mm = parse_optional(fields[4], line_no);
    const double count = parse_double(fields[5], line_no);
    if (count < 0.0) throw ValidationError("trace csv: negative histo_count");
    f.histo_count = static_cast<std::size_t>(count);
    f.width_l_px = parse_optional(fields[6], line_no);
    f.width_r_px = parse_optional(fields[7], line_no);
    f.r_m_l = parse_double(fields[8], line_no);
    f.r_m_r = parse_double(fields[9], line_no);
    f.v_raw_mm_s = parse_optional(fields[10], line_no);
    f.vn_mm_s = parse_optional(fields[11], line_no);
    f.vs_mm_s = parse_optional(fields[12], line_no);
    f.v_fused_mm_s = parse_optional(fields[13], line_no);
    f.v_kalman_mm_s = parse_optional(fields[14], line_no);
    if (fields[15] != "0" && fields[15] != "1") {
      throw ValidationError("trace csv: no_estimate_flag must be 0 or 1");
    }
    f.no_estimate = fields[15] == "1";
    trace.frames.push_back(f);
  }
  if (trace.frames.size() >= 2) {
    trace.dt_s = trace.frames[1].t_s - trace.frames[0].t_s;
  }
  trace.validate();
  return trace;
}

}  // namespace velest
