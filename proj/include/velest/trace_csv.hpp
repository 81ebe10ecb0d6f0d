#pragma once

#include <array>
#include <iosfwd>
#include <string_view>

#include "velest/simulator.hpp"

namespace velest {

/// Trace CSV columns, in file order. Absent values are empty fields.
inline constexpr std::array<std::string_view, 16> kTraceColumns = {
    "t_s",        "gap_true_mm", "v_rel_true_mms", "v_target_true_mms", "d_obs_mm",
    "histo_count", "width_l_px", "width_r_px",     "r_m_l",             "r_m_r",
    "v_raw_mms",  "vn_mms",      "vs_mms",         "v_fused_mms",       "v_kalman_mms",
    "no_estimate_flag"};

void write_trace_csv(std::ostream& out, const ScenarioTrace& trace);

/// Parses a trace CSV. dt is taken from the first two timestamps. Throws
/// ValidationError on a wrong header or malformed row.
ScenarioTrace read_trace_csv(std::istream& in);

}  // namespace velest
