#pragma once

#include <string>

#include "uavsec/scenario.hpp"
#include "uavsec/validation.hpp"

namespace uavsec {

/// printf("%.9g"): the fixed precision of every CSV and JSON number.
std::string format_g9(double value);

/// {"objective_bps_hz", "n_slots", "waypoints": [[x, y], ...], "powers_w",
/// "slacks": {name: [...]}} with numbers rounded to 9 significant digits.
std::string solution_to_json(const Solution& solution);
Solution solution_from_json(const std::string& text);

std::string report_to_json(const ValidationReport& report);

/// Writes to `path + ".tmp"` and renames, so readers never see a partial file.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace uavsec
