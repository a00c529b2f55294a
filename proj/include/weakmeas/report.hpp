#pragma once

#include <string>
#include <vector>

#include "weakmeas/config.hpp"
#include "weakmeas/sweep.hpp"

namespace weakmeas::cli {

inline constexpr int kCsvSignificantDigits = 12;

const std::string& csv_header();

// Shortest representation with at most 12 significant digits; always '.' as
// the decimal separator, independent of the global locale.
std::string format_number(double value, int significant_digits = kCsvSignificantDigits);

std::string format_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_csv(const std::string& text);

// Both throw std::invalid_argument on empty rows and std::runtime_error when
// the path cannot be written.
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);
void emit_svg(const std::vector<SweepRow>& rows, const std::string& path, Mode mode);

std::vector<SweepRow> read_csv(const std::string& path);

// Line chart: one series per theta (sweep-g), per part (sweep-alpha), or the
// estimator against its finite-g prediction (sweep-theta, single).
std::string render_svg(const std::vector<SweepRow>& rows, Mode mode);

}  // namespace weakmeas::cli
