#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include <json.hpp>

#include "weakmeas/grape.hpp"

namespace weakmeas::grape {

namespace {

std::string format_exact(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& where) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw std::runtime_error("pulse CSV: cannot parse '" + field + "' at " + where);
  }
  return value;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_pulse(const ControlPulse& pulse, const std::string& csv_path,
                 const std::string& sidecar_path, const std::string& extra_metadata_json) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write pulse CSV: " + csv_path);
  csv << "segment";
  for (int k = 0; k < pulse.channels(); ++k) csv << ",channel_" << k;
  csv << '\n';
  for (int j = 0; j < pulse.segments(); ++j) {
    csv << j;
    for (int k = 0; k < pulse.channels(); ++k) csv << ',' << format_exact(pulse.at(j, k));
    csv << '\n';
  }
  if (!csv) throw std::runtime_error("failed writing pulse CSV: " + csv_path);

  nlohmann::ordered_json meta;
  meta["dt"] = pulse.dt();
  meta["segments"] = pulse.segments();
  meta["channels"] = pulse.channels();
  meta["units"] = "rad/s";
  meta["labels"] = pulse.labels;
  meta["metadata"] = nlohmann::ordered_json::parse(extra_metadata_json);
  std::ofstream side(sidecar_path, std::ios::binary);
  if (!side) throw std::runtime_error("cannot write pulse sidecar: " + sidecar_path);
  side << meta.dump(2) << '\n';
}

ControlPulse read_pulse(const std::string& csv_path, const std::string& sidecar_path) {
  std::ifstream side(sidecar_path);
  if (!side) throw std::runtime_error("cannot read pulse sidecar: " + sidecar_path);
  const auto meta = nlohmann::json::parse(side);
  const double dt = meta.at("dt").get<double>();
  const int segments = meta.at("segments").get<int>();
  const int channels = meta.at("channels").get<int>();

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot read pulse CSV: " + csv_path);
  std::string line;
  if (!std::getline(csv, line)) throw std::runtime_error("pulse CSV: missing header");
  const auto header = split(line);
  if (static_cast<int>(header.size()) != channels + 1 || header[0] != "segment") {
    throw std::runtime_error("pulse CSV: header does not match the sidecar channel count");
  }
  for (int k = 0; k < channels; ++k) {
    if (header[static_cast<std::size_t>(k + 1)] != "channel_" + std::to_string(k)) {
      throw std::runtime_error("pulse CSV: unexpected column '" + header[static_cast<std::size_t>(k + 1)] + "'");
    }
  }
  std::vector<double> amps;
  int row = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != channels + 1) {
      throw std::runtime_error("pulse CSV: wrong field count on row " + std::to_string(row));
    }
    if (cells[0] != std::to_string(row)) {
      throw std::runtime_error("pulse CSV: segments must be listed in order");
    }
    for (int k = 0; k < channels; ++k) {
      amps.push_back(parse_double(cells[static_cast<std::size_t>(k + 1)], "row " + std::to_string(row)));
    }
    ++row;
  }
  if (row != segments) throw std::runtime_error("pulse CSV: segment count does not match sidecar");
  ControlPulse pulse(segments, channels, dt, std::move(amps));
  if (meta.contains("labels")) pulse.labels = meta.at("labels").get<std::vector<std::string>>();
  return pulse;
}

}  // namespace weakmeas::grape
