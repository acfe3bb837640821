/**
 * @file io.hpp
 * @brief JSON records and CSV output. Angles are written in degrees.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "polcomp/ecm.hpp"
#include "polcomp/error_model.hpp"
#include "polcomp/photon_sim.hpp"
#include "polcomp/tomography.hpp"

namespace polcomp::io {

using nlohmann::json;

/// Shortest decimal representation that round-trips to the same double.
/// Plain notation for moderate magnitudes, exponent notation otherwise.
inline std::string format_double(double value) {
  char buf[512];
  const double mag = std::abs(value);
  const bool plain = mag == 0.0 || (mag >= 1e-4 && mag < 1e15);
  const auto res = plain ? std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed)
                         : std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline json to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json device_error_deg(const DeviceError& err) {
  return {{"eps_q_deg", rad_to_deg(err.eps_q)},
          {"eps_h_deg", rad_to_deg(err.eps_h)},
          {"eps_dq_deg", rad_to_deg(err.eps_dq)},
          {"eps_dh_deg", rad_to_deg(err.eps_dh)}};
}

/// {ideal_vector, settings: [{q_deg, h_deg}], weights}
inline json to_json(const CompositeMeasurement& cm) {
  json settings = json::array();
  json weights = json::array();
  for (const auto& s : cm.settings()) {
    settings.push_back({{"q_deg", rad_to_deg(s.q)}, {"h_deg", rad_to_deg(s.h)}});
    weights.push_back(cm.weight());
  }
  return {{"ideal_vector", to_json(cm.ideal())}, {"settings", settings}, {"weights", weights}};
}

inline CompositeMeasurement composite_from_json(const json& j) {
  std::vector<AngleSetting> settings;
  for (const auto& s : j.at("settings")) {
    settings.push_back({deg_to_rad(s.at("q_deg").get<double>()),
                        deg_to_rad(s.at("h_deg").get<double>())});
  }
  return CompositeMeasurement(std::move(settings));
}

inline json to_json(const TomographyScheme& scheme) {
  json arms = json::array();
  for (const auto& arm : scheme.arms()) arms.push_back(to_json(arm));
  return {{"arms", arms}};
}

inline json to_json(const NcmCoefficients& c) {
  return {{"h", c.c_h}, {"dh", c.c_dh}, {"dq", c.c_dq}, {"q", c.c_q}};
}

inline json to_json(const ErrorBudget& b) {
  json per_channel = json::object();
  for (ErrorChannel ch : kAllChannels) per_channel[std::string(channel_name(ch))] = b.ncm(ch);
  return {{"ncm", {{"coefficients", to_json(b.ncm_coefficients)},
                   {"channel_errors", per_channel},
                   {"total", b.ncm_total}}},
          {"ecm", {{"coefficient_q", b.ecm_coefficient}, {"total", b.ecm_total}}}};
}

inline json to_json(const CountRecord& counts) {
  json arms = json::array();
  for (const auto& arm : counts.arms) {
    json settings = json::array();
    for (const auto& c : arm) settings.push_back({{"n_plus", c.n_plus}, {"n_minus", c.n_minus}});
    arms.push_back(settings);
  }
  return arms;
}

/// RFC 4180 field quoting.
inline std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) { row(header); }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << csv_field(fields[i]);
    }
    os_ << "\r\n";
  }

 private:
  std::ostream& os_;
};

}  // namespace polcomp::io
