#pragma once

// File formats: channel JSON in, capacity curves (CSV/JSON) and simulation
// results (JSON) out. Requires nlohmann/json.

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capcmp/channel.hpp"
#include "capcmp/schemes.hpp"
#include "capcmp/simulator.hpp"

namespace capcmp::io {

/// File missing, unreadable or malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

/// Accepts {"taps": [[re, im], ...], "normalize": bool}, taps given as bare
/// reals inside "taps", or a bare top-level list of reals. Normalizes unless
/// "normalize" is false.
inline ChannelTaps parse_channel_json(const std::string& text, const std::string& origin = "<string>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(origin + ": invalid JSON: " + e.what());
  }
  bool do_normalize = true;
  nlohmann::json taps_node;
  if (doc.is_array()) {
    taps_node = doc;
  } else if (doc.is_object() && doc.contains("taps")) {
    taps_node = doc["taps"];
    if (doc.contains("normalize")) {
      if (!doc["normalize"].is_boolean()) throw IoError(origin + ": \"normalize\" must be a boolean");
      do_normalize = doc["normalize"].get<bool>();
    }
  } else {
    throw IoError(origin + ": expected an object with \"taps\" or a list of reals");
  }
  if (!taps_node.is_array() || taps_node.empty()) {
    throw IoError(origin + ": \"taps\" must be a non-empty list");
  }
  std::vector<cplx> taps;
  for (const auto& t : taps_node) {
    if (t.is_number()) {
      taps.emplace_back(t.get<double>(), 0.0);
    } else if (t.is_array() && t.size() == 2 && t[0].is_number() && t[1].is_number()) {
      taps.emplace_back(t[0].get<double>(), t[1].get<double>());
    } else {
      throw IoError(origin + ": each tap must be a number or [re, im]");
    }
  }
  try {
    ChannelTaps channel(std::move(taps));
    return do_normalize ? normalize(channel) : channel;
  } catch (const DomainError& e) {
    throw IoError(origin + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ChannelTaps load_channel_json(const std::string& path) {
  return parse_channel_json(read_file(path), path);
}

inline nlohmann::json channel_to_json(const ChannelTaps& channel) {
  nlohmann::json taps = nlohmann::json::array();
  for (const auto& t : channel.taps()) taps.push_back({t.real(), t.imag()});
  return {{"taps", taps}, {"normalize", false}};
}

inline constexpr const char* kCurveCsvHeader = "snr_db,c_ofdm_bits,c_dfe_bits,ratio";

/// Fixed columns snr_db,c_ofdm_bits,c_dfe_bits,ratio; an undefined ratio is "nan".
inline std::string curve_to_csv(const CapacityCurve& curve) {
  std::string out = kCurveCsvHeader;
  out += '\n';
  for (const auto& p : curve.points) {
    out += format_double(p.snr_db) + ',' + format_double(p.c_ofdm) + ',' +
           format_double(p.c_dfe) + ',' + (p.ratio ? format_double(*p.ratio) : "nan") + '\n';
  }
  return out;
}

inline nlohmann::json curve_to_json(const CapacityCurve& curve) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : curve.points) {
    pts.push_back({{"snr_db", p.snr_db},
                   {"c_ofdm_bits", p.c_ofdm},
                   {"c_dfe_bits", p.c_dfe},
                   {"ratio", p.ratio ? nlohmann::json(*p.ratio) : nlohmann::json(nullptr)}});
  }
  return {{"channel_id", curve.channel_id},
          {"modulation", curve.modulation},
          {"n", curve.n},
          {"units", "bits per complex symbol"},
          {"points", pts}};
}

inline nlohmann::json sim_result_to_json(const SimConfig& cfg, const std::string& scheme,
                                         const SimResult& res) {
  nlohmann::json measured = nlohmann::json::array();
  nlohmann::json predicted = nlohmann::json::array();
  for (double v : res.measured_snr) measured.push_back(linear_to_db(v));
  for (double v : res.predicted_snr) predicted.push_back(linear_to_db(v));
  nlohmann::json out{{"scheme", scheme},
                     {"measured_snr_db", measured},
                     {"predicted_snr_db", predicted},
                     {"samples", res.sample_count},
                     {"seed", cfg.seed},
                     {"config",
                      {{"channel", channel_to_json(cfg.channel)},
                       {"n", cfg.n},
                       {"snr_db", linear_to_db(cfg.gamma)},
                       {"mod", cfg.order},
                       {"blocks", cfg.blocks},
                       {"fb_len", cfg.feedback_length()}}}};
  if (res.geometric_snr) out["geometric_snr_db"] = linear_to_db(*res.geometric_snr);
  return out;
}

}  // namespace capcmp::io
