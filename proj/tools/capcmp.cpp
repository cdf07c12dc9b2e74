// capcmp: command-line front end for the OFDM vs SC-DFE capacity library.
//
// Exit codes: 0 success, 2 usage error, 1 computation or I/O error.
// Every file written is accompanied by a manifest from which `capcmp replay`
// regenerates it byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "capcmp/channel.hpp"
#include "capcmp/grid.hpp"
#include "capcmp/io.hpp"
#include "capcmp/qam_capacity.hpp"
#include "capcmp/schemes.hpp"
#include "capcmp/simulator.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace capcmp;

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io::IoError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw io::IoError("write failed for " + path.string());
}

// Files written by one command, recorded in its manifest.
class Bundle {
 public:
  explicit Bundle(fs::path dir) : dir_(std::move(dir)) {}

  const fs::path& dir() const { return dir_; }

  void add(const std::string& name, const std::string& text) {
    write_text(dir_ / name, text);
    outputs_.push_back({{"file", name}, {"sha256", sha256_hex(text)}});
  }

  void finish(const std::string& manifest_name, const std::string& command, const json& params,
              const json& inputs, const json& seed) const {
    const json m{{"tool", "capcmp"},      {"version", kVersion}, {"command", command},
                 {"parameters", params},  {"inputs", inputs},    {"seed", seed},
                 {"outputs", outputs_}};
    write_text(dir_ / manifest_name, m.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  json outputs_ = json::array();
};

std::string manifest_name_for(const std::string& output) { return output + ".manifest.json"; }

// ---- parameter resolution ------------------------------------------------

Modulation modulation_from(const json& mod) {
  if (mod.is_string() && mod.get<std::string>() == "gaussian") return Modulation::gaussian();
  return Modulation::square_qam(mod.get<int>());
}

Constellation constellation_from(int order) {
  try {
    return Constellation::square_qam(order);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

/// Channel named by the parameters; records the input digest for files.
ChannelTaps resolve_channel(const json& params, json& inputs) {
  if (params.contains("builtin")) {
    const auto name = params["builtin"].get<std::string>();
    if (name == "fig1") return fig1_channel();
    if (name == "fig3") return fig3_channel();
    throw UsageError("unknown builtin channel '" + name + "' (expected fig1 or fig3)");
  }
  const auto path = params["channel"].get<std::string>();
  const std::string text = io::read_file(path);
  inputs.push_back({{"path", path}, {"sha256", sha256_hex(text)}});
  return io::parse_channel_json(text, path);
}

json channel_params(const std::string& file, const std::string& builtin) {
  if (!builtin.empty()) return {{"builtin", builtin}};
  if (file.empty()) throw UsageError("one of --channel or --builtin is required");
  std::error_code ec;
  const auto abs = fs::weakly_canonical(fs::absolute(file), ec);
  return {{"channel", (ec ? fs::path(file) : abs).string()}};
}

std::string channel_label(const json& params) {
  if (params.contains("builtin")) return params["builtin"].get<std::string>();
  return fs::path(params["channel"].get<std::string>()).stem().string();
}

/// Splits --out into the bundle directory and file name.
std::pair<fs::path, std::string> split_out(const std::string& out) {
  const fs::path p = fs::absolute(out);
  if (p.filename().empty()) throw UsageError("--out must name a file");
  return {p.parent_path(), p.filename().string()};
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// ---- commands ------------------------------------------------------------
// Each command takes fully resolved parameters (as recorded in manifests)
// and, for file outputs, the directory the output names are relative to.

int run_capacity(const json& p) {
  const double gamma = db_to_linear(p["snr_db"].get<double>());
  const auto mod = p["mod"];
  double c = 0.0;
  if (mod.is_string()) {
    c = gaussian_capacity(gamma);
  } else {
    c = awgn_qam_capacity(gamma, constellation_from(mod.get<int>()));
  }
  std::printf("%.12f\n", c);
  return 0;
}

int run_scheme(const json& p, const fs::path& base) {
  json inputs = json::array();
  const auto channel = resolve_channel(p, inputs);
  const auto grid = parse_grid(p["snr_db"].get<std::string>());
  const auto n = p["n"].get<std::size_t>();
  const auto curve =
      capacity_ratio_sweep(channel, channel_label(p), n, modulation_from(p["mod"]), grid);
  const std::string csv = io::curve_to_csv(curve);

  if (!p.contains("out")) {
    std::cout << csv;
  } else {
    const auto name = p["out"].get<std::string>();
    Bundle bundle(base);
    bundle.add(name, csv);
    bundle.finish(manifest_name_for(name), "scheme", p, inputs, nullptr);
  }
  const auto lo = curve.min_ratio();
  const auto hi = curve.max_ratio();
  std::cerr << "points " << curve.points.size();
  if (lo) std::cerr << ", ratio min " << fmt("%.6f", *lo) << " max " << fmt("%.6f", *hi);
  std::cerr << "\n";
  return 0;
}

DerivativeOptions derivative_options(const json& p) {
  DerivativeOptions o;
  o.step = p["step"].get<double>();
  const auto s = p["stencil"].get<std::string>();
  if (s == "central") {
    o.stencil = Stencil::central_richardson;
  } else if (s == "forward") {
    o.stencil = Stencil::forward;
  } else {
    throw UsageError("--stencil must be central or forward");
  }
  return o;
}

std::string interval_report(const ConvexityReport& report) {
  std::ostringstream os;
  if (report.intervals.empty()) {
    os << "convex intervals: none\n";
  }
  for (const auto& iv : report.intervals) {
    os << "convex interval: [" << fmt("%.4f", iv.lo) << ", " << fmt("%.4f", iv.hi) << "] peak "
       << fmt("%.4e", iv.peak) << " at x=" << fmt("%.4f", iv.argmax) << "\n";
  }
  for (const auto& iv : report.below_resolution) {
    os << "below resolution: [" << fmt("%.4f", iv.lo) << ", " << fmt("%.4f", iv.hi)
       << "] peak " << fmt("%.2e", iv.peak) << "\n";
  }
  return os.str();
}

int run_concavity(const json& p, const fs::path& base) {
  const auto c = constellation_from(p["mod"].get<int>());
  const auto xs = parse_grid(p["x"].get<std::string>());
  const auto opts = derivative_options(p);

  std::vector<double> taus(xs.size());
  std::vector<double> d2(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    taus[i] = tau(xs[i], c, opts.capacity);
    d2[i] = tau_second_derivative(xs[i], c, opts);
  });
  std::string csv = "x,tau_bits,tau_dd\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    csv += io::format_double(xs[i]) + ',' + io::format_double(taus[i]) + ',' +
           io::format_double(d2[i]) + '\n';
  }

  std::string report = "convex intervals: none\n";
  if (xs.size() > 1) {
    const double step = std::min(0.01, xs[1] - xs[0]);
    report = interval_report(convexity_intervals(c, xs.front(), xs.back(), step, opts));
  }

  if (!p.contains("out")) {
    std::cout << csv;
    std::cerr << report;
  } else {
    const auto name = p["out"].get<std::string>();
    Bundle bundle(base);
    bundle.add(name, csv);
    bundle.finish(manifest_name_for(name), "concavity", p, json::array(), nullptr);
    std::cout << report;
  }
  return 0;
}

int run_simulate(const json& p, const fs::path& base) {
  json inputs = json::array();
  SimConfig cfg{.channel = resolve_channel(p, inputs), .n = p["n"].get<std::size_t>(),
                .gamma = db_to_linear(p["snr_db"].get<double>())};
  cfg.order = p["mod"].get<int>();
  constellation_from(cfg.order);
  cfg.blocks = p["blocks"].get<std::size_t>();
  cfg.seed = p["seed"].get<std::uint64_t>();
  if (p.contains("fb_len")) cfg.fb_len = p["fb_len"].get<std::size_t>();
  const auto scheme = p["scheme"].get<std::string>();

  SimResult res;
  if (scheme == "ofdm") {
    res = simulate_ofdm(cfg);
  } else if (scheme == "sc-dfe") {
    res = simulate_scdfe_genie(cfg);
  } else {
    throw UsageError("--scheme must be ofdm or sc-dfe");
  }
  const std::string text = io::sim_result_to_json(cfg, scheme, res).dump(2) + "\n";

  if (!p.contains("out")) {
    std::cout << text;
  } else {
    const auto name = p["out"].get<std::string>();
    Bundle bundle(base);
    bundle.add(name, text);
    bundle.finish(manifest_name_for(name), "simulate", p, inputs, cfg.seed);
  }

  if (scheme == "sc-dfe") {
    std::cerr << "measured " << fmt("%.4f", linear_to_db(res.measured_snr[0]))
              << " dB, design " << fmt("%.4f", linear_to_db(res.predicted_snr[0]))
              << " dB, geometric mean " << fmt("%.4f", linear_to_db(*res.geometric_snr))
              << " dB\n";
  } else {
    const auto H = freq_response(cfg.channel, cfg.n);
    double worst = 0.0;
    for (std::size_t k = 0; k < cfg.n; ++k) {
      if (std::norm(H[k]) <= 0.01) continue;
      worst = std::max(worst, std::abs(linear_to_db(res.measured_snr[k]) -
                                       linear_to_db(res.predicted_snr[k])));
    }
    std::cerr << "subcarriers " << cfg.n << ", worst |measured - predicted| "
              << fmt("%.4f", worst) << " dB (|H_k|^2 > 0.01)\n";
  }
  return 0;
}

// ---- reproduce -----------------------------------------------------------

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::string checks_text(const std::string& title, const std::vector<Check>& checks) {
  std::string out = title + "\n";
  for (const auto& c : checks) {
    out += std::string(c.pass ? "PASS " : "FAIL ") + c.name + " (" + c.detail + ")\n";
  }
  return out;
}

std::string reproduce_fig1(Bundle& bundle) {
  const std::size_t n = 8;
  const double gamma = db_to_linear(11.0);
  const auto profile = make_profile(fig1_channel(), n, gamma);
  const auto q16 = Constellation::square_qam(16);
  const auto q64 = Constellation::square_qam(64);
  const auto c16 = per_subcarrier_capacities(profile, q16);
  const auto c64 = per_subcarrier_capacities(profile, q64);

  std::string sub = "k,gamma_k_db,c16_bits,c64_bits\n";
  double best16 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sub += std::to_string(k) + ',' + io::format_double(linear_to_db(profile.gamma_k[k])) + ',' +
           io::format_double(c16[k].capacity) + ',' + io::format_double(c64[k].capacity) + '\n';
    best16 = std::max(best16, c16[k].capacity);
  }
  bundle.add("fig1_subcarriers.csv", sub);

  std::string schemes = "mod,c_ofdm_bits,c_dfe_bits,gap_bits\n";
  double gap[2] = {};
  int i = 0;
  for (const auto* c : {&q16, &q64}) {
    const double o = ofdm_capacity_qam(profile, *c);
    const double d = dfe_capacity_qam(profile, *c);
    gap[i++] = d - o;
    schemes += std::to_string(c->order()) + ',' + io::format_double(o) + ',' +
               io::format_double(d) + ',' + io::format_double(d - o) + '\n';
  }
  bundle.add("fig1_schemes.csv", schemes);

  return checks_text(
      "fig1: N=8, 11 dB",
      {{"16-QAM gap exceeds 64-QAM gap", gap[0] > gap[1],
        fmt("%.5f", gap[0]) + " vs " + fmt("%.5f", gap[1]) + " bits"},
       {"64-QAM gap < 0.02 bits", gap[1] < 0.02, fmt("%.5f", gap[1]) + " bits"},
       {"a 16-QAM subcarrier within 0.05 of 4 bits", best16 >= 3.95,
        "best " + fmt("%.5f", best16) + " bits"}});
}

std::string reproduce_fig2(Bundle& bundle) {
  const std::vector<int> orders{4, 16, 64, 256, 1024};
  const auto xs = parse_grid("0.05:0.01:25");
  std::vector<std::vector<double>> d2(orders.size(), std::vector<double>(xs.size()));
  parallel_for(orders.size() * xs.size(), [&](std::size_t idx) {
    const std::size_t m = idx / xs.size();
    const std::size_t i = idx % xs.size();
    d2[m][i] = tau_second_derivative(xs[i], Constellation::square_qam(orders[m]));
  });

  std::string csv = "x";
  for (int m : orders) csv += ",tau_dd_" + std::to_string(m);
  csv += '\n';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    csv += io::format_double(xs[i]);
    for (std::size_t m = 0; m < orders.size(); ++m) csv += ',' + io::format_double(d2[m][i]);
    csv += '\n';
  }
  bundle.add("fig2_tau_dd.csv", csv);

  std::vector<Check> checks;
  for (std::size_t m = 0; m < 2; ++m) {
    const double mx = *std::max_element(d2[m].begin(), d2[m].end());
    checks.push_back({std::to_string(orders[m]) + "-QAM tau'' <= 1e-6", mx <= 1e-6,
                      "max " + fmt("%.3e", mx)});
  }
  const auto report = convexity_intervals(Constellation::square_qam(64), 0.05, 25.0, 0.01);
  const bool one = report.intervals.size() == 1;
  const auto iv = one ? report.intervals[0] : ConvexityInterval{};
  checks.push_back({"64-QAM has one convex interval", one,
                    std::to_string(report.intervals.size()) + " found"});
  checks.push_back({"64-QAM interval within 0.01 of [2.568, 2.724]",
                    one && std::abs(iv.lo - 2.568) <= 0.01 && std::abs(iv.hi - 2.724) <= 0.01,
                    "[" + fmt("%.4f", iv.lo) + ", " + fmt("%.4f", iv.hi) + "]"});
  checks.push_back({"64-QAM peak within 25% of 3.58e-4",
                    one && std::abs(iv.peak - 3.58e-4) <= 0.25 * 3.58e-4,
                    fmt("%.4e", iv.peak) + " at x=" + fmt("%.4f", iv.argmax)});

  DerivativeOptions fwd;
  fwd.step = 0.04;
  fwd.stencil = Stencil::forward;
  const auto coarse = convexity_intervals(Constellation::square_qam(64), 2.0, 3.5, 0.005, fwd);
  std::string note = "forward stencil, step 0.04:\n" + interval_report(coarse);
  return checks_text("fig2: tau'' on x in [0.05, 25]", checks) + note;
}

std::string reproduce_fig3(Bundle& bundle) {
  const auto curve = capacity_ratio_sweep(fig3_channel(), "fig3", 512,
                                          Modulation::square_qam(1024), parse_grid("0:0.5:45"));
  bundle.add("fig3_ratio.csv", io::curve_to_csv(curve));
  const double lo = curve.min_ratio().value_or(NAN);
  const double hi = curve.max_ratio().value_or(NAN);
  return checks_text("fig3: 1024-QAM, N=512, 0-45 dB",
                     {{"min ratio in [0.99, 1)", lo >= 0.99 && lo < 1.0, fmt("%.6f", lo)},
                      {"max ratio > 1.001", hi > 1.001, fmt("%.6f", hi)}});
}

int run_reproduce(const json& p, const fs::path& base) {
  const auto fig = p["figure"].get<std::string>();
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) throw io::IoError("cannot create " + base.string() + ": " + ec.message());
  Bundle bundle(base);
  std::string summary;
  if (fig == "fig1") {
    summary = reproduce_fig1(bundle);
  } else if (fig == "fig2") {
    summary = reproduce_fig2(bundle);
  } else if (fig == "fig3") {
    summary = reproduce_fig3(bundle);
  } else {
    throw UsageError("figure must be fig1, fig2 or fig3");
  }
  bundle.add(fig + "_summary.txt", summary);
  bundle.finish("manifest.json", "reproduce", p, json::array(), nullptr);
  std::cout << summary;
  return 0;
}

int dispatch(const std::string& command, const json& params, const fs::path& base) {
  if (command == "capacity") return run_capacity(params);
  if (command == "scheme") return run_scheme(params, base);
  if (command == "concavity") return run_concavity(params, base);
  if (command == "simulate") return run_simulate(params, base);
  if (command == "reproduce") return run_reproduce(params, base);
  throw UsageError("unknown command '" + command + "'");
}

int run_replay(const std::string& manifest_path) {
  const json m = [&] {
    try {
      return json::parse(io::read_file(manifest_path));
    } catch (const json::exception& e) {
      throw io::IoError(manifest_path + ": invalid manifest: " + e.what());
    }
  }();
  if (m.value("version", "") != kVersion) {
    std::cerr << "warning: manifest written by version " << m.value("version", "?") << "\n";
  }
  for (const auto& in : m["inputs"]) {
    const auto path = in["path"].get<std::string>();
    if (sha256_hex(io::read_file(path)) != in["sha256"].get<std::string>()) {
      throw io::IoError("input changed since the manifest was written: " + path);
    }
  }
  const fs::path base = fs::absolute(manifest_path).parent_path();
  const int rc = dispatch(m["command"].get<std::string>(), m["parameters"], base);
  if (rc != 0) return rc;

  std::size_t same = 0;
  for (const auto& out : m["outputs"]) {
    const auto name = out["file"].get<std::string>();
    if (sha256_hex(io::read_file((base / name).string())) != out["sha256"].get<std::string>()) {
      std::cerr << "replay: " << name << " differs from the recorded digest\n";
      return 1;
    }
    ++same;
  }
  std::cerr << "replay: " << same << " output(s) identical\n";
  return 0;
}

// ---- argument parsing ----------------------------------------------------

struct ModFlags {
  int mod = 0;
  bool gaussian = false;
  CLI::Option* mod_opt = nullptr;
};

void add_mod_flags(CLI::App* app, ModFlags& f, bool allow_gaussian) {
  f.mod_opt = app->add_option("--mod", f.mod, "QAM order (" + supported_orders_text() + ")");
  if (allow_gaussian) {
    auto* g = app->add_flag("--gaussian", f.gaussian, "Gaussian (unconstrained) input");
    f.mod_opt->excludes(g);
  }
}

json mod_param(const ModFlags& f, bool allow_gaussian) {
  if (f.gaussian) return "gaussian";
  if (!f.mod_opt->count()) {
    throw UsageError(allow_gaussian ? "one of --mod or --gaussian is required"
                                    : "--mod is required");
  }
  constellation_from(f.mod);
  return f.mod;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"OFDM vs single-carrier DFE capacity under M-QAM inputs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // capacity
  auto* cap = app.add_subcommand("capacity", "AWGN capacity of one alphabet at one SNR");
  ModFlags cap_mod;
  double cap_snr = 0.0;
  add_mod_flags(cap, cap_mod, true);
  cap->add_option("--snr-db", cap_snr, "SNR in dB")->required();

  // scheme
  auto* sch = app.add_subcommand("scheme", "OFDM and SC-DFE capacities over an SNR grid");
  std::string sch_channel, sch_builtin, sch_grid, sch_out;
  std::size_t sch_n = 512;
  ModFlags sch_mod;
  auto* sch_file = sch->add_option("--channel", sch_channel, "Channel JSON file");
  sch->add_option("--builtin", sch_builtin, "Built-in channel")
      ->check(CLI::IsMember({"fig1", "fig3"}))
      ->excludes(sch_file);
  sch->add_option("--n", sch_n, "DFT size")->capture_default_str();
  add_mod_flags(sch, sch_mod, true);
  sch->add_option("--snr-db", sch_grid, "SNR grid a:step:b in dB")->required();
  sch->add_option("--out", sch_out, "CSV output (stdout if omitted)");

  // concavity
  auto* con = app.add_subcommand("concavity", "tau'' on a grid of x = ln(1 + SNR)");
  ModFlags con_mod;
  std::string con_grid = "0.05:0.01:25", con_out, con_stencil = "central";
  double con_step = 0.02;
  add_mod_flags(con, con_mod, false);
  con->add_option("--x", con_grid, "x grid a:step:b")->capture_default_str();
  con->add_option("--step", con_step, "Difference step")->capture_default_str();
  con->add_option("--stencil", con_stencil, "central or forward")
      ->check(CLI::IsMember({"central", "forward"}))
      ->capture_default_str();
  con->add_option("--out", con_out, "CSV output (stdout if omitted)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo block transmission");
  std::string sim_channel, sim_builtin, sim_scheme, sim_out;
  std::size_t sim_n = 512, sim_blocks = 1000, sim_fb = 0;
  std::uint64_t sim_seed = 1;
  double sim_snr = 0.0;
  int sim_mod = 4;
  auto* sim_file = sim->add_option("--channel", sim_channel, "Channel JSON file");
  sim->add_option("--builtin", sim_builtin, "Built-in channel")
      ->check(CLI::IsMember({"fig1", "fig3"}))
      ->excludes(sim_file);
  sim->add_option("--n", sim_n, "DFT size")->capture_default_str();
  sim->add_option("--mod", sim_mod, "QAM order")->capture_default_str();
  sim->add_option("--snr-db", sim_snr, "SNR in dB")->required();
  sim->add_option("--blocks", sim_blocks, "Number of blocks")->capture_default_str();
  sim->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
  sim->add_option("--scheme", sim_scheme, "ofdm or sc-dfe")
      ->required()
      ->check(CLI::IsMember({"ofdm", "sc-dfe"}));
  auto* sim_fb_opt = sim->add_option("--fb-len", sim_fb, "Feedback taps (default L-1)");
  sim->add_option("--out", sim_out, "JSON output (stdout if omitted)");

  // reproduce
  auto* rep = app.add_subcommand("reproduce", "Write the CSV bundle for one figure");
  std::string rep_fig, rep_out;
  rep->add_option("figure", rep_fig, "fig1, fig2 or fig3")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
  rep->add_option("--out", rep_out, "Output directory")->required();

  // replay
  auto* rpl = app.add_subcommand("replay", "Re-run a manifest and verify its outputs");
  std::string rpl_path;
  rpl->add_option("manifest", rpl_path, "Manifest file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  json p;
  fs::path base = fs::current_path();
  const auto set_out = [&](const std::string& out) {
    if (out.empty()) return;
    auto [dir, name] = split_out(out);
    base = dir;
    p["out"] = name;
  };

  if (cap->parsed()) {
    p = {{"mod", mod_param(cap_mod, true)}, {"snr_db", cap_snr}};
    return dispatch("capacity", p, base);
  }
  if (sch->parsed()) {
    p = channel_params(sch_channel, sch_builtin);
    p["n"] = sch_n;
    p["mod"] = mod_param(sch_mod, true);
    p["snr_db"] = sch_grid;
    parse_grid(sch_grid);
    set_out(sch_out);
    return dispatch("scheme", p, base);
  }
  if (con->parsed()) {
    p = {{"mod", mod_param(con_mod, false)},
         {"x", con_grid},
         {"step", con_step},
         {"stencil", con_stencil}};
    parse_grid(con_grid);
    set_out(con_out);
    return dispatch("concavity", p, base);
  }
  if (sim->parsed()) {
    p = channel_params(sim_channel, sim_builtin);
    p["n"] = sim_n;
    p["mod"] = sim_mod;
    p["snr_db"] = sim_snr;
    p["blocks"] = sim_blocks;
    p["seed"] = sim_seed;
    p["scheme"] = sim_scheme;
    if (sim_fb_opt->count()) p["fb_len"] = sim_fb;
    set_out(sim_out);
    return dispatch("simulate", p, base);
  }
  if (rep->parsed()) {
    p = {{"figure", rep_fig}};
    return dispatch("reproduce", p, fs::absolute(rep_out));
  }
  return run_replay(rpl_path);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
