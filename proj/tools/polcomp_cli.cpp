// polcomp: command-line front end for measurement evaluation, ECM construction,
// tomography error budgets and Monte Carlo sweeps.
//
// Angles are given and reported in degrees. Every command echoes its resolved
// configuration under "config"; that object can be fed back via --config.
//
// Exit codes: 0 success, 2 parse error, 3 domain error, 4 I/O error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "polcomp/io.hpp"
#include "polcomp/polcomp.hpp"

namespace {

using nlohmann::json;
using namespace polcomp;

constexpr int kExitParse = 2;
constexpr int kExitDomain = 3;
constexpr int kExitIo = 4;

struct ParseFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- config file merging ------------------------------------------------------

std::string json_scalar_to_arg(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number()) return io::format_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw ParseFailure("config: unsupported value " + v.dump());
}

std::string json_to_arg(const json& v) {
  if (!v.is_array()) return json_scalar_to_arg(v);
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += json_scalar_to_arg(v[i]);
  }
  return out;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Appends "--key value" for every config entry not already given on the command line.
std::vector<std::string> merge_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;

  std::ifstream in(*path);
  if (!in) throw IoFailure("cannot open config file " + *path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::parse_error& e) {
    throw ParseFailure(std::string("config: ") + e.what());
  }
  if (!cfg.is_object()) throw ParseFailure("config: top-level value must be an object");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || key == "command") continue;
    const std::string flag = "--" + key;
    if (has_flag(args, flag)) continue;
    args.push_back(flag);
    args.push_back(json_to_arg(value));
  }
  return args;
}

// --- value parsing ------------------------------------------------------------

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseFailure("not a number: '" + item + "'");
    }
  }
  return out;
}

const BlochVector kStateS1(0.346, -0.446, 0.425);
const BlochVector kStateS2(0.0, 0.707, 0.0);

/// "s1", "s2" or "x,y,z".
BlochVector parse_state(const std::string& text) {
  if (text == "s1") return kStateS1;
  if (text == "s2") return kStateS2;
  const auto v = parse_numbers(text);
  if (v.size() != 3) throw ParseFailure("state must be s1, s2 or x,y,z");
  return {v[0], v[1], v[2]};
}

std::vector<ErrorChannel> parse_channels(const std::string& text) {
  if (text == "all") return {kAllChannels.begin(), kAllChannels.end()};
  std::vector<ErrorChannel> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_channel(item));
    } catch (const std::invalid_argument& e) {
      throw ParseFailure(e.what());
    }
  }
  return out;
}

std::vector<SchemeMode> parse_modes(const std::string& text) {
  if (text == "both") return {SchemeMode::NCM, SchemeMode::ECM};
  try {
    return {parse_mode(text)};
  } catch (const std::invalid_argument& e) {
    throw ParseFailure(e.what());
  }
}

// --- output -------------------------------------------------------------------

void emit(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + out_path);
  out << text;
  if (!out) throw IoFailure("write failed: " + out_path);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path);
  return out;
}

struct ErrorFlags {
  double eps_q = 0, eps_h = 0, eps_dq = 0, eps_dh = 0;  // degrees

  void add_to(CLI::App* app) {
    app->add_option("--eps-q", eps_q, "QWP axis deviation (deg)");
    app->add_option("--eps-h", eps_h, "HWP axis deviation (deg)");
    app->add_option("--eps-dq", eps_dq, "QWP retardance deviation (deg)");
    app->add_option("--eps-dh", eps_dh, "HWP retardance deviation (deg)");
  }
  DeviceError radians() const {
    return {deg_to_rad(eps_q), deg_to_rad(eps_h), deg_to_rad(eps_dq), deg_to_rad(eps_dh)};
  }
  void echo(json& cfg) const {
    cfg["eps-q"] = eps_q;
    cfg["eps-h"] = eps_h;
    cfg["eps-dq"] = eps_dq;
    cfg["eps-dh"] = eps_dh;
  }
};

// --- measure ------------------------------------------------------------------

struct MeasureCmd {
  double q = 0, h = 0;
  ErrorFlags err;
  std::string out;

  void setup(CLI::App* app) {
    app->add_option("--q", q, "QWP angle (deg)")->required();
    app->add_option("--h", h, "HWP angle (deg)")->required();
    err.add_to(app);
    app->add_option("--out", out, "write JSON here instead of stdout");
  }

  void run() const {
    json cfg = {{"q", q}, {"h", h}};
    err.echo(cfg);
    const BlochVector ideal = ideal_vector(deg_to_rad(q), deg_to_rad(h));
    const BlochVector real = realized_vector(deg_to_rad(q), deg_to_rad(h), err.radians());
    emit({{"command", "measure"},
          {"config", cfg},
          {"ideal", io::to_json(ideal)},
          {"realized", io::to_json(real)},
          {"difference_norm", (real - ideal).norm()}},
         out);
  }
};

// --- ecm ----------------------------------------------------------------------

struct EcmCmd {
  double q = 0, h = 0;
  std::string out;

  void setup(CLI::App* app) {
    app->add_option("--q", q, "seed QWP angle (deg)")->required();
    app->add_option("--h", h, "seed HWP angle (deg)")->required();
    app->add_option("--out", out, "write JSON here instead of stdout");
  }

  void run() const {
    const AngleSetting seed{deg_to_rad(q), deg_to_rad(h)};
    const CompositeMeasurement cm = ecm4(seed);
    json sens = json::object();
    for (ErrorChannel ch : kAllChannels) {
      sens[std::string(channel_name(ch))] = io::to_json(summed_sensitivity(cm, ch));
    }
    emit({{"command", "ecm"},
          {"config", {{"q", q}, {"h", h}}},
          {"composite", io::to_json(cm)},
          {"summed_sensitivity", sens},
          {"residual_q_norm_sq", residual_q_norm_sq(cm)},
          {"single_setting_q_norm_sq",
           analytic_partial(seed.q, seed.h, ErrorChannel::QAxis).squaredNorm()}},
         out);
  }
};

// --- budget -------------------------------------------------------------------

struct BudgetCmd {
  std::string state = "s1";
  double angle_err = 0.1;
  double phase_err = 1.2;
  std::string out;

  void setup(CLI::App* app) {
    app->add_option("--state", state, "s1, s2 or x,y,z")->capture_default_str();
    app->add_option("--angle-err", angle_err, "axis error magnitude (deg)")->capture_default_str();
    app->add_option("--phase-err", phase_err, "retardance error magnitude (deg)")
        ->capture_default_str();
    app->add_option("--out", out, "write JSON here instead of stdout");
  }

  void run() const {
    const QubitState s{parse_state(state)};
    const double a = deg_to_rad(angle_err), p = deg_to_rad(phase_err);
    const ErrorBudget budget = predicted_error_budget(s, DeviceError{a, a, p, p});

    const TomographyScheme ncm = pauli_scheme(SchemeMode::NCM);
    const TomographyScheme ecm = pauli_scheme(SchemeMode::ECM);
    json fitted = json::object();
    for (ErrorChannel ch : kAllChannels) {
      fitted[std::string(channel_name(ch))] = fit_quadratic_three_point(
          [&](double e) { return channel_error_sq(ncm, s, ch, e); });
    }
    const double fitted_ecm = fit_quadratic_three_point(
        [&](double e) { return channel_error_sq(ecm, s, ErrorChannel::QAxis, e); });

    json doc = io::to_json(budget);
    doc["ncm"]["fitted_coefficients"] = fitted;
    doc["ecm"]["fitted_coefficient_q"] = fitted_ecm;
    doc["command"] = "budget";
    doc["config"] = {{"state", io::to_json(s.s)}, {"angle-err", angle_err}, {"phase-err", phase_err}};
    emit(doc, out);
  }
};

// --- simulate -----------------------------------------------------------------

struct SimulateCmd {
  std::string scheme = "NCM";
  std::string state = "s1";
  ErrorFlags err;
  std::int64_t photons = 3'000'000;
  int runs = 5;
  std::uint64_t seed = 0;
  std::string out;

  void setup(CLI::App* app) {
    app->add_option("--scheme", scheme, "NCM or ECM")->capture_default_str();
    app->add_option("--state", state, "s1, s2 or x,y,z")->capture_default_str();
    err.add_to(app);
    app->add_option("--photons", photons, "photons per arm")->capture_default_str();
    app->add_option("--runs", runs, "repetitions")->capture_default_str();
    app->add_option("--seed", seed, "master seed")->required();
    app->add_option("--out", out, "write JSON here instead of stdout");
  }

  void run() const {
    const auto modes = parse_modes(scheme);
    if (modes.size() != 1) throw ParseFailure("simulate takes a single scheme");
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    ExperimentConfig cfg;
    cfg.photons_per_arm = photons;
    cfg.runs = runs;
    cfg.seed = seed;
    cfg.state = QubitState{parse_state(state)};
    cfg.scheme = pauli_scheme(modes.front());
    cfg.err = err.radians();

    json run_docs = json::array();
    std::vector<double> errors;
    for (int r = 0; r < runs; ++r) {
      std::mt19937_64 rng(derive_seed(seed, 0, static_cast<std::uint64_t>(r)));
      const CountRecord counts = sample_counts(cfg, rng);
      const QubitState est = estimate_from_counts(cfg.scheme, counts);
      const double e = (est.s - cfg.state.s).squaredNorm();
      errors.push_back(e);
      run_docs.push_back({{"counts", io::to_json(counts)}, {"estimate", io::to_json(est.s)},
                          {"err_sq", e}});
    }
    const RunStatistics st = summarize(errors);
    json c = {{"scheme", std::string(mode_name(modes.front()))},
              {"state", io::to_json(cfg.state.s)},
              {"photons", photons},
              {"runs", runs},
              {"seed", seed}};
    err.echo(c);
    emit({{"command", "simulate"},
          {"config", c},
          {"runs", run_docs},
          {"mean_err_sq", st.mean},
          {"std_err_sq", st.std},
          {"systematic_err_sq", systematic_error_exact(cfg.scheme, cfg.state, cfg.err).squaredNorm()}},
         out);
  }
};

// --- sweep --------------------------------------------------------------------

struct Recipe {
  std::string scheme;
  std::string state;
  std::string channel;
  std::vector<double> grid_deg;
  bool tomography = true;  // false: measurement-vector error norms only
};


Recipe recipe_defaults(const std::string& name) {
  if (name == "fig2") return {"both", "s1", "all", geometric_grid(0.01, 2.0, 16), false};
  if (name == "fig3-upper") return {"both", "s1", "all", geometric_grid(0.05, 5.0, 12), true};
  if (name == "fig3-lower") return {"both", "s2", "all", geometric_grid(0.05, 5.0, 12), true};
  if (name == "custom") return {"both", "s1", "all", geometric_grid(0.05, 5.0, 12), true};
  throw ParseFailure("unknown recipe: " + name);
}

struct SweepCmd {
  std::string recipe = "custom";
  std::optional<std::string> scheme, state, channel, grid;
  std::optional<double> seed_q, seed_h;
  std::int64_t photons = 3'000'000;
  int runs = 5;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;

  void setup(CLI::App* app) {
    app->add_option("--recipe", recipe, "fig2, fig3-upper, fig3-lower or custom")
        ->capture_default_str();
    app->add_option("--scheme", scheme, "NCM, ECM or both");
    app->add_option("--state", state, "s1, s2 or x,y,z");
    app->add_option("--channel", channel, "q, h, dq, dh (comma separated) or all");
    app->add_option("--grid", grid, "deviations in degrees, comma separated");
    app->add_option("--seed-q", seed_q, "fig2: QWP angle of the measured setting (deg)");
    app->add_option("--seed-h", seed_h, "fig2: HWP angle of the measured setting (deg)");
    app->add_option("--photons", photons, "photons per arm")->capture_default_str();
    app->add_option("--runs", runs, "runs per grid point")->capture_default_str();
    app->add_option("--seed", seed, "master seed (required for Monte Carlo recipes)");
    app->add_option("--threads", threads, "worker threads")->capture_default_str();
    app->add_option("--out", out, "output prefix; writes <out>.csv and <out>.json")->required();
  }

  void run() const {
    const Recipe r = recipe_defaults(recipe);
    const std::string scheme_s = scheme.value_or(r.scheme);
    const std::string channel_s = channel.value_or(r.channel);
    const std::vector<double> grid_deg = grid ? parse_numbers(*grid) : r.grid_deg;
    const auto modes = parse_modes(scheme_s);
    const auto channels = parse_channels(channel_s);
    if (grid_deg.empty()) throw ParseFailure("empty grid");

    json cfg = {{"recipe", recipe}, {"scheme", scheme_s}, {"channel", channel_s},
                {"grid", grid_deg}};
    if (r.tomography) {
      if (!seed) throw ParseFailure("--seed is required for Monte Carlo sweeps");
      const QubitState s{parse_state(state.value_or(r.state))};
      cfg["state"] = io::to_json(s.s);
      cfg["photons"] = photons;
      cfg["runs"] = runs;
      cfg["seed"] = *seed;
      cfg["threads"] = threads;
      run_tomography(s, modes, channels, grid_deg, cfg);
    } else {
      const AngleSetting setting{deg_to_rad(seed_q.value_or(30.0)), deg_to_rad(seed_h.value_or(13.0))};
      cfg["seed-q"] = rad_to_deg(setting.q);
      cfg["seed-h"] = rad_to_deg(setting.h);
      run_measurement(setting, modes, channels, grid_deg, cfg);
    }
  }

  void run_tomography(const QubitState& s, const std::vector<SchemeMode>& modes,
                      const std::vector<ErrorChannel>& channels, const std::vector<double>& grid_deg,
                      const json& cfg) const {
    std::vector<double> grid_rad;
    for (double d : grid_deg) grid_rad.push_back(deg_to_rad(d));

    auto csv_out = open_output(out + ".csv");
    io::CsvWriter csv(csv_out, {"channel", "epsilon_deg", "scheme", "mean_err_sq", "std_err_sq",
                                "runs", "photons", "analytic_err_sq"});
    json rows = json::array();
    for (SchemeMode mode : modes) {
      ExperimentConfig ec;
      ec.photons_per_arm = photons;
      ec.runs = runs;
      ec.seed = *seed;
      ec.state = s;
      ec.scheme = pauli_scheme(mode);
      for (ErrorChannel ch : channels) {
        // Distinct stream per (scheme, channel) block.
        ec.seed = derive_seed(*seed, static_cast<std::uint64_t>(mode) * 8 + static_cast<std::uint64_t>(ch),
                              0xEC);
        const auto table = error_sweep(ec, ch, grid_rad, threads);
        for (std::size_t i = 0; i < table.size(); ++i) {
          const double analytic = channel_error_sq(ec.scheme, s, ch, grid_rad[i]);
          const std::string name(channel_name(ch));
          const std::string mode_s(mode_name(mode));
          csv.row({name, io::format_double(grid_deg[i]), mode_s,
                   io::format_double(table[i].mean_err_sq), io::format_double(table[i].std_err_sq),
                   std::to_string(runs), std::to_string(photons), io::format_double(analytic)});
          rows.push_back({{"channel", name}, {"epsilon_deg", grid_deg[i]}, {"scheme", mode_s},
                          {"mean_err_sq", table[i].mean_err_sq}, {"std_err_sq", table[i].std_err_sq},
                          {"runs", runs}, {"photons", photons}, {"analytic_err_sq", analytic}});
        }
      }
    }
    if (!csv_out) throw IoFailure("write failed: " + out + ".csv");
    emit({{"command", "sweep"}, {"config", cfg}, {"rows", rows}}, out + ".json");
  }

  void run_measurement(const AngleSetting& setting, const std::vector<SchemeMode>& modes,
                       const std::vector<ErrorChannel>& channels, const std::vector<double>& grid_deg,
                       const json& cfg) const {
    auto csv_out = open_output(out + ".csv");
    io::CsvWriter csv(csv_out, {"channel", "epsilon_deg", "scheme", "err_norm"});
    json rows = json::array();
    json slopes = json::object();
    for (SchemeMode mode : modes) {
      const CompositeMeasurement cm =
          mode == SchemeMode::ECM ? ecm4(setting) : CompositeMeasurement::single(setting);
      const std::string mode_s(mode_name(mode));
      for (ErrorChannel ch : channels) {
        const std::string name(channel_name(ch));
        auto norm = [&](double eps) {
          return (effective_vector(cm, single_channel(ch, eps)) - cm.ideal()).norm();
        };
        for (double d : grid_deg) {
          const double v = norm(deg_to_rad(d));
          csv.row({name, io::format_double(d), mode_s, io::format_double(v)});
          rows.push_back({{"channel", name}, {"epsilon_deg", d}, {"scheme", mode_s}, {"err_norm", v}});
        }
        if (grid_deg.size() >= 8 && grid_deg.back() >= 10 * grid_deg.front()) {
          slopes[mode_s][name] = scaling_exponent(norm, deg_to_rad(grid_deg.front()),
                                                  deg_to_rad(grid_deg.back()),
                                                  static_cast<int>(grid_deg.size()));
        }
      }
    }
    if (!csv_out) throw IoFailure("write failed: " + out + ".csv");
    emit({{"command", "sweep"}, {"config", cfg}, {"slopes", slopes}, {"rows", rows}}, out + ".json");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error-compensated polarization-qubit measurement toolkit", "polcomp"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help and exit");  // -h would clash with --h
  std::string config_path;

  MeasureCmd measure;
  EcmCmd ecm;
  BudgetCmd budget;
  SimulateCmd simulate;
  SweepCmd sweep;

  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON file with default flag values");
    cmd.setup(sub);
    sub->callback([&cmd] { cmd.run(); });
  };
  add("measure", "ideal and realized measurement vector of one setting", measure);
  add("ecm", "four-setting ECM composite and its certification", ecm);
  add("budget", "second-order tomography error coefficients and budgets", budget);
  add("simulate", "Monte Carlo tomography experiment", simulate);
  add("sweep", "error sweeps reproducing the sensitivity and tomography curves", sweep);

  try {
    std::vector<std::string> args = merge_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  } catch (const ParseFailure& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const IoFailure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return 0;
}
