#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mfwave/mfwave.hpp"

namespace fs = std::filesystem;
using namespace mfwave;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
};

RunConfig load_config(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) c.seed = *g.seed;
  return c;
}

fs::path out_path(const Globals& g, const RunConfig& c, const std::string& fallback) {
  if (!g.out.empty()) return g.out;
  if (!g.config.empty()) return fs::path(c.output) / fallback;
  return fallback;
}

std::uint64_t parse_count(double x, const std::string& name) {
  if (!(x >= 1.0) || x > 1e18 || x != std::floor(x)) throw ConfigError(name + " must be a positive integer");
  return static_cast<std::uint64_t>(x);
}

Json grid_json(const GridCDF& g) {
  return {{"left", g.left()}, {"right", g.right()}, {"step", g.step()}, {"nodes", g.size()}};
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::size_t n = 2000;
  double horizon = 500.0;
  int snapshots = 10;
  double spacing = 0.0;
  std::string store = "sorted";
  std::string reference;
};

void cmd_simulate(const Globals& g, const SimulateArgs& a) {
  const auto cfg = load_config(g);
  if (a.n < 1) throw ConfigError("--n must be >= 1");
  if (!(a.horizon > 0.0)) throw ConfigError("--horizon must be positive");
  if (a.snapshots < 0) throw ConfigError("--snapshots must be >= 0");
  const double spacing = a.spacing > 0.0 ? a.spacing : (a.snapshots > 0 ? a.horizon / a.snapshots : 0.0);
  std::vector<double> schedule;
  for (int k = 0; k < a.snapshots; ++k) schedule.push_back(a.horizon - spacing * (a.snapshots - 1 - k));
  if (!schedule.empty() && schedule.front() < 0.0) throw ConfigError("snapshot spacing reaches before t = 0");

  const auto seed = stream_seed(cfg.seed, "simulate");
  EventLog log;
  if (a.store == "sorted") log = run<SortedArrayStore>(cfg.model, a.n, cfg.model.rate, a.horizon, seed, schedule);
  else if (a.store == "treap") log = run<TreapStore>(cfg.model, a.n, cfg.model.rate, a.horizon, seed, schedule);
  else throw ConfigError("--store must be sorted or treap");

  const fs::path dir = out_path(g, cfg, "simulate");
  fs::create_directories(dir);
  Json snaps = Json::array();
  for (std::size_t k = 0; k < log.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
    std::vector<double> pos;
    const auto& s = log.snapshots[k];
    double prev = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const auto count = static_cast<std::size_t>(std::llround((s.cum[i] - prev) * static_cast<double>(a.n)));
      pos.insert(pos.end(), count, s.x[i]);
      prev = s.cum[i];
    }
    write_positions_csv(dir / name, pos);
    snaps.push_back({{"t", log.snapshot_times[k]}, {"file", name}, {"median", s.median()}});
  }
  Json summary = {{"n", a.n},
                  {"horizon", a.horizon},
                  {"seed", cfg.seed},
                  {"store", a.store},
                  {"counters",
                   {{"events", log.counters.events},
                    {"urges", log.counters.urges},
                    {"accepted", log.counters.accepted},
                    {"stream2", log.counters.stream2}}},
                  {"mean_speed", log.mean_speed()},
                  {"speed_standard_error", log.speed_standard_error()},
                  {"wave_speed", wave_speed(cfg.model)},
                  {"expected_speed_finite_n", expected_speed_finite_n(cfg.model, cfg.model.rate, a.n)},
                  {"snapshots", snaps},
                  {"config", to_json(cfg)}};
  if (!a.reference.empty() && !log.snapshots.empty()) {
    const auto ref = read_cdf_csv(a.reference);
    const auto avg = recentered_average(log);
    summary["reference"] = a.reference;
    summary["sup_distance_to_reference"] = empirical_sup_distance(avg, ref);
    CsvWriter w(dir / "average.csv");
    w.header({"x", "F"});
    for (std::size_t i = 0; i < avg.x.size(); ++i) w.row({avg.x[i], avg.cum[i]});
    w.close();
  }
  write_json(dir / "summary.json", summary);
  std::cout << "mean speed " << format_number(log.mean_speed()) << " +- " << format_number(log.speed_standard_error())
            << " (v = " << format_number(wave_speed(cfg.model)) << "); wrote " << dir.string() << "\n";
}

// ---------------------------------------------------------------- evolve

struct EvolveArgs {
  std::string initial;
  double T = 10.0;
  std::optional<double> h;
  std::optional<double> dt;
  int snapshots = 0;
  double pad = 30.0;
  std::string reference;
};

void cmd_evolve(const Globals& g, const EvolveArgs& a) {
  const auto cfg = load_config(g);
  const double h = a.h.value_or(cfg.numerics.h);
  const double dt = a.dt.value_or(cfg.numerics.dt);
  if (!(a.T > 0.0)) throw ConfigError("--T must be positive");
  GridCDF f0;
  if (a.initial.empty()) {
    f0 = sample_grid([](double x) { return std::clamp(x, 0.0, 1.0); }, -1.0, 1.0 + a.pad, h);
  } else {
    f0 = pad_window(read_cdf_csv(a.initial), 1.0, a.pad);
  }
  const int count = a.snapshots > 0 ? a.snapshots : static_cast<int>(std::ceil(a.T));
  std::vector<double> times;
  for (int k = 1; k <= count; ++k) times.push_back(a.T * k / count);
  IntegrateOptions opts;
  opts.tail_tol = cfg.numerics.tail_tol;
  opts.monotone_tol = cfg.numerics.monotone_tol;
  const auto states = evolve(f0, times, dt, cfg.model, opts);

  std::optional<GridCDF> ref;
  if (!a.reference.empty()) ref = read_cdf_csv(a.reference);
  const fs::path dir = out_path(g, cfg, "evolve");
  fs::create_directories(dir);
  write_cdf_csv(dir / "initial.csv", f0);
  Json series = Json::array();
  std::vector<std::pair<double, GridCDF>> all;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& s = states[k];
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
    write_cdf_csv(dir / name, s.f);
    Json row = {{"t", s.t},
                {"file", name},
                {"conservation_residual", conservation_residual(f0, s.f, s.t, cfg.model)},
                {"window_shifts", s.window_shifts},
                {"max_abs_rhs", s.max_abs_rhs}};
    if (ref) row["l1_to_wave"] = l1_distance_to_wave(s, *ref);
    series.push_back(row);
    all.emplace_back(s.t, s.f);
  }
  write_snapshots_csv(dir / "snapshots_long.csv", all);
  write_json(dir / "diagnostics.json", {{"h", f0.step()},
                                       {"dt", dt},
                                       {"T", a.T},
                                       {"wave_speed", wave_speed(cfg.model)},
                                       {"snapshots", series},
                                       {"config", to_json(cfg)}});
  std::cout << "evolved to T = " << format_number(a.T) << " in " << states.size() << " snapshots; wrote "
            << dir.string() << "\n";
}

// ---------------------------------------------------------------- frame-solve / frame-mc

struct FrameArgs {
  double w = 0.5;
  double BL = 10.0;
  double BR = 10.0;
  std::optional<double> h;
};

void cmd_frame_solve(const Globals& g, const FrameArgs& a) {
  const auto cfg = load_config(g);
  FrameOptions fo;
  fo.fp_tol = cfg.numerics.fp_tol;
  fo.zeta_min = cfg.numerics.zeta_min;
  const FrameSpec spec{a.w, a.BL, a.BR, a.h.value_or(cfg.numerics.h)};
  const auto sol = solve_frame(spec, cfg.model, fo);
  const auto rep = verify_fixed_point(sol.gamma, spec, cfg.model, fo);
  const fs::path out = out_path(g, cfg, "gamma.csv");
  write_cdf_csv(out, sol.gamma, "gamma");
  fs::path sidecar = out;
  sidecar.replace_extension(".json");
  write_json(sidecar, {{"frame", {{"w", spec.w}, {"B_L", spec.B_L}, {"B_R", spec.B_R}, {"h", spec.step()}}},
                       {"model", to_json(cfg.model)},
                       {"atom", sol.atom},
                       {"marches", sol.marches},
                       {"end_residual", sol.end_residual},
                       {"check",
                        {{"lipschitz_excess", rep.lipschitz_excess},
                         {"left_atom", rep.left_atom},
                         {"right_residual", rep.right_residual},
                         {"flux_residual", rep.flux_residual},
                         {"min_zeta", rep.min_zeta},
                         {"zeta_above_floor", rep.zeta_above_floor},
                         {"ok", rep.ok()}}}});
  std::cout << "atom " << format_number(sol.atom) << ", flux residual " << format_number(rep.flux_residual)
            << "; wrote " << out.string() << " and " << sidecar.string() << "\n";
}

struct FrameMcArgs {
  std::string gamma;
  double events = 1e7;
  std::optional<double> w;
};

void cmd_frame_mc(const Globals& g, const FrameMcArgs& a) {
  RunConfig cfg = load_config(g);
  const auto gamma = read_cdf_csv(a.gamma);
  fs::path sidecar = a.gamma;
  sidecar.replace_extension(".json");
  FrameSpec spec{0.0, -gamma.left(), gamma.right(), gamma.step()};
  if (fs::exists(sidecar)) {
    const auto side = read_json(sidecar);
    spec.w = side.at("frame").at("w").get<double>();
    if (g.config.empty()) cfg.model = model_from_json(side.at("model"), sidecar.string() + ": model");
  }
  if (a.w) spec.w = *a.w;
  if (!(spec.w > 0.0)) throw ConfigError("frame-mc needs w: pass --w or keep the frame-solve sidecar " + sidecar.string());
  const auto res = apply_operator_mc_detail(gamma, spec, cfg.model, parse_count(a.events, "--events"),
                                            stream_seed(cfg.seed, "frame_mc"));
  const fs::path out = out_path(g, cfg, "gamma_mc.csv");
  write_cdf_csv(out, res.occupancy, "gamma");
  const double d = sup_distance(res.occupancy, gamma);
  fs::path summary = out;
  summary.replace_extension(".json");
  write_json(summary, {{"events", a.events},
                       {"seed", cfg.seed},
                       {"w", spec.w},
                       {"total_time", res.total_time},
                       {"stuck_time", res.stuck_time},
                       {"accepted", res.accepted},
                       {"sup_distance_to_input", d}});
  std::cout << "sup distance to input " << format_number(d) << "; wrote " << out.string() << "\n";
}

// ---------------------------------------------------------------- wave-solve / wave-check

std::vector<double> parse_frames(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("--frames: '" + tok + "' is not a number");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct WaveArgs {
  std::string frames = "5,10,20,40";
  double tol = 5e-3;
  bool no_extrapolate = false;
};

Json residual_json(const GridCDF& phi, const ModelParams& p) {
  const double res = wave_residual(phi, p);
  const double base = wave_residual(closed_form_wave(1.0, closed_form_shift_for_median(1.0, 0.0), -20.0, 20.0, phi.step()), ModelParams{});
  return {{"residual", res}, {"closed_form_baseline", base}, {"ratio_to_baseline", res / base}};
}

void cmd_wave_solve(const Globals& g, const WaveArgs& a) {
  const auto cfg = load_config(g);
  WaveOptions o;
  o.h = cfg.numerics.h;
  o.median_tol = cfg.numerics.median_tol;
  o.tail_tol = cfg.numerics.tail_tol;
  o.frame.fp_tol = cfg.numerics.fp_tol;
  o.frame.zeta_min = cfg.numerics.zeta_min;
  o.extrapolate = !a.no_extrapolate;
  const auto rep = solve_wave(parse_frames(a.frames), cfg.model, a.tol, o);
  const fs::path dir = out_path(g, cfg, "wave");
  fs::create_directories(dir);
  write_cdf_csv(dir / "phi.csv", rep.phi, "phi");
  Json frames = Json::array();
  for (const auto& f : rep.frames) {
    frames.push_back({{"B", f.B},
                      {"h", f.h},
                      {"w", f.w},
                      {"atom", f.atom},
                      {"median_residual", f.median_residual},
                      {"median_converged", f.median_converged},
                      {"sup_change", std::isnan(f.sup_change) ? Json(nullptr) : Json(f.sup_change)},
                      {"evaluations", f.evaluations}});
  }
  write_json(dir / "report.json", {{"frames", frames},
                                   {"speed", rep.speed},
                                   {"final_w", rep.final_w},
                                   {"w_residual", rep.w_residual},
                                   {"w_residual_monotone", rep.w_residual_monotone},
                                   {"converged", rep.converged},
                                   {"tails_ok", rep.tails_ok},
                                   {"extrapolated", rep.extrapolated},
                                   {"phi", grid_json(rep.phi)},
                                   {"wave_residual", residual_json(rep.phi, cfg.model)},
                                   {"config", to_json(cfg)}});
  std::cout << "w_B = " << format_number(rep.final_w) << " (v = " << format_number(rep.speed) << "), "
            << (rep.converged ? "converged" : "schedule exhausted") << "; wrote " << dir.string() << "\n";
}

void cmd_wave_check(const Globals& g, const std::string& phi_path) {
  const auto cfg = load_config(g);
  const auto phi = read_cdf_csv(phi_path);
  Json j = residual_json(phi, cfg.model);
  j["phi"] = phi_path;
  j["grid"] = grid_json(phi);
  j["wave_speed"] = wave_speed(cfg.model);
  if (g.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(g.out, j);
    std::cout << "residual " << format_number(j["residual"].get<double>()) << "; wrote " << g.out << "\n";
  }
}

// ---------------------------------------------------------------- verify

int cmd_verify(const Globals& g, const std::vector<int>& only) {
  const auto cfg = load_config(g);
  for (int id : only) {
    if (id < 1 || id > AcceptanceSuite::kCount) throw ConfigError("--only: no criterion " + std::to_string(id));
  }
  AcceptanceSuite suite(cfg, g.threads);
  const auto rep = suite.run(only, [](const CriterionResult& r) { std::cout << format_result_line(r) << std::endl; });
  const fs::path dir = out_path(g, cfg, "verify");
  fs::create_directories(dir);
  write_json(dir / "verify.json", rep.to_json());
  std::ofstream txt(dir / "summary.txt", std::ios::binary);
  for (const auto& r : rep.results) txt << format_result_line(r) << '\n';
  const bool ok = rep.blocking_passed();
  txt << (ok ? "verify: PASS" : "verify: FAIL") << '\n';
  std::cout << (ok ? "verify: PASS" : "verify: FAIL") << "; wrote " << dir.string() << "\n";
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------- plotdata

struct PlotArgs {
  std::vector<std::string> cdfs;
  std::vector<std::string> positions;
  std::string series;
  std::optional<double> step;
  bool recenter = false;
};

std::string column_name(const std::string& path, std::map<std::string, int>& used) {
  std::string stem = fs::path(path).stem().string();
  for (auto& c : stem) {
    if (c == ',' || c == ' ') c = '_';
  }
  const int k = used[stem]++;
  return k == 0 ? stem : stem + "_" + std::to_string(k);
}

void cmd_plotdata(const Globals& g, const PlotArgs& a) {
  if (a.cdfs.empty() && a.positions.empty() && a.series.empty()) {
    throw ConfigError("plotdata: no inputs (give --cdf, --positions or --series)");
  }
  const fs::path dir = g.out.empty() ? fs::path("plot") : fs::path(g.out);
  fs::create_directories(dir);
  std::vector<std::pair<std::string, std::string>> plots;  // (png name, plot command)

  if (!a.cdfs.empty() || !a.positions.empty()) {
    std::vector<GridCDF> grids;
    for (const auto& p : a.cdfs) grids.push_back(read_cdf_csv(p));
    std::vector<EmpiricalCDF> emps;
    for (const auto& p : a.positions) {
      std::ifstream in(p);
      if (!in) throw Error("cannot open " + p);
      std::vector<double> xs;
      std::string line;
      while (std::getline(in, line)) {
        try {
          xs.push_back(std::stod(line));
        } catch (const std::exception&) {
        }
      }
      if (xs.empty()) throw Error(p + ": no positions");
      auto e = EmpiricalCDF::from_positions(std::move(xs));
      emps.push_back(a.recenter ? recenter_median(e) : e);
    }
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    double step = a.step.value_or(std::numeric_limits<double>::infinity());
    for (const auto& f : grids) {
      lo = std::max(lo, f.left());
      hi = std::min(hi, f.right());
      if (!a.step) step = std::min(step, f.step());
    }
    if (grids.empty()) {
      lo = std::numeric_limits<double>::infinity();
      hi = -lo;
      for (const auto& e : emps) {
        lo = std::min(lo, e.x.front());
        hi = std::max(hi, e.x.back());
      }
      if (!a.step) step = (hi - lo) / 1000.0;
    }
    if (!(hi > lo)) {
      std::string msg = "plotdata: input windows do not overlap:";
      for (std::size_t k = 0; k < grids.size(); ++k) {
        msg += " " + a.cdfs[k] + " [" + format_number(grids[k].left()) + ", " + format_number(grids[k].right()) + "]";
      }
      msg += "; overlap [" + format_number(lo) + ", " + format_number(hi) + "] is empty";
      throw ConfigError(msg);
    }
    if (!(step > 0.0)) throw ConfigError("plotdata: --step must be positive");
    std::map<std::string, int> used;
    std::vector<std::string> names;
    for (const auto& p : a.cdfs) names.push_back(column_name(p, used));
    for (const auto& p : a.positions) names.push_back(column_name(p, used));
    std::ofstream out(dir / "overlay.csv", std::ios::binary);
    out << "x";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    const auto nodes = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= nodes; ++i) {
      const double x = lo + step * static_cast<double>(i);
      out << format_number(x);
      for (const auto& f : grids) out << ',' << format_number(f(x));
      for (const auto& e : emps) out << ',' << format_number(e(x));
      out << '\n';
    }
    std::string plot = "plot";
    for (std::size_t k = 0; k < names.size(); ++k) {
      plot += (k ? ", " : " ") + std::string("'overlay.csv' using 1:") + std::to_string(k + 2) +
              " with lines title '" + names[k] + "'";
    }
    plots.emplace_back("overlay", plot);
  }

  if (!a.series.empty()) {
    const fs::path src = a.series;
    const auto diag = read_json(src / "diagnostics.json");
    std::vector<std::pair<double, GridCDF>> snaps;
    for (const auto& s : diag.at("snapshots")) {
      snaps.emplace_back(s.at("t").get<double>(), read_cdf_csv(src / s.at("file").get<std::string>()));
    }
    if (snaps.empty()) throw ConfigError("plotdata: " + src.string() + " lists no snapshots");
    write_snapshots_csv(dir / "series.csv", snaps);
    std::string plot = "plot";
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      plot += (k ? ", " : " ") + std::string("'series.csv' every ::") + std::to_string(k * snaps[0].second.size()) +
              "::" + std::to_string((k + 1) * snaps[0].second.size() - 1) + " using 2:3 with lines title 't=" +
              format_number(snaps[k].first) + "'";
    }
    bool same = std::all_of(snaps.begin(), snaps.end(),
                            [&](const auto& s) { return s.second.size() == snaps[0].second.size(); });
    plots.emplace_back("series", same ? plot : "plot 'series.csv' using 2:3:1 with points palette title 'F(x, t)'");
  }

  std::ofstream gp(dir / "plot.gp", std::ios::binary);
  gp << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'x'\nset ylabel 'F'\n"
        "set term pngcairo size 900,600\n";
  for (const auto& [name, cmd] : plots) gp << "set output '" << name << ".png'\n" << cmd << '\n';
  std::cout << "wrote " << (dir / "plot.gp").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field traveling waves of quantile-interacting particle systems"};
  app.require_subcommand(1);
  Globals g;
  g.threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--out", g.out, "output file or directory");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "run the n-particle system")->fallthrough();
  SimulateArgs sa;
  sim->add_option("--n", sa.n, "number of particles");
  sim->add_option("--horizon", sa.horizon, "final time");
  sim->add_option("--snapshots", sa.snapshots, "number of snapshots ending at the horizon");
  sim->add_option("--spacing", sa.spacing, "time between snapshots (default horizon/snapshots)");
  sim->add_option("--store", sa.store, "position store: sorted or treap");
  sim->add_option("--reference", sa.reference, "(x, F) CSV to compare the recentered average against");

  auto* evo = app.add_subcommand("evolve", "integrate the mean-field equation")->fallthrough();
  EvolveArgs ea;
  evo->add_option("--initial", ea.initial, "initial (x, F) CSV (default: uniform on [0, 1])");
  evo->add_option("--T", ea.T, "final time");
  evo->set_help_flag("--help", "Print this help message and exit");
  evo->add_option("--h", ea.h, "grid step for the default initial condition");
  evo->add_option("--dt", ea.dt, "time step");
  evo->add_option("--snapshots", ea.snapshots, "number of equally spaced snapshots (default ceil(T))");
  evo->add_option("--pad", ea.pad, "right padding of the window");
  evo->add_option("--reference", ea.reference, "wave (x, F) CSV for the L1 distance series");

  auto* fsol = app.add_subcommand("frame-solve", "finite-frame fixed point")->fallthrough();
  FrameArgs fa;
  fsol->add_option("--w", fa.w, "leftward speed");
  fsol->add_option("--BL", fa.BL, "left half-width");
  fsol->add_option("--BR", fa.BR, "right half-width");
  fsol->set_help_flag("--help", "Print this help message and exit");
  fsol->add_option("--h", fa.h, "grid step");

  auto* fmc = app.add_subcommand("frame-mc", "Monte Carlo application of the frame operator")->fallthrough();
  FrameMcArgs ma;
  fmc->add_option("--gamma", ma.gamma, "environment (x, gamma) CSV")->required()->check(CLI::ExistingFile);
  fmc->add_option("--events", ma.events, "number of events");
  fmc->add_option("--w", ma.w, "leftward speed (default: from the frame-solve sidecar)");

  auto* wsol = app.add_subcommand("wave-solve", "traveling wave by frame growth")->fallthrough();
  WaveArgs wa;
  wsol->add_option("--frames", wa.frames, "increasing frame half-widths, comma separated");
  wsol->add_option("--tol", wa.tol, "sup change between frames that stops the schedule");
  wsol->add_flag("--no-extrapolate", wa.no_extrapolate, "skip the Richardson step on the last frame");

  auto* wchk = app.add_subcommand("wave-check", "wave-equation residual of a profile")->fallthrough();
  std::string phi_path;
  wchk->add_option("--phi", phi_path, "(x, phi) CSV")->required()->check(CLI::ExistingFile);

  auto* ver = app.add_subcommand("verify", "run the acceptance suite")->fallthrough();
  std::vector<int> only;
  ver->add_option("--only", only, "criteria to run")->delimiter(',');

  auto* plot = app.add_subcommand("plotdata", "tables and a gnuplot script for plotting")->fallthrough();
  PlotArgs pa;
  plot->add_option("--cdf", pa.cdfs, "(x, F) grid CSV; repeatable")->check(CLI::ExistingFile);
  plot->add_option("--positions", pa.positions, "one-column positions CSV; repeatable")->check(CLI::ExistingFile);
  plot->add_option("--series", pa.series, "evolve output directory")->check(CLI::ExistingDirectory);
  plot->add_option("--step", pa.step, "grid step of the overlay");
  plot->add_flag("--recenter", pa.recenter, "shift position sets to median 0");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) cmd_simulate(g, sa);
    else if (*evo) cmd_evolve(g, ea);
    else if (*fsol) cmd_frame_solve(g, fa);
    else if (*fmc) cmd_frame_mc(g, ma);
    else if (*wsol) cmd_wave_solve(g, wa);
    else if (*wchk) cmd_wave_check(g, phi_path);
    else if (*ver) return cmd_verify(g, only);
    else if (*plot) cmd_plotdata(g, pa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
