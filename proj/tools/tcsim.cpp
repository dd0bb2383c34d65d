// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tcsim/tcsim.h"

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config = TCSIM_DEFAULT_CONFIG;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string format = "csv";
};

struct CommandFailure {
  int code;
  std::string message;
};

void check(tcsim_status s, const std::string& where) {
  if (s != TCSIM_OK) throw CommandFailure{static_cast<int>(s), where + ": " + tcsim_last_error()};
}

std::string out_dir(const Globals& g) {
  if (!g.out_dir.empty()) return g.out_dir;
  if (const char* env = std::getenv("TCSIM_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandFailure{static_cast<int>(TCSIM_ERR_IO), "cannot open '" + path + "'"};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes the artifacts, prints the summary line and frees the result.
void emit(tcsim_result* r, const Globals& g) {
  const fs::path dir = out_dir(g);
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (size_t i = 0; i < tcsim_result_count(r); ++i) {
    const fs::path p = dir / tcsim_result_name(r, i);
    std::ofstream f(p, std::ios::binary);
    f << tcsim_result_text(r, i);
    if (!f) {
      tcsim_result_free(r);
      throw CommandFailure{static_cast<int>(TCSIM_ERR_IO), "cannot write '" + p.string() + "'"};
    }
  }
  std::cout << tcsim_result_summary(r) << "\n";
  tcsim_result_free(r);
}

class Device {
 public:
  explicit Device(const std::string& path) { check(tcsim_device_load(path.c_str(), &dev_), "config"); }
  ~Device() { tcsim_device_free(dev_); }
  Device(const Device&) = delete;
  Device& operator=(const Device&) = delete;
  const tcsim_device* get() const { return dev_; }

 private:
  tcsim_device* dev_ = nullptr;
};

tcsim_run make_run(const Globals& g, const std::string& command) {
  tcsim_run run{};
  run.command = command.c_str();
  run.seed = g.seed;
  run.format = g.format == "json" ? TCSIM_FORMAT_JSON : TCSIM_FORMAT_CSV;
  return run;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation toolkit for flux-tunable transmons with a tunable coupler"};
  app.set_version_flag("--version", tcsim_version());
  Globals g;
  app.add_option("--config", g.config, "Device configuration file")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Output directory (default: $TCSIM_OUT_DIR or .)");
  app.add_option("--seed", g.seed, "Random seed for shot sampling")->capture_default_str();
  app.add_option("--format", g.format, "Tabular output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.require_subcommand(1);

  auto* device = app.add_subcommand("device", "Device inspection")->require_subcommand(1);
  auto* device_show = device->add_subcommand("show", "Print the idle-point parameters");

  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps")->require_subcommand(1);
  auto* sweep_coupling = sweep->add_subcommand("coupling", "Exchange coupling versus coupler bias");
  double flux_lo = -0.34, flux_hi = -0.2, sweep_fp = 0.0;
  int points = 8;
  sweep_coupling->add_option("--from", flux_lo, "First coupler bias (Phi0)")->capture_default_str();
  sweep_coupling->add_option("--to", flux_hi, "Last coupler bias (Phi0)")->capture_default_str();
  sweep_coupling->add_option("--points", points, "Number of biases")->capture_default_str();
  sweep_coupling->add_option("--mod-freq", sweep_fp, "Modulation frequency in GHz (default: iSWAP setting)");

  auto* chev = app.add_subcommand("chevron", "Population chevron around a gate operating point");
  std::string chev_gate = "iswap", chev_spec;
  int half_amp = 0, half_dur = 0;
  double amp_step = 0.0, dur_step = 0.0;
  chev->add_option("gate", chev_gate, "iswap | cz")->check(CLI::IsMember({"iswap", "cz", "cz20", "cz02"}));
  chev->add_option("--gate-file", chev_spec, "GateSpec JSON from calibrate")->check(CLI::ExistingFile);
  chev->add_option("--half-amp", half_amp, "Amplitude points on each side");
  chev->add_option("--amp-step", amp_step, "Amplitude step (Phi0)");
  chev->add_option("--half-dur", half_dur, "Duration points on each side");
  chev->add_option("--dur-step", dur_step, "Duration step (ns)");

  auto* cal = app.add_subcommand("calibrate", "Calibrate a parametric gate");
  std::string cal_gate;
  cal->add_option("gate", cal_gate, "iswap | cz")->required()->check(CLI::IsMember({"iswap", "cz", "cz20", "cz02"}));

  auto* tomo = app.add_subcommand("tomo", "Process tomography of a calibrated gate");
  std::string tomo_spec;
  int shots = 0;
  bool no_compensate = false;
  tomo->add_option("--gate-file", tomo_spec, "GateSpec JSON from calibrate")->required()->check(CLI::ExistingFile);
  tomo->add_option("--shots", shots, "Shots per setting (0: exact)")->capture_default_str();
  tomo->add_flag("--no-compensate", no_compensate, "Skip readout compensation");

  auto* flux = app.add_subcommand("flux", "Flux utilities")->require_subcommand(1);
  auto* flux_invert = flux->add_subcommand("invert", "Source settings compensating flux crosstalk");
  std::string matrix = TCSIM_DATA_DIR "/crosstalk_paper.csv";
  std::vector<double> target;
  flux_invert->add_option("--matrix", matrix, "Crosstalk CSV")->check(CLI::ExistingFile)->capture_default_str();
  flux_invert->add_option("--target", target, "Target fluxes, comma separated")->delimiter(',')->required();

  auto* transfer = app.add_subcommand("transfer", "RF transfer function")->require_subcommand(1);
  auto* transfer_apply = transfer->add_subcommand("apply", "Achieved amplitude for a requested one");
  std::string table = TCSIM_DATA_DIR "/transfer_synthetic.csv";
  double amp = 0.0, freq = 0.0;
  transfer_apply->add_option("--table", table, "Transfer CSV")->check(CLI::ExistingFile)->capture_default_str();
  transfer_apply->add_option("--amp", amp, "Requested amplitude")->required();
  transfer_apply->add_option("--freq", freq, "Modulation frequency (GHz)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  // Recorded in file headers; the output location is left out so that runs
  // into different directories produce identical files.
  std::string command;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out-dir") {
      ++i;
      continue;
    }
    if (a.rfind("--out-dir=", 0) == 0) continue;
    command += (command.empty() ? "" : " ") + a;
  }

  try {
    const tcsim_run run = make_run(g, command);
    tcsim_result* r = nullptr;
    if (device_show->parsed()) {
      Device d(g.config);
      check(tcsim_cmd_device_show(d.get(), &run, &r), "device show");
    } else if (sweep_coupling->parsed()) {
      Device d(g.config);
      check(tcsim_cmd_sweep_coupling(d.get(), flux_lo, flux_hi, points, sweep_fp, &run, &r), "sweep coupling");
    } else if (chev->parsed()) {
      Device d(g.config);
      const std::string spec = chev_spec.empty() ? std::string() : slurp(chev_spec);
      check(tcsim_cmd_chevron(d.get(), chev_gate.c_str(), chev_spec.empty() ? nullptr : spec.c_str(), half_amp, amp_step,
                              half_dur, dur_step, &run, &r),
            "chevron");
    } else if (cal->parsed()) {
      Device d(g.config);
      check(tcsim_cmd_calibrate(d.get(), cal_gate.c_str(), &run, &r), "calibrate");
    } else if (tomo->parsed()) {
      Device d(g.config);
      const std::string spec = slurp(tomo_spec);
      check(tcsim_cmd_tomo(d.get(), spec.c_str(), shots, no_compensate ? 0 : 1, &run, &r), "tomo");
    } else if (flux_invert->parsed()) {
      check(tcsim_cmd_flux_invert(matrix.c_str(), target.data(), target.size(), &run, &r), "flux invert");
    } else if (transfer_apply->parsed()) {
      check(tcsim_cmd_transfer_apply(table.c_str(), amp, freq, &run, &r), "transfer apply");
    }
    emit(r, g);
  } catch (const CommandFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code == 0 ? 1 : (f.code > 125 ? 1 : f.code);
  }
  return 0;
}
