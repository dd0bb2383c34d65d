#include "tcsim/tcsim.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tcsim/calibration.hpp"
#include "tcsim/device.hpp"
#include "tcsim/dynamics.hpp"
#include "tcsim/error.hpp"
#include "tcsim/fluxcontrol.hpp"
#include "tcsim/report.hpp"
#include "tcsim/tomography.hpp"

struct tcsim_device {
  tcsim::DeviceModel model;
};

struct tcsim_result {
  std::string summary;
  std::vector<std::pair<std::string, std::string>> files;
};

namespace {

using namespace tcsim;

thread_local std::string g_last_error;

tcsim_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return TCSIM_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return TCSIM_ERR_PARSE;
    case ErrorCode::Numeric: return TCSIM_ERR_NUMERIC;
    case ErrorCode::Unreachable: return TCSIM_ERR_UNREACHABLE;
    case ErrorCode::Io: return TCSIM_ERR_IO;
  }
  return TCSIM_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into a status and the thread-local
// message. No exception crosses the C boundary.
template <class F>
tcsim_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return TCSIM_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return TCSIM_ERR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TCSIM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return TCSIM_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string command_of(const tcsim_run* run, const char* fallback) {
  return run != nullptr && run->command != nullptr ? run->command : fallback;
}

std::uint64_t seed_of(const tcsim_run* run) { return run != nullptr ? run->seed : 0; }

bool json_format(const tcsim_run* run) { return run != nullptr && run->format == TCSIM_FORMAT_JSON; }

Metadata file_metadata(const std::string& command, const std::string& input_text, std::uint64_t seed) {
  Metadata m;
  m.command = command;
  m.config_hash = sha256_hex(input_text);
  m.seed = seed;
  m.timestamp = utc_timestamp();
  return m;
}

std::string json_file(const Metadata& m, json body) {
  json j;
  j["metadata"] = metadata_json(m);
  for (auto& [k, v] : body.items()) j[k] = v;
  return j.dump(2) + "\n";
}

// Plain table in CSV or JSON (array of row objects).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string render(const Metadata& m, bool as_json) const {
    if (as_json) {
      json rs = json::array();
      for (const auto& r : rows) {
        json o;
        for (std::size_t i = 0; i < columns.size(); ++i) o[columns[i]] = r[i];
        rs.push_back(o);
      }
      return json_file(m, json{{"rows", rs}});
    }
    std::ostringstream o;
    o << csv_preamble(m);
    for (std::size_t i = 0; i < columns.size(); ++i) o << (i ? "," : "") << columns[i];
    o << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << format_number(r[i]);
      o << "\n";
    }
    return o.str();
  }
};

std::string fixed(double v, int digits) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

GateKind gate_kind_arg(const char* gate) {
  require(gate, "gate");
  return parse_gate_kind(gate);
}

tcsim_result* new_result() { return new tcsim_result(); }

}  // namespace

extern "C" {

const char* tcsim_version(void) { return TCSIM_VERSION; }

const char* tcsim_last_error(void) { return g_last_error.c_str(); }

void tcsim_string_free(char* s) { std::free(s); }

tcsim_status tcsim_device_load(const char* path, tcsim_device** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tcsim_device{DeviceModel(load_device_config(path))};
  });
}

tcsim_status tcsim_device_parse(const char* text, tcsim_device** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new tcsim_device{DeviceModel(parse_device_config(text))};
  });
}

void tcsim_device_free(tcsim_device* dev) { delete dev; }

tcsim_status tcsim_device_config_text(const tcsim_device* dev, char** out) {
  return guarded([&] {
    require(dev, "device");
    require(out, "out");
    *out = dup_string(to_config_text(dev->model.config()));
  });
}

tcsim_status tcsim_device_idle(const tcsim_device* dev, double out[9]) {
  return guarded([&] {
    require(dev, "device");
    require(out, "out");
    const DeviceParams p = dev->model.idle();
    const double v[9] = {p.f1, p.f2, p.fc, p.eta1, p.eta2, p.etac, p.g1c, p.g2c, p.g12};
    std::copy(v, v + 9, out);
  });
}

size_t tcsim_result_count(const tcsim_result* r) { return r ? r->files.size() : 0; }

const char* tcsim_result_name(const tcsim_result* r, size_t i) {
  return r && i < r->files.size() ? r->files[i].first.c_str() : nullptr;
}

const char* tcsim_result_text(const tcsim_result* r, size_t i) {
  return r && i < r->files.size() ? r->files[i].second.c_str() : nullptr;
}

const char* tcsim_result_summary(const tcsim_result* r) { return r ? r->summary.c_str() : nullptr; }

void tcsim_result_free(tcsim_result* r) { delete r; }

tcsim_status tcsim_cmd_device_show(const tcsim_device* dev, const tcsim_run* run, tcsim_result** out) {
  return guarded([&] {
    require(dev, "device");
    require(out, "out");
    const DeviceModel& model = dev->model;
    const Metadata m = make_metadata(command_of(run, "device show"), model.config(), seed_of(run));
    const DeviceParams p = model.idle();
    const double g_mean = std::sqrt(p.g1c * p.g2c);
    auto r = std::unique_ptr<tcsim_result>(new_result());
    if (json_format(run)) {
      json body;
      body["name"] = model.config().name;
      body["idle"] = to_json(p);
      body["g_qubit_coupler_mean_ghz"] = g_mean;
      body["dispersive_ratio_q1"] = p.dispersive_ratio1();
      body["dispersive_ratio_q2"] = p.dispersive_ratio2();
      r->files.emplace_back("device.json", json_file(m, body));
    } else {
      Table t{{"f1_ghz", "f2_ghz", "fc_ghz", "eta1_ghz", "eta2_ghz", "etac_ghz", "g1c_ghz", "g2c_ghz", "g12_ghz",
               "g_qubit_coupler_mean_ghz", "dispersive_ratio_q1", "dispersive_ratio_q2"},
              {{p.f1, p.f2, p.fc, p.eta1, p.eta2, p.etac, p.g1c, p.g2c, p.g12, g_mean, p.dispersive_ratio1(),
                p.dispersive_ratio2()}}};
      r->files.emplace_back("device.csv", t.render(m, false));
    }
    r->files.emplace_back("device.ini", to_config_text(model.config()));
    r->summary = "f1=" + fixed(p.f1, 4) + " f2=" + fixed(p.f2, 4) + " fc=" + fixed(p.fc, 4) +
                 " eta1=" + fixed(p.eta1, 4) + " eta2=" + fixed(p.eta2, 4) + " g=" + fixed(1e3 * g_mean, 1) +
                 "MHz g12=" + fixed(1e3 * p.g12, 2) + "MHz ratio1=" + fixed(p.dispersive_ratio1(), 4) +
                 " ratio2=" + fixed(p.dispersive_ratio2(), 4);
    *out = r.release();
  });
}

tcsim_status tcsim_cmd_sweep_coupling(const tcsim_device* dev, double flux_lo, double flux_hi, int points,
                                      double mod_freq, const tcsim_run* run, tcsim_result** out) {
  return guarded([&] {
    require(dev, "device");
    require(out, "out");
    if (points < 1) fail(ErrorCode::InvalidArgument, "sweep needs at least one point");
    if (!(flux_hi >= flux_lo)) fail(ErrorCode::InvalidArgument, "sweep range must satisfy lo <= hi");
    std::vector<double> flux;
    for (int i = 0; i < points; ++i) {
      flux.push_back(points == 1 ? flux_lo : flux_lo + (flux_hi - flux_lo) * i / (points - 1));
    }
    CouplingSweepOptions opt;
    opt.mod_freq = mod_freq > 0.0 ? mod_freq : dev->model.config().gates.iswap_mod_freq;
    opt.ramp = dev->model.config().gates.ramp;
    opt.sideband_cutoff = dev->model.config().gates.sideband_cutoff;
    const auto pts = coupling_vs_bias(dev->model, flux, opt);
    const Metadata m = make_metadata(command_of(run, "sweep coupling"), dev->model.config(), seed_of(run));
    auto r = std::unique_ptr<tcsim_result>(new_result());
    if (json_format(run)) {
      Table t{{"coupler_flux_phi0", "fc_ghz", "dispersive_ratio", "amplitude_phi0", "g_static_ghz", "g_dynamic_ghz",
               "fit_residual"},
              {}};
      for (const auto& p : pts) {
        t.rows.push_back({p.coupler_flux, p.fc, p.dispersive_ratio, p.amplitude, p.g_static, p.g_dynamic,
                          p.fit_residual});
      }
      r->files.emplace_back("coupling.json", t.render(m, true));
    } else {
      r->files.emplace_back("coupling.csv", coupling_csv(pts, m));
    }
    double worst = 0.0;
    for (const auto& p : pts) {
      const double rel = std::abs(std::abs(p.g_static) - p.g_dynamic) / std::max(std::abs(p.g_static), 1e-12);
      worst = std::max(worst, rel);
    }
    r->summary = "points=" + std::to_string(pts.size()) + " max_rel_dev=" + fixed(worst, 4);
    *out = r.release();
  });
}

tcsim_status tcsim_cmd_chevron(const tcsim_device* dev, const char* gate, const char* gate_json, int half_amp,
                               double amp_step, int half_dur, double dur_step, const tcsim_run* run,
                               tcsim_result** out) {
  return guarded([&] {
    require(dev, "device");
    require(out, "out");
    const GateSpec spec =
        gate_json != nullptr ? gate_spec_from_json(json::parse(gate_json)) : analytic_gate(gate_kind_arg(gate), dev->model);
    if (half_amp <= 0) half_amp = 10;
    if (half_dur <= 0) half_dur = 20;
    if (!(amp_step > 0.0)) amp_step = 0.002;
    if (!(dur_step > 0.0)) dur_step = spec.duration / 20.0;
    ChevronRequest req = chevron_request(dev->model, spec, half_amp, amp_step, half_dur, dur_step);
    if (spec.kind != GateKind::ISwap) {
      // CZ chevron: a full duration axis as well, for plotting.
      req.durations.clear();
      for (int k = -half_dur; k <= half_dur; ++k) req.durations.push_back(spec.duration + k * dur_step);
    }
    std::erase_if(req.durations, [&](double d) { return d < 0.0; });
    const ChevronResult c = chevron(dev->model, req);
    const Metadata m = make_metadata(command_of(run, "chevron"), dev->model.config(), seed_of(run));
    auto r = std::unique_ptr<tcsim_result>(new_result());
    r->files.emplace_back("chevron.csv", chevron_csv(c, m));
    r->files.emplace_back("chevron.json", chevron_sidecar(c, req, m).dump(2) + "\n");
    Eigen::Index bi = 0, bj = 0;
    const double best = c.population.maxCoeff(&bi, &bj);
    r->summary = "gate=" + to_string(spec.kind) + " max_population=" + fixed(best, 4) +
                 " at amplitude=" + fixed(c.amplitudes[static_cast<std::size_t>(bi)], 5) +
                 " duration=" + fixed(c.durations[static_cast<std::size_t>(bj)], 2) + "ns";
    *out = r.release();
  });
}

tcsim_status tcsim_cmd_calibrate(const tcsim_device* dev, const char* gate, const tcsim_run* run,
                                 tcsim_result** out) {
  return guarded([&] {
    require(dev, "device");
    require(out, "out");
    const GateKind kind = gate_kind_arg(gate);
    const Calibration cal = calibrate_gate(kind, dev->model);
    const Metadata m = make_metadata(command_of(run, ("calibrate " + to_string(kind)).c_str()), dev->model.config(), seed_of(run));
    auto r = std::unique_ptr<tcsim_result>(new_result());
    json body;
    body["gate"] = to_json(cal.spec);
    body["report"] = to_json(cal.report);
    const std::string stem = "gate_" + to_string(kind);
    r->files.emplace_back(stem + ".json", json_file(m, body));
    if (json_format(run)) {
      r->files.emplace_back("collisions_" + to_string(kind) + ".json", json_file(m, to_json(cal.report.collisions)));
    } else {
      r->files.emplace_back("collisions_" + to_string(kind) + ".csv", collision_csv(cal.report.collisions, m));
    }
    const auto& rep = cal.report;
    r->summary = "F_avg=" + fixed(rep.average_fidelity, 4) + " theta=" + fixed(rep.fsim.theta, 4) +
                 " phi=" + fixed(rep.fsim.phi, 4) + " leakage=" + fixed(rep.leakage, 5) +
                 " duration=" + fixed(cal.spec.duration, 2) + "ns amplitude=" + fixed(cal.spec.amplitude, 5);
    *out = r.release();
  });
}

tcsim_status tcsim_cmd_tomo(const tcsim_device* dev, const char* gate_json, int shots, int compensate,
                            const tcsim_run* run, tcsim_result** out) {
  return guarded([&] {
    require(dev, "device");
    require(gate_json, "gate_json");
    require(out, "out");
    if (shots < 0) fail(ErrorCode::InvalidArgument, "shots must be >= 0");
    const GateSpec spec = gate_spec_from_json(json::parse(gate_json));
    const GateEvaluation ev = evaluate_gate(dev->model, spec, {}, true, false);
    ProcessTensor ptm = ev.ptm;
    double clipped = 0.0;
    if (shots > 0) {
      QptOptions q;
      q.shots = shots;
      q.q1 = symmetric_confusion(dev->model.config().readout.q1);
      q.q2 = symmetric_confusion(dev->model.config().readout.q2);
      q.compensate = compensate != 0;
      q.seed = seed_of(run);
      const QptResult res = simulate_qpt(ev.corrected, q);
      ptm = res.ptm;
      ptm.leakage = ev.ptm.leakage;
      clipped = res.max_clipped;
    }
    const ProcessTensor ideal = ptm_from_operator(ev.target);
    const double f_avg = average_fidelity(ptm, ideal);
    const FSimFit fit = fit_fsim(ptm);
    const double perr = spec.kind == GateKind::ISwap ? phase_error(fit.phi) : phase_error(std::numbers::pi - fit.phi);
    const Metadata m = make_metadata(command_of(run, "tomo"), dev->model.config(), seed_of(run));
    auto r = std::unique_ptr<tcsim_result>(new_result());
    r->files.emplace_back("ptm.csv", ptm_csv(ptm, m));
    json body;
    body["gate"] = to_json(spec);
    body["shots"] = shots;
    body["readout_compensated"] = compensate != 0;
    body["average_fidelity"] = f_avg;
    body["process_fidelity"] = process_fidelity(ptm, ideal);
    body["fsim"] = to_json(fit);
    body["leakage"] = ptm.leakage;
    body["phase_error"] = perr;
    body["max_clipped"] = clipped;
    r->files.emplace_back("tomo.json", json_file(m, body));
    r->summary = "F_avg=" + fixed(f_avg, 4) + " theta=" + fixed(fit.theta, 4) + " phi=" + fixed(fit.phi, 4) +
                 " leakage=" + fixed(ptm.leakage, 5) + " phase_error=" + fixed(perr, 5);
    *out = r.release();
  });
}

tcsim_status tcsim_cmd_flux_invert(const char* crosstalk_csv_path, const double* target, size_t n,
                                   const tcsim_run* run, tcsim_result** out) {
  return guarded([&] {
    require(crosstalk_csv_path, "crosstalk path");
    require(target, "target");
    require(out, "out");
    const CrosstalkMatrix cm = load_crosstalk_csv(crosstalk_csv_path);
    if (static_cast<Eigen::Index>(n) != cm.c.rows()) {
      fail(ErrorCode::InvalidArgument, "target has " + std::to_string(n) + " entries, matrix has " +
                                           std::to_string(cm.c.rows()) + " lines");
    }
    const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(target, static_cast<Eigen::Index>(n));
    const Eigen::VectorXd x = compensate_crosstalk(cm, t);
    const Eigen::VectorXd back = cm.c * x;
    const Metadata m = file_metadata(command_of(run, "flux invert"), read_text(crosstalk_csv_path), seed_of(run));
    Table tab{{"line", "target_phi0", "source_setting", "achieved_phi0"}, {}};
    for (Eigen::Index i = 0; i < x.size(); ++i) tab.rows.push_back({double(i), t(i), x(i), back(i)});
    auto r = std::unique_ptr<tcsim_result>(new_result());
    r->files.emplace_back(json_format(run) ? "compensation.json" : "compensation.csv", tab.render(m, json_format(run)));
    std::ostringstream s;
    s << "settings=";
    for (Eigen::Index i = 0; i < x.size(); ++i) s << (i ? "," : "") << fixed(x(i), 6);
    s << " residual=" << (back - t).cwiseAbs().maxCoeff() << " cond=" << fixed(cm.condition_number(), 3);
    r->summary = s.str();
    *out = r.release();
  });
}

tcsim_status tcsim_cmd_transfer_apply(const char* table_csv_path, double requested_amp, double mod_freq,
                                      const tcsim_run* run, tcsim_result** out) {
  return guarded([&] {
    require(table_csv_path, "table path");
    require(out, "out");
    const double achieved = apply_transfer(load_transfer_csv(table_csv_path), requested_amp, mod_freq);
    const Metadata m = file_metadata(command_of(run, "transfer apply"), read_text(table_csv_path), seed_of(run));
    Table tab{{"requested_amp", "mod_freq_ghz", "achieved_amp"}, {{requested_amp, mod_freq, achieved}}};
    auto r = std::unique_ptr<tcsim_result>(new_result());
    r->files.emplace_back(json_format(run) ? "transfer.json" : "transfer.csv", tab.render(m, json_format(run)));
    r->summary = "achieved=" + fixed(achieved, 6) + " ratio=" + fixed(achieved / requested_amp, 6);
    *out = r.release();
  });
}

tcsim_status tcsim_transfer_apply(const char* table_csv_path, double requested_amp, double mod_freq,
                                  double* achieved) {
  return guarded([&] {
    require(table_csv_path, "table path");
    require(achieved, "achieved");
    *achieved = apply_transfer(load_transfer_csv(table_csv_path), requested_amp, mod_freq);
  });
}

tcsim_status tcsim_fsim_fit(const double ptm[256], double* theta, double* phi) {
  return guarded([&] {
    require(ptm, "ptm");
    require(theta, "theta");
    require(phi, "phi");
    ProcessTensor p;
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) p.r(i, j) = ptm[16 * i + j];
    }
    const FSimFit f = fit_fsim(p);
    *theta = f.theta;
    *phi = f.phi;
  });
}

}  // extern "C"
