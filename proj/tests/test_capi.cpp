// Exercises the shared library through its C header only.
#include <doctest.h>

#include <cmath>
#include <string>

#include "tcsim/tcsim.h"

namespace {

struct DeviceHandle {
  tcsim_device* dev = nullptr;
  ~DeviceHandle() { tcsim_device_free(dev); }
};

struct ResultHandle {
  tcsim_result* r = nullptr;
  ~ResultHandle() { tcsim_result_free(r); }
};

std::string artifact(const tcsim_result* r, const std::string& name) {
  for (size_t i = 0; i < tcsim_result_count(r); ++i) {
    if (name == tcsim_result_name(r, i)) return tcsim_result_text(r, i);
  }
  return {};
}

}  // namespace

TEST_CASE("version and error state") {
  CHECK(std::string(tcsim_version()).size() > 0);
  DeviceHandle d;
  CHECK(tcsim_device_load("/nonexistent/device.ini", &d.dev) == TCSIM_ERR_IO);
  CHECK(d.dev == nullptr);
  CHECK(std::string(tcsim_last_error()).find("cannot open") != std::string::npos);
  CHECK(tcsim_device_load(TCSIM_TEST_DATA "/device.ini", &d.dev) == TCSIM_OK);
  CHECK(std::string(tcsim_last_error()).empty());
}

TEST_CASE("null arguments are rejected") {
  CHECK(tcsim_device_load(nullptr, nullptr) == TCSIM_ERR_INVALID_ARGUMENT);
  double idle[9];
  CHECK(tcsim_device_idle(nullptr, idle) == TCSIM_ERR_INVALID_ARGUMENT);
  tcsim_device_free(nullptr);
  tcsim_result_free(nullptr);
  tcsim_string_free(nullptr);
}

TEST_CASE("parse errors map to their status") {
  DeviceHandle d;
  CHECK(tcsim_device_parse("[qubit1]\nejs_ghz = abc\n", &d.dev) == TCSIM_ERR_PARSE);
  CHECK(std::string(tcsim_last_error()).size() > 0);
}

TEST_CASE("device round trip and idle point") {
  DeviceHandle d;
  REQUIRE(tcsim_device_load(TCSIM_TEST_DATA "/device.ini", &d.dev) == TCSIM_OK);
  double idle[9];
  REQUIRE(tcsim_device_idle(d.dev, idle) == TCSIM_OK);
  CHECK(idle[0] == doctest::Approx(3.803).epsilon(1e-3));
  CHECK(idle[1] == doctest::Approx(3.862).epsilon(1e-3));
  CHECK(idle[2] == doctest::Approx(5.915).epsilon(1e-3));

  char* text = nullptr;
  REQUIRE(tcsim_device_config_text(d.dev, &text) == TCSIM_OK);
  DeviceHandle e;
  CHECK(tcsim_device_parse(text, &e.dev) == TCSIM_OK);
  tcsim_string_free(text);
  double again[9];
  REQUIRE(tcsim_device_idle(e.dev, again) == TCSIM_OK);
  for (int k = 0; k < 9; ++k) CHECK(again[k] == idle[k]);
}

TEST_CASE("device show artifacts carry metadata") {
  DeviceHandle d;
  REQUIRE(tcsim_device_load(TCSIM_TEST_DATA "/device.ini", &d.dev) == TCSIM_OK);
  tcsim_run run{"device show", 5, TCSIM_FORMAT_JSON};
  ResultHandle r;
  REQUIRE(tcsim_cmd_device_show(d.dev, &run, &r.r) == TCSIM_OK);
  const std::string js = artifact(r.r, "device.json");
  REQUIRE_FALSE(js.empty());
  CHECK(js.find("\"seed\": 5") != std::string::npos);
  CHECK(js.find("config_sha256") != std::string::npos);
  CHECK_FALSE(artifact(r.r, "device.ini").empty());
  CHECK(std::string(tcsim_result_summary(r.r)).size() > 0);
}

TEST_CASE("flux compensation through the C API") {
  const double target[3] = {1.0, 0.0, 0.0};
  tcsim_run run{"flux invert", 0, TCSIM_FORMAT_CSV};
  ResultHandle r;
  REQUIRE(tcsim_cmd_flux_invert(TCSIM_TEST_DATA "/crosstalk_paper.csv", target, 3, &run, &r.r) == TCSIM_OK);
  CHECK(artifact(r.r, "compensation.csv").find("# config_sha256: ") != std::string::npos);
  ResultHandle bad;
  CHECK(tcsim_cmd_flux_invert(TCSIM_TEST_DATA "/crosstalk_paper.csv", target, 2, &run, &bad.r) ==
        TCSIM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("transfer function through the C API") {
  double achieved = 0.0;
  REQUIRE(tcsim_transfer_apply(TCSIM_TEST_DATA "/transfer_synthetic.csv", 0.3, 0.30, &achieved) == TCSIM_OK);
  CHECK(achieved == doctest::Approx(0.3 * 0.73));
  CHECK(tcsim_transfer_apply(TCSIM_TEST_DATA "/transfer_synthetic.csv", 0.3, 2.0, &achieved) ==
        TCSIM_ERR_INVALID_ARGUMENT);
  CHECK(tcsim_transfer_apply(TCSIM_TEST_DATA "/missing.csv", 0.3, 0.3, &achieved) == TCSIM_ERR_IO);
}

TEST_CASE("CZ02 calibration is unreachable") {
  DeviceHandle d;
  REQUIRE(tcsim_device_load(TCSIM_TEST_DATA "/device.ini", &d.dev) == TCSIM_OK);
  tcsim_run run{"calibrate cz02", 0, TCSIM_FORMAT_CSV};
  ResultHandle r;
  CHECK(tcsim_cmd_calibrate(d.dev, "cz02", &run, &r.r) == TCSIM_ERR_UNREACHABLE);
  CHECK(std::string(tcsim_last_error()).rfind("resonance: ", 0) == 0);
  CHECK(tcsim_cmd_calibrate(d.dev, "swap", &run, &r.r) == TCSIM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("fSim fit of a diagonal CZ-like PTM") {
  // CZ maps XI -> XZ, IX -> ZX, XX -> YY, and fixes the Z-type Paulis.
  double ptm[256] = {0};
  auto set = [&](int out, int in, double v) { ptm[out * 16 + in] = v; };
  const int perm[16][2] = {{0, 0},   {1, 13},  {2, 14},  {3, 3},   {4, 7},   {5, 10},  {6, 9},   {7, 4},
                           {8, 11},  {9, 6},   {10, 5},  {11, 8},  {12, 12}, {13, 1},  {14, 2},  {15, 15}};
  const double sign[16] = {1, 1, 1, 1, 1, 1, -1, 1, 1, -1, 1, 1, 1, 1, 1, 1};
  for (int k = 0; k < 16; ++k) set(perm[k][1], perm[k][0], sign[k]);
  double theta = 0.0;
  double phi = 0.0;
  REQUIRE(tcsim_fsim_fit(ptm, &theta, &phi) == TCSIM_OK);
  CHECK(std::abs(std::remainder(theta, 2.0 * M_PI)) < 1e-6);
  CHECK(std::abs(std::remainder(phi - M_PI, 2.0 * M_PI)) < 1e-6);
  CHECK(tcsim_fsim_fit(nullptr, &theta, &phi) == TCSIM_ERR_INVALID_ARGUMENT);
}
