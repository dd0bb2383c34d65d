#ifndef TCSIM_TCSIM_H
#define TCSIM_TCSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(TCSIM_BUILDING_LIBRARY)
#define TCSIM_API __attribute__((visibility("default")))
#else
#define TCSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tcsim_status {
  TCSIM_OK = 0,
  TCSIM_ERR_INVALID_ARGUMENT = 1,
  TCSIM_ERR_PARSE = 2,
  TCSIM_ERR_NUMERIC = 3,
  TCSIM_ERR_UNREACHABLE = 4,
  TCSIM_ERR_IO = 5,
  TCSIM_ERR_INTERNAL = 99
} tcsim_status;

typedef struct tcsim_device tcsim_device;

/* A command result: a one-line summary plus named text artifacts (file name,
   contents). Artifacts carry their own metadata header. */
typedef struct tcsim_result tcsim_result;

typedef enum tcsim_format { TCSIM_FORMAT_CSV = 0, TCSIM_FORMAT_JSON = 1 } tcsim_format;

typedef struct tcsim_run {
  const char* command; /* recorded in the metadata header; may be NULL */
  uint64_t seed;
  tcsim_format format;
} tcsim_run;

TCSIM_API const char* tcsim_version(void);

/* Message of the last failure on the calling thread; empty after success. */
TCSIM_API const char* tcsim_last_error(void);

TCSIM_API void tcsim_string_free(char* s);

TCSIM_API tcsim_status tcsim_device_load(const char* path, tcsim_device** out);
TCSIM_API tcsim_status tcsim_device_parse(const char* text, tcsim_device** out);
TCSIM_API void tcsim_device_free(tcsim_device* dev);

/* Canonical configuration text (re-parses to the same device). */
TCSIM_API tcsim_status tcsim_device_config_text(const tcsim_device* dev, char** out);

/* Idle-point parameters in GHz: f1 f2 fc eta1 eta2 etac g1c g2c g12. */
TCSIM_API tcsim_status tcsim_device_idle(const tcsim_device* dev, double out[9]);

TCSIM_API size_t tcsim_result_count(const tcsim_result* r);
TCSIM_API const char* tcsim_result_name(const tcsim_result* r, size_t i);
TCSIM_API const char* tcsim_result_text(const tcsim_result* r, size_t i);
TCSIM_API const char* tcsim_result_summary(const tcsim_result* r);
TCSIM_API void tcsim_result_free(tcsim_result* r);

TCSIM_API tcsim_status tcsim_cmd_device_show(const tcsim_device* dev, const tcsim_run* run, tcsim_result** out);

/* Exchange coupling versus coupler bias, `points` biases evenly in [lo, hi]. */
TCSIM_API tcsim_status tcsim_cmd_sweep_coupling(const tcsim_device* dev, double flux_lo, double flux_hi, int points,
                                                double mod_freq, const tcsim_run* run, tcsim_result** out);

/* Chevron around a gate operating point: the GateSpec JSON `gate_json` when
   non-NULL, else the analytic point of `gate` ("iswap", "cz"). Steps <= 0
   pick defaults. */
TCSIM_API tcsim_status tcsim_cmd_chevron(const tcsim_device* dev, const char* gate, const char* gate_json, int half_amp, double amp_step,
                                         int half_dur, double dur_step, const tcsim_run* run, tcsim_result** out);

TCSIM_API tcsim_status tcsim_cmd_calibrate(const tcsim_device* dev, const char* gate, const tcsim_run* run,
                                           tcsim_result** out);

/* Tomography of the gate described by `gate_json` (output of calibrate).
   shots == 0 gives the exact PTM; otherwise readout errors and finite
   sampling are simulated. */
TCSIM_API tcsim_status tcsim_cmd_tomo(const tcsim_device* dev, const char* gate_json, int shots, int compensate,
                                      const tcsim_run* run, tcsim_result** out);

/* Source settings realizing `target` under the crosstalk matrix in the CSV. */
TCSIM_API tcsim_status tcsim_cmd_flux_invert(const char* crosstalk_csv_path, const double* target, size_t n,
                                             const tcsim_run* run, tcsim_result** out);

TCSIM_API tcsim_status tcsim_cmd_transfer_apply(const char* table_csv_path, double requested_amp, double mod_freq,
                                                const tcsim_run* run, tcsim_result** out);

/* Direct numeric entry points. */
TCSIM_API tcsim_status tcsim_transfer_apply(const char* table_csv_path, double requested_amp, double mod_freq,
                                            double* achieved);
TCSIM_API tcsim_status tcsim_fsim_fit(const double ptm[256], double* theta, double* phi);

#ifdef __cplusplus
}
#endif

#endif
