/*
 * seqtpe — sequential two-photon-excitation cascade toolkit, C interface.
 *
 * Every entry point returns a status code; on failure seqtpe_last_error()
 * describes the problem (thread-local, valid until the next call on the
 * same thread). Scalar results are written through out-pointers. Undefined
 * correlations (a vanishing normalization, not a zero correlation) are
 * reported as NaN with SEQTPE_OK.
 *
 * Units: picoseconds for times and rates' inverses, hertz for dark rate,
 * seconds for interference windows, radians for phases.
 */
#ifndef SEQTPE_H
#define SEQTPE_H

#include <stddef.h>
#include <stdint.h>

#if defined _WIN32 || defined __CYGWIN__
#define SEQTPE_API __declspec(dllexport)
#else
#define SEQTPE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum seqtpe_status {
  SEQTPE_OK = 0,
  SEQTPE_ERR_INVALID_ARGUMENT = 1,
  SEQTPE_ERR_PARSE = 2,
  SEQTPE_ERR_NUMERIC = 3,
  SEQTPE_ERR_IO = 4,
  SEQTPE_ERR_INTERNAL = 5
} seqtpe_status;

SEQTPE_API const char* seqtpe_version(void);
SEQTPE_API const char* seqtpe_last_error(void);

/* Mode addressing: energy 0 = B, 1 = X; bin 0 = early, 1 = late. */

/* out[0..2] = alpha^2, beta^2, gamma^2 */
SEQTPE_API seqtpe_status seqtpe_coefficients(double tau_b_ps, double tau_x_ps,
                                             double dt_ps, double out[3]);

SEQTPE_API seqtpe_status seqtpe_mean_photon_number(double tau_b_ps, double tau_x_ps,
                                                   double dt_ps, double* out);

SEQTPE_API seqtpe_status seqtpe_analytic_g2(double tau_b_ps, double tau_x_ps, double dt_ps,
                                            int energy1, int bin1, int energy2, int bin2,
                                            double* out);

SEQTPE_API seqtpe_status seqtpe_max_indistinguishability(double tau_b_ps, double tau_x_ps,
                                                         double* out);

SEQTPE_API seqtpe_status seqtpe_hom_g2_analytic(double tau_b_ps, double tau_x_ps,
                                                double dt_ps, double phi, double* out);

/* Brute-force Fock-space evaluation of the same quantity. */
SEQTPE_API seqtpe_status seqtpe_hom_g2_oracle(double tau_b_ps, double tau_x_ps,
                                              double dt_ps, double phi, double* out);

/*
 * All 7 bipartitions of the four-mode state. Bit i of a mask places mode i
 * of the canonical order {B_e, X_e, B_l, X_l} in part 1; part 1 always
 * contains B_e and masks ascend. cap must be >= 7.
 */
SEQTPE_API seqtpe_status seqtpe_mutual_information_partitions(
    double tau_b_ps, double tau_x_ps, double dt_ps, uint32_t* part1_masks,
    double* bits, size_t cap, size_t* count);

/*
 * Simulation / analysis configuration, an opaque handle. Keys mirror the
 * CLI flags and the config-file keys:
 *   tau_b, tau_x, dt, fprep        cascade parameters
 *   efficiency, jitter, deadtime,  detector (ps where a time; dark_rate in
 *   dark_rate, split_ratio,          hertz; polarization one of h|v|none)
 *   polarization
 *   rep_period, cycles, pulses, seed, workers, min_dt
 * Values are decimal strings. Unknown keys or unparsable values fail with
 * SEQTPE_ERR_INVALID_ARGUMENT.
 */
typedef struct seqtpe_sim_config seqtpe_sim_config;

SEQTPE_API seqtpe_status seqtpe_sim_config_create(seqtpe_sim_config** out);
SEQTPE_API void seqtpe_sim_config_destroy(seqtpe_sim_config* config);
SEQTPE_API seqtpe_status seqtpe_sim_config_set(seqtpe_sim_config* config, const char* key,
                                               const char* value);

/* Runs the configured experiment and writes a tag file (format: README). */
SEQTPE_API seqtpe_status seqtpe_simulate_to_file(const seqtpe_sim_config* config,
                                                 const char* tags_path);

/*
 * Synthetic two-output interference stream. phase_mode is "const" (fixed
 * phi) or "random" (redrawn uniformly every stability_s seconds).
 */
SEQTPE_API seqtpe_status seqtpe_hom_synthesize_to_file(const seqtpe_sim_config* config,
                                                       const char* phase_mode, double phi,
                                                       double stability_s, double duration_s,
                                                       const char* tags_path);

/*
 * Analyses read a tag file and write CSV (schemas: README). Channel sets are
 * comma-separated channel ids, e.g. "1,2".
 */
SEQTPE_API seqtpe_status seqtpe_analyze_histogram(const char* tags_path,
                                                  const char* channels,
                                                  int64_t bin_width_ps, int64_t origin_ps,
                                                  const char* out_csv);

/* pairing: "same" or "displaced" (one-cycle displacement). */
SEQTPE_API seqtpe_status seqtpe_analyze_map(const char* tags_path, const char* channels_a,
                                            const char* channels_b, int64_t bin_width_ps,
                                            const char* pairing, const char* out_csv);

/*
 * Quadrant-normalized correlations for the pairs B-B, B-X, X-B, X-X.
 * dt_ps NaN reads the dt_ps header of the tag file; t0_ps NaN recovers the
 * pulse arrival by an exponentially-modified-Gaussian fit of the B-channel
 * arrival histogram.
 */
SEQTPE_API seqtpe_status seqtpe_analyze_quadrants(const char* tags_path,
                                                  int64_t bin_width_ps, double dt_ps,
                                                  double t0_ps, const char* out_csv);

/*
 * Mean photon number per energy mode vs pulse separation: every two-pulse
 * file is normalized by the single-pulse reference file. Each two-pulse file
 * must carry its dt_ps header key.
 */
SEQTPE_API seqtpe_status seqtpe_analyze_mu(const char* const* two_pulse_paths, size_t n_two,
                                           const char* one_pulse_path, const char* out_csv);

/*
 * Windowed cross-output correlation of a two-channel stream. Any of mean /
 * stddev / excluded may be NULL. The per-window series goes to out_csv.
 */
SEQTPE_API seqtpe_status seqtpe_analyze_hom(const char* tags_path, double window_s,
                                            double shift_s, int side_peaks,
                                            const char* out_csv, double* mean,
                                            double* stddev, size_t* excluded);

/*
 * Arrival-time fit of the given channels: out_params = {t0_ps, tau_ps,
 * sigma_ps, amplitude}. fix_sigma_ps NaN leaves sigma free.
 */
SEQTPE_API seqtpe_status seqtpe_fit_emg(const char* tags_path, const char* channels,
                                        int64_t bin_width_ps, int64_t origin_ps,
                                        double fix_sigma_ps, double out_params[4],
                                        double* residual_norm);

/* Full figure-data pipeline into out_dir (file set: README). */
SEQTPE_API seqtpe_status seqtpe_report(const seqtpe_sim_config* config, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* SEQTPE_H */
