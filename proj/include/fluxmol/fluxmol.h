/* C interface to the fluxonium-molecule toolkit.
 *
 * All entry points return fm_status; on failure a short message is copied
 * into the caller's error buffer (always NUL-terminated when err_len > 0).
 * Objects are opaque handles created and destroyed here; destroy functions
 * accept NULL.
 */
#ifndef FLUXMOL_H
#define FLUXMOL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fm_status {
    FM_OK = 0,
    FM_ERR_INVALID = 1, /* bad input or config */
    FM_ERR_NUMERIC = 2, /* solver or fit failure */
    FM_ERR_IO = 3       /* file system failure */
} fm_status;

/* A circuit description plus model choice, basis truncation, and solver
 * settings, parsed from a JSON document of the form
 *   {"circuit": {"EJ_GHz": ..., "EL_GHz": ..., "ELs_GHz": ..., "ECJ_GHz": ...,
 *                "EC_GHz": ..., "dCJ": 0, "dL": 0, "dEJ": 0},
 *    "model": "reduced" | "full",
 *    "truncation": {"n_phi": 35, "n_theta": 35, "n_zeta": 6},
 *    "diag": {"dense_threshold": 1600, "tol": 1e-10}}
 * where everything except the five circuit energies is optional. */
typedef struct fm_circuit fm_circuit;

/* Eigenvalues and eigenvectors at one flux point. */
typedef struct fm_spectrum fm_spectrum;

const char* fm_version(void);

fm_status fm_circuit_create_json(const char* json_text, fm_circuit** out, char* err,
                                 size_t err_len);
void fm_circuit_destroy(fm_circuit* c);

/* Frequency of the fast common mode, GHz. */
fm_status fm_zeta_frequency(const fm_circuit* c, double* out_ghz, char* err, size_t err_len);

/* Lowest k eigenstates at external flux (phi_c, phi_d), radians. */
fm_status fm_diagonalize(const fm_circuit* c, double phi_c, double phi_d, int k,
                         fm_spectrum** out, char* err, size_t err_len);
void fm_spectrum_destroy(fm_spectrum* s);

/* Number of computed states, or -1 for NULL. */
int fm_spectrum_size(const fm_spectrum* s);

/* Copy the ascending eigenvalues (GHz) into out[0..cap); fails when cap is
 * smaller than the number of computed states. */
fm_status fm_spectrum_eigenvalues(const fm_spectrum* s, double* out, int cap, char* err,
                                  size_t err_len);

/* How fm_run_command should read flux values in the config. */
typedef enum fm_flux_units {
    FM_FLUX_FROM_CONFIG = 0, /* config "flux_units" key, default radians */
    FM_FLUX_RADIANS = 1,
    FM_FLUX_TWO_PI = 2 /* multiples of 2 pi */
} fm_flux_units;

/* Run one artifact-producing command (spectrum | sweetspots | wavefunction |
 * coherence | decay | calibrate | fit) with the given JSON config document.
 * Explicit arguments override the config's top-level "out", "seed",
 * "threads", and "flux_units" values; pass NULL/empty out_dir, negative
 * seed, threads < 1, or FM_FLUX_FROM_CONFIG to keep the config's choice. */
fm_status fm_run_command(const char* name, const char* config_json, const char* out_dir,
                         long long seed, int threads, fm_flux_units flux_units, char* err,
                         size_t err_len);

#ifdef __cplusplus
}
#endif

#endif /* FLUXMOL_H */
